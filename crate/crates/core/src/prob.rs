//! Probabilities carried together with their natural logarithm.

use serde::{Deserialize, Serialize};

/// Below this log-probability the linear value is not reported.
pub const LN_UNDERFLOW: f64 = -700.0;

/// Words longer than this are accumulated in the log domain.
pub const LINEAR_MAX_LEN: usize = 50;

/// A probability with a log-domain companion.
///
/// `value` is 0 when the probability is either exactly zero or smaller than
/// `e^-700`; `ln` distinguishes the two cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prob {
    pub value: f64,
    #[serde(with = "ln_serde")]
    pub ln: f64,
}

impl Prob {
    pub const ZERO: Prob = Prob {
        value: 0.0,
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: Prob = Prob { value: 1.0, ln: 0.0 };

    pub fn from_value(value: f64) -> Self {
        Prob {
            value,
            ln: value.ln(),
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        let value = if ln >= LN_UNDERFLOW { ln.exp() } else { 0.0 };
        Prob { value, ln }
    }

    /// True when the probability is positive but too small to be reported linearly.
    pub fn is_log_only(&self) -> bool {
        self.ln.is_finite() && self.ln < LN_UNDERFLOW
    }

    pub fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY
    }
}

/// Serializes `-inf` as the string "-inf" so JSON output never holds a bare infinity.
pub(crate) mod ln_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("unexpected log value {s:?}"))),
        }
    }
}

/// Streaming log-sum-exp accumulator.
///
/// Represents `scaled * exp(max)`. Merging is order-sensitive only through
/// floating rounding, so callers fix the merge order for reproducibility.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ln(&mut self, ln: f64) {
        if ln == f64::NEG_INFINITY {
            return;
        }
        if ln <= self.max {
            self.scaled += (ln - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - ln).exp() + 1.0;
            self.max = ln;
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.scaled == 0.0 {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn ln(&self) -> f64 {
        if self.scaled == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    pub fn prob(&self) -> Prob {
        Prob::from_ln(self.ln())
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
