use serde::{Deserialize, Serialize};

use crate::divergence::{self, MethodChoice, Rate};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::prob::LogSum;

/// Smallest `k` with `k > eps * n`, so that `T_n / n < 1 - eps` is the
/// event `n - T_n >= k`. The nudge absorbs rounding in `eps * n`.
pub fn threshold_index(eps: f64, n: usize) -> usize {
    (eps * n as f64 + 1e-9).floor() as usize + 1
}

/// `ln sum_{j=lo}^{hi} E(j)` from `ln E(1..)`; `-inf` for an empty range.
pub(crate) fn window_sum_ln(ln_e: &[f64], lo: usize, hi: usize) -> f64 {
    let mut acc = LogSum::new();
    for j in lo..=hi.min(ln_e.len()) {
        acc.add_ln(ln_e[j - 1]);
    }
    acc.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpPoint {
    pub epsilon: f64,
    pub k_star: usize,
    /// `|ln sum_{j=k*}^{n-1} E(j)| / n`.
    pub lower_rate: Rate,
    /// `|ln E(k*)| / n`.
    pub upper_rate: Rate,
    /// `epsilon * R` when the limiting rate is known.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpCurve {
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub points: Vec<LdpPoint>,
    pub exact_rate: Option<f64>,
}

/// Rate bounds for `P(T_n / n < 1 - eps)` from
/// `E(k*) <= P <= sum_{j=k*}^{n-1} E(j)`.
pub fn ldp_curve(mu: &Measure, nu: &Measure, epsilons: &[f64], n: usize) -> Result<LdpCurve> {
    if divergence::transfer_pair(mu, nu).is_none() {
        return Err(Error::VariantMismatch(format!(
            "large-deviation bounds need i.i.d. or Markov measures, got ({}, {})",
            mu.variant_name(),
            nu.variant_name()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidArgument(format!("epsilon {e} outside (0, 1)")));
    }
    let ln_e = if n > 1 {
        divergence::divergence_seq(mu, nu, n - 1, MethodChoice::Closed)?.ln_values()
    } else {
        Vec::new()
    };
    let exact_rate = divergence::exact_rate(mu, nu).and_then(|r| r.value.finite());
    let to_rate = |ln: f64| {
        if ln == f64::NEG_INFINITY {
            Rate::Infinite
        } else {
            Rate::Finite(ln.abs() / n as f64)
        }
    };
    let points = epsilons
        .iter()
        .map(|&eps| {
            let k = threshold_index(eps, n);
            let (lower, upper) = if k < n {
                (window_sum_ln(&ln_e, k, n - 1), ln_e[k - 1])
            } else {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            };
            LdpPoint {
                epsilon: eps,
                k_star: k,
                lower_rate: to_rate(lower),
                upper_rate: to_rate(upper),
                reference: exact_rate.map(|r| eps * r),
            }
        })
        .collect();
    Ok(LdpCurve {
        n,
        epsilons: epsilons.to_vec(),
        points,
        exact_rate,
    })
}

/// `(lower_rate, upper_rate)` at one `eps`.
pub fn ldp_bounds(mu: &Measure, nu: &Measure, eps: f64, n: usize) -> Result<(Rate, Rate)> {
    let c = ldp_curve(mu, nu, &[eps], n)?;
    Ok((c.points[0].lower_rate, c.points[0].upper_rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::law_exact;
    use crate::word::Alphabet;

    #[test]
    fn threshold_on_integer_products() {
        assert_eq!(threshold_index(0.25, 8), 3);
        assert_eq!(threshold_index(0.3, 10), 4);
        assert_eq!(threshold_index(0.1, 32), 4);
        // eps = 1 - 1/n leaves no admissible k
        assert_eq!(threshold_index(1.0 - 1.0 / 8.0, 8), 8);
    }

    #[test]
    fn bounds_bracket_exact_probability() {
        let (mu, nu) = (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.6).unwrap());
        let n = 10;
        let law = law_exact(&mu, &nu, n).unwrap();
        for eps in [0.15, 0.3, 0.5] {
            let k = threshold_index(eps, n);
            let p = law.tail_at(k);
            let (lo, hi) = ldp_bounds(&mu, &nu, eps, n).unwrap();
            // smaller rate means larger probability
            assert!((-p.ln() / n as f64) >= lo.as_f64() - 1e-12);
            assert!((-p.ln() / n as f64) <= hi.as_f64() + 1e-12);
        }
    }

    #[test]
    fn bernoulli_rates_converge() {
        let (mu, nu) = (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.7).unwrap());
        let r = -(2.0f64 * 0.3 * 0.7).ln();
        let c = ldp_curve(&mu, &nu, &[0.25], 4000).unwrap();
        let pt = &c.points[0];
        assert!(pt.lower_rate.as_f64() <= pt.upper_rate.as_f64());
        for rate in [pt.lower_rate, pt.upper_rate] {
            assert!((rate.as_f64() / (0.25 * r) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn markov_rates_tighten() {
        let a = Alphabet::binary();
        let mu = Measure::markov(a.clone(), vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let nu = Measure::markov(a, vec![vec![0.4, 0.6], vec![0.5, 0.5]]).unwrap();
        let eps = 0.2;
        let gaps = |n: usize| {
            let p = &ldp_curve(&mu, &nu, &[eps], n).unwrap().points[0];
            let target = p.reference.unwrap();
            ((p.lower_rate.as_f64() - target).abs(), (p.upper_rate.as_f64() - target).abs())
        };
        let mut n = 250;
        while n <= 16_000 {
            let (l4, u4) = gaps(n * 4);
            let (l, u) = gaps(n);
            assert!(l4 <= l && u4 <= u, "n={n}");
            n *= 4;
        }
    }

    #[test]
    fn empty_event() {
        let m = Measure::uniform(2).unwrap();
        let (lo, hi) = ldp_bounds(&m, &m, 1.0 - 1.0 / 8.0, 8).unwrap();
        assert_eq!((lo, hi), (Rate::Infinite, Rate::Infinite));
        assert!(ldp_bounds(&Measure::dirac_blocks(), &m, 0.1, 8).is_err());
    }
}
