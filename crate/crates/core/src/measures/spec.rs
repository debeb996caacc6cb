//! JSON measure descriptions.

use serde::{Deserialize, Serialize};

use super::{HouseOfCards, Measure, Pattern, DEFAULT_Y_MAX};
use crate::error::{Error, Result};
use crate::word::Alphabet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Iid {
        alphabet: Vec<String>,
        probs: Vec<f64>,
    },
    Markov {
        alphabet: Vec<String>,
        transition: Vec<Vec<f64>>,
    },
    Dirac {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<String>>,
        pattern: PatternSpec,
    },
    Mixture {
        lambda: f64,
        first: Box<MeasureSpec>,
        second: Box<MeasureSpec>,
    },
    #[serde(rename = "renewal_hoc")]
    RenewalHoc {
        #[serde(default)]
        q: Vec<f64>,
        #[serde(default = "default_y_max")]
        y_max: usize,
        /// Branch probability for states past the end of `q`.
        #[serde(default = "default_q")]
        default_q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<RenewalPreset>,
    },
}

fn default_y_max() -> usize {
    DEFAULT_Y_MAX
}

fn default_q() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewalPreset {
    /// `q_y = 1` on each `[m^2, m^2 + m]`; the explicit `q` entries are ignored.
    Squares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternSpec {
    Named(NamedPattern),
    Periodic(PeriodicPattern),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPattern {
    Blocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicPattern {
    pub periodic: String,
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureSpec::Iid { alphabet, probs } => Measure::iid(Alphabet::new(alphabet)?, probs.clone()),
            MeasureSpec::Markov {
                alphabet,
                transition,
            } => Measure::markov(Alphabet::new(alphabet)?, transition.clone()),
            MeasureSpec::Dirac { alphabet, pattern } => match pattern {
                PatternSpec::Named(NamedPattern::Blocks) => {
                    let a = match alphabet {
                        Some(labels) => Alphabet::new(labels)?,
                        None => Alphabet::binary(),
                    };
                    Measure::dirac(a, Pattern::Blocks)
                }
                PatternSpec::Periodic(p) => {
                    let labels = Alphabet::split_labels(&p.periodic);
                    let a = match alphabet {
                        Some(given) => Alphabet::new(given)?,
                        None => {
                            let mut distinct = labels.clone();
                            distinct.sort();
                            distinct.dedup();
                            Alphabet::new(&distinct)?
                        }
                    };
                    let w = a.parse_word(&p.periodic).map_err(|e| Error::invalid("pattern", e.to_string()))?;
                    Measure::dirac(a, Pattern::Periodic(w.syms().to_vec()))
                }
            },
            MeasureSpec::Mixture {
                lambda,
                first,
                second,
            } => Measure::mixture(*lambda, first.build()?, second.build()?),
            MeasureSpec::RenewalHoc {
                q,
                y_max,
                default_q,
                preset,
            } => match preset {
                Some(RenewalPreset::Squares) => {
                    let q = HouseOfCards::squares_preset(*y_max, *default_q);
                    Measure::house_of_cards(&q, *y_max, *default_q)
                }
                None => Measure::house_of_cards(q, *y_max, *default_q),
            },
        }
    }
}
