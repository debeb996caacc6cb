//! Desk-scale drivers for the limit theorems: concentration of `T_n / n`,
//! large-deviation rate bounds, the non-convergence probe, rate oscillation
//! and specification gaps.

mod concentration;
mod ldp;
pub mod mc;
mod nonconv;
mod oscillation;
mod vwsp;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use concentration::{concentration_experiment, ConcentrationReport, ConcentrationRow};
pub use ldp::{ldp_bounds, ldp_curve, threshold_index, LdpCurve, LdpPoint};
pub use nonconv::{nonconvergence_probe, ConditionalRow, NonconvergenceReport};
pub use oscillation::{rate_oscillation_demo, BlockEnd, OscillationReport};
pub use vwsp::{admissible_words, gap_survey, vwsp_gap, GapRow};

use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureSpec};
use crate::word::Word;

pub const DEFAULT_EPSILONS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Concentration,
    Ldp,
    Nonconv,
    Oscillation,
    Vwsp,
}

/// A measure given inline or as a path to a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRef {
    Inline(MeasureSpec),
    Path(PathBuf),
}

impl MeasureRef {
    /// Loads file references, resolving relative paths against `base`.
    pub fn resolve(&self, base: &Path) -> Result<MeasureSpec> {
        match self {
            MeasureRef::Inline(spec) => Ok(spec.clone()),
            MeasureRef::Path(p) => {
                let path = if p.is_relative() { base.join(p) } else { p.clone() };
                MeasureSpec::from_json(&std::fs::read_to_string(&path)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordPair {
    pub omega: String,
    pub xi: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MeasureRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<MeasureRef>,
    /// Word lengths, strictly increasing.
    #[serde(default)]
    pub n_schedule: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Concentration: report `P(T_n / n < threshold)`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Oscillation: Bernoulli parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Oscillation: largest `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    /// Gap survey: largest gap searched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_max: Option<usize>,
    /// Gap survey: explicit pairs; every admissible pair when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<WordPair>,
}

fn default_samples() -> usize {
    10_000
}

fn default_epsilons() -> Vec<f64> {
    DEFAULT_EPSILONS.to_vec()
}

fn default_threshold() -> f64 {
    0.9
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults parse")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("epsilon {e} outside (0, 1)"));
        }
        if self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_schedule must be strictly increasing".into());
        }
        if self.n_schedule.first() == Some(&0) {
            return bad("n_schedule entries must be positive".into());
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad(format!("threshold {} outside (0, 1]", self.threshold));
        }
        Ok(())
    }

    /// Replaces file references by their contents.
    pub fn resolved(&self, base: &Path) -> Result<Self> {
        let mut out = self.clone();
        for slot in [&mut out.mu, &mut out.nu] {
            if let Some(r) = slot {
                *slot = Some(MeasureRef::Inline(r.resolve(base)?));
            }
        }
        Ok(out)
    }

    fn measure(&self, which: &str) -> Result<Measure> {
        let slot = if which == "mu" { &self.mu } else { &self.nu };
        match slot {
            Some(MeasureRef::Inline(spec)) => spec.build(),
            Some(MeasureRef::Path(p)) => MeasureSpec::from_json(&std::fs::read_to_string(p)?)?.build(),
            None => Err(Error::InvalidArgument(format!("config needs `{which}`"))),
        }
    }

    fn schedule(&self) -> Result<&[usize]> {
        if self.n_schedule.is_empty() {
            return Err(Error::InvalidArgument("config needs a nonempty `n_schedule`".into()));
        }
        Ok(&self.n_schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "data", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentResult {
    Concentration(ConcentrationReport),
    Ldp(Vec<LdpCurve>),
    Nonconv(Vec<NonconvergenceReport>),
    Oscillation(OscillationReport),
    Vwsp(Vec<GapRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub result: ExperimentResult,
}

/// Runs one experiment on a resolved config. `seed` overrides `cfg.seed`.
pub fn run_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    seed: Option<u64>,
    version: &str,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let result = match kind {
        ExperimentKind::Concentration => ExperimentResult::Concentration(concentration_experiment(
            &cfg.measure("mu")?,
            &cfg.measure("nu")?,
            cfg.schedule()?,
            cfg.samples,
            cfg.threshold,
            seed,
        )?),
        ExperimentKind::Ldp => {
            let (mu, nu) = (cfg.measure("mu")?, cfg.measure("nu")?);
            ExperimentResult::Ldp(
                cfg.schedule()?
                    .iter()
                    .map(|&n| ldp_curve(&mu, &nu, &cfg.epsilons, n))
                    .collect::<Result<_>>()?,
            )
        }
        ExperimentKind::Nonconv => {
            let (mu, nu) = (cfg.measure("mu")?, cfg.measure("nu")?);
            ExperimentResult::Nonconv(
                cfg.schedule()?
                    .iter()
                    .map(|&n| nonconvergence_probe(&mu, &nu, n, cfg.samples, seed))
                    .collect::<Result<_>>()?,
            )
        }
        ExperimentKind::Oscillation => ExperimentResult::Oscillation(rate_oscillation_demo(
            cfg.p.unwrap_or(0.3),
            cfg.kmax.unwrap_or(1 << 13),
        )?),
        ExperimentKind::Vwsp => {
            let m = cfg.measure("mu")?;
            let g_max = cfg.g_max.unwrap_or(16);
            let mut rows = Vec::new();
            for &n in cfg.schedule()? {
                let pairs = cfg
                    .pairs
                    .iter()
                    .map(|p| Ok((m.alphabet().parse_word(&p.omega)?, m.alphabet().parse_word(&p.xi)?)))
                    .collect::<Result<Vec<(Word, Word)>>>()?
                    .into_iter()
                    .filter(|(a, _)| a.len() == n)
                    .collect::<Vec<_>>();
                if !cfg.pairs.is_empty() && pairs.is_empty() {
                    continue;
                }
                rows.push(gap_survey(&m, n, &pairs, g_max)?);
            }
            ExperimentResult::Vwsp(rows)
        }
    };
    Ok(ExperimentReport {
        version: version.to_string(),
        seed,
        config: cfg.clone(),
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::from_json(r#"{"samples":0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"epsilons":[0.0]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"n_schedule":[8,8]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"n_schedule":[8,16]}"#).unwrap();
        assert_eq!(cfg.samples, 10_000);
        assert_eq!(cfg.epsilons, DEFAULT_EPSILONS);
    }

    #[test]
    fn report_round_trip() {
        let cfg = ExperimentConfig::from_json(
            r#"{"mu":{"type":"iid","alphabet":["0","1"],"probs":[0.5,0.5]},
                "nu":{"type":"iid","alphabet":["0","1"],"probs":[0.5,0.5]},
                "n_schedule":[6],"samples":300}"#,
        )
        .unwrap();
        for kind in [ExperimentKind::Concentration, ExperimentKind::Ldp, ExperimentKind::Nonconv] {
            let r = run_experiment(kind, &cfg, Some(4), "test").unwrap();
            let text = serde_json::to_string(&r).unwrap();
            let back: ExperimentReport = serde_json::from_str(&text).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
    }
}
