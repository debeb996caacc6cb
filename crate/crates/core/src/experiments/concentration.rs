use serde::{Deserialize, Serialize};

use super::ldp::{threshold_index, window_sum_ln};
use super::mc::{binomial_se, run_batches};
use crate::divergence::{self, MethodChoice};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::overlap;

const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationRow {
    pub n: usize,
    pub samples: usize,
    /// Sample mean of `T_n / n`.
    pub mean: f64,
    pub std_err: f64,
    pub min: f64,
    /// Nearest-rank quantiles of `T_n / n` at 5, 25, 50, 75 and 95 percent.
    pub quantiles: Vec<f64>,
    /// Empirical `P(T_n / n < threshold)`.
    pub below: f64,
    pub below_se: f64,
    /// `sum_{j = k*}^{n-1} E(j)` with `k* = floor((1 - threshold) n) + 1`,
    /// an upper bound on `P(T_n / n < threshold)`.
    pub exact_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationReport {
    pub threshold: f64,
    pub rows: Vec<ConcentrationRow>,
    /// Limiting rate of `E(k)` when a closed or spectral form exists.
    pub exact_rate: Option<f64>,
    pub warnings: Vec<String>,
}

/// Samples `T_n(x, y) / n` for `x ~ mu`, `y ~ nu` independently at each `n`.
pub fn concentration_experiment(
    mu: &Measure,
    nu: &Measure,
    schedule: &[usize],
    samples: usize,
    threshold: f64,
    seed: u64,
) -> Result<ConcentrationReport> {
    crate::word::same_alphabet(mu.alphabet(), nu.alphabet())?;
    if samples == 0 || schedule.contains(&0) {
        return Err(Error::InvalidArgument("samples and word lengths must be positive".into()));
    }
    let mut warnings = Vec::new();
    if let Ok(h) = mu.shannon_entropy() {
        if h <= 0.0 {
            warnings.push("mu has zero entropy; concentration is not expected".into());
        }
    }
    let eps = 1.0 - threshold;
    let longest = schedule.iter().copied().max().unwrap_or(1);
    let seq = divergence::divergence_seq(mu, nu, longest, MethodChoice::Closed).ok();
    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let ratios: Vec<f64> = run_batches(samples, seed, n as u64, |rng| {
            let x = mu.sampler(rng).take(n, rng);
            let y = nu.sampler(rng).take(n, rng);
            overlap::shortest_path_syms(&x, &y).expect("equal lengths") as f64 / n as f64
        });
        let count = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / count;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let quantiles = QUANTILES
            .iter()
            .map(|q| sorted[((q * count).ceil() as usize).clamp(1, sorted.len()) - 1])
            .collect();
        let below = ratios.iter().filter(|&&r| r < threshold).count() as f64 / count;
        let exact_bound = seq.as_ref().map(|s| {
            let k = threshold_index(eps, n);
            window_sum_ln(&s.ln_values(), k, n - 1).exp()
        });
        rows.push(ConcentrationRow {
            n,
            samples,
            mean,
            std_err: (var / count).sqrt(),
            min: sorted[0],
            quantiles,
            below,
            below_se: binomial_se(below, samples),
            exact_bound,
        });
    }
    Ok(ConcentrationReport {
        threshold,
        rows,
        exact_rate: divergence::exact_rate(mu, nu).and_then(|r| r.value.finite()),
        warnings,
    })
}
