use serde::{Deserialize, Serialize};

use super::mc::{binomial_se, run_batches};
use crate::divergence::{self, MethodChoice};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::overlap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalRow {
    pub k: usize,
    /// Samples with `T_n = k`.
    pub hits: usize,
    /// Of those, samples with `T_{n+1} = k`.
    pub kept: usize,
    pub freq: f64,
    /// Binomial standard error under the reference `E(1)`.
    pub sigma: f64,
    /// `(freq - E(1)) / sigma`; absent when `sigma = 0`.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonconvergenceReport {
    pub n: usize,
    pub samples: usize,
    pub e1: f64,
    /// Empirical `P(T_{n+1} = T_n)`.
    pub p_same: f64,
    pub p_same_se: f64,
    pub rows: Vec<ConditionalRow>,
}

/// Draws `(n + 1)`-prefixes of `x ~ mu` and `y ~ nu` and compares `T_n` with
/// `T_{n+1}`. Given `T_n = k`, the value is kept exactly when
/// `y_n = x_{n-k}`, an event of probability `E(1)` for i.i.d. pairs.
pub fn nonconvergence_probe(
    mu: &Measure,
    nu: &Measure,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<NonconvergenceReport> {
    crate::word::same_alphabet(mu.alphabet(), nu.alphabet())?;
    if n == 0 || samples == 0 {
        return Err(Error::InvalidArgument("n and samples must be positive".into()));
    }
    let e1 = divergence::divergence_seq(mu, nu, 1, MethodChoice::Auto)?.e(1).value;
    let pairs: Vec<(usize, usize)> = run_batches(samples, seed, n as u64, |rng| {
        let x = mu.sampler(rng).take(n + 1, rng);
        let y = nu.sampler(rng).take(n + 1, rng);
        let short = overlap::shortest_path_syms(&x[..n], &y[..n]).expect("equal lengths");
        let long = overlap::shortest_path_syms(&x, &y).expect("equal lengths");
        (short, long)
    });
    let mut hits = vec![0usize; n + 1];
    let mut kept = vec![0usize; n + 1];
    for &(a, b) in &pairs {
        hits[a] += 1;
        if a == b {
            kept[a] += 1;
        }
    }
    let rows = (1..=n)
        .filter(|&k| hits[k] > 0)
        .map(|k| {
            let freq = kept[k] as f64 / hits[k] as f64;
            let sigma = binomial_se(e1, hits[k]);
            ConditionalRow {
                k,
                hits: hits[k],
                kept: kept[k],
                freq,
                sigma,
                z: (sigma > 0.0).then(|| (freq - e1) / sigma),
            }
        })
        .collect();
    let p_same = kept.iter().sum::<usize>() as f64 / samples as f64;
    Ok(NonconvergenceReport {
        n,
        samples,
        e1,
        p_same,
        p_same_se: binomial_se(p_same, samples),
        rows,
    })
}
