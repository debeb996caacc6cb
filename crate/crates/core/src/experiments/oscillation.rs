use serde::{Deserialize, Serialize};

use crate::divergence::{self, MethodChoice, Rate};
use crate::error::{Error, Result};
use crate::measures::Measure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEnd {
    /// Prefix length at the end of the block.
    pub k: usize,
    pub symbol: u32,
    pub rate: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationReport {
    pub p: f64,
    pub kmax: usize,
    pub window: (usize, usize),
    pub liminf_est: Rate,
    pub limsup_est: Rate,
    pub block_ends: Vec<BlockEnd>,
    /// `r_k = -(1/k) ln E(k)` for `k = 1..=kmax`.
    pub rates: Vec<Rate>,
}

/// Rate sequence of the blocks sequence `0^2 1^4 0^8 ...` against
/// Bernoulli(`p`), for which `E(k) = nu(x_0^{k-1})`.
pub fn rate_oscillation_demo(p: f64, kmax: usize) -> Result<OscillationReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} outside (0, 1)")));
    }
    let mu = Measure::dirac_blocks();
    let nu = Measure::bernoulli(p)?;
    let (est, seq) = divergence::divergence_rate(&mu, &nu, kmax, MethodChoice::Closed)?;
    let rates = seq.rates();
    // block s has length 2^s and ends after 2^{s+1} - 2 symbols
    let block_ends = (1..)
        .map(|s: u32| ((1usize << (s + 1)) - 2, s))
        .take_while(|&(k, _)| k <= kmax)
        .map(|(k, s)| BlockEnd {
            k,
            symbol: u32::from(s % 2 == 0),
            rate: rates[k - 1],
        })
        .collect();
    Ok(OscillationReport {
        p,
        kmax,
        window: est.window,
        liminf_est: est.liminf_est,
        limsup_est: est.limsup_est,
        block_ends,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent evaluation: count symbols of the blocks sequence.
    fn rate_by_counting(p: f64, k: usize) -> f64 {
        let ones = (0..k).filter(|&t| (usize::BITS - 1 - (t + 2).leading_zeros()) % 2 == 0).count();
        -((ones as f64) * p.ln() + ((k - ones) as f64) * (1.0 - p).ln()) / k as f64
    }

    #[test]
    fn fair_coin_is_flat() {
        let r = rate_oscillation_demo(0.5, 256).unwrap();
        for rate in &r.rates {
            assert!((rate.as_f64() - 2f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_counting_oracle() {
        let r = rate_oscillation_demo(0.3, 1000).unwrap();
        for k in [1, 2, 3, 6, 7, 30, 999, 1000] {
            assert!((r.rates[k - 1].as_f64() - rate_by_counting(0.3, k)).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn block_end_sign() {
        for p in [0.3, 0.7] {
            let r = rate_oscillation_demo(p, 1 << 12).unwrap();
            let last_two = &r.block_ends[r.block_ends.len() - 2..];
            let zero_end = last_two.iter().find(|b| b.symbol == 0).unwrap().rate.as_f64();
            let one_end = last_two.iter().find(|b| b.symbol == 1).unwrap().rate.as_f64();
            assert_eq!(zero_end > one_end, p > 0.5, "p={p}");
        }
    }
}
