//! Exact law of `n - T_n(x, y)` for `(x, y) ~ mu x nu`.
//!
//! `P(n - T_n >= k) = E(k) + a_{k,n}`, where `a_{k,n}` is the `mu nu` mass of
//! words of length `m in (k, n)` whose longest border is shorter than `k`.
//! Both terms come from one depth-first pass that carries the failure
//! function of the current word, so every `m`-word is bucketed by its longest
//! border. `A[m][b]` below is that bucketed mass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{self, CylinderTable};
use crate::enumerate::{for_each_word, par_dfs};
use crate::error::{Error, Result};
use crate::limits;
use crate::measures::{Measure, Prefix};
use crate::overlap;
use crate::prob::Prob;
use crate::word::{same_alphabet, Sym};

/// Largest tolerated negative point mass and deviation of the total from 1.
pub const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableSource {
    Coefficients,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub k: usize,
    pub e: Prob,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionTable {
    pub n: usize,
    pub source: TableSource,
    /// `P(n - T >= k)` for `k = 1..n-1`.
    pub tail: Vec<f64>,
    /// `P(T = t)` for `t = 1..=n`.
    pub pmf: Vec<f64>,
    /// `P(T = n)`.
    pub avoiding_mass: f64,
    /// `(E(k), a_{k,n})` per `k`; empty for brute-force tables.
    pub components: Vec<Component>,
    pub warnings: Vec<String>,
}

impl DistributionTable {
    /// `P(n - T >= k)` with `tail(0) = 1` and `tail(n) = 0`.
    pub fn tail_at(&self, k: usize) -> f64 {
        match k {
            0 => 1.0,
            k if k >= self.n => 0.0,
            k => self.tail[k - 1],
        }
    }

    /// `P(T = t)` for `1 <= t <= n`.
    pub fn pmf_at(&self, t: usize) -> f64 {
        self.pmf[t - 1]
    }

    /// Largest entrywise gap in tails and point masses.
    pub fn max_discrepancy(&self, other: &DistributionTable) -> f64 {
        self.tail
            .iter()
            .zip(&other.tail)
            .chain(self.pmf.iter().zip(&other.pmf))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_t t P(T = t) / n`.
    pub fn mean_ratio(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum::<f64>()
            / self.n as f64
    }
}

/// Incremental failure state of the word on the current DFS path.
#[derive(Clone)]
struct Node {
    mu: Prefix,
    nu: Prefix,
    fail: Vec<usize>,
}

/// `A[m][b]` for `m <= depth`: mass of `m`-words with longest border `b`.
fn border_mass(mu: &Measure, nu: &Measure, depth: usize) -> Result<Vec<Vec<f64>>> {
    same_alphabet(mu.alphabet(), nu.alphabet())?;
    let size = mu.alphabet().size();
    limits::check_power("overlap coefficient enumeration", size, depth)?;
    let root = Node {
        mu: mu.prefix_start(),
        nu: nu.prefix_start(),
        fail: vec![0],
    };
    let blank = || (0..=depth).map(|m| vec![0.0; m.max(1)]).collect::<Vec<Vec<f64>>>();
    Ok(par_dfs(
        size,
        depth,
        root,
        |node: &Node, w: &[Sym]| {
            let a = *w.last().unwrap();
            let pm = mu.prefix_push(&node.mu, a);
            if mu.prefix_prob(&pm).is_zero() {
                return None;
            }
            let pn = nu.prefix_push(&node.nu, a);
            if nu.prefix_prob(&pn).is_zero() {
                return None;
            }
            let m = w.len();
            let mut fail = node.fail.clone();
            let mut k = if m > 1 { fail[m - 1] } else { 0 };
            if m > 1 {
                while k > 0 && w[m - 1] != w[k] {
                    k = fail[k];
                }
                if w[m - 1] == w[k] {
                    k += 1;
                }
            }
            fail.push(k);
            Some(Node { mu: pm, nu: pn, fail })
        },
        blank,
        |acc: &mut Vec<Vec<f64>>, w: &[Sym], node: &Node| {
            let m = w.len();
            acc[m][node.fail[m]] += mu.prefix_prob(&node.mu).value * nu.prefix_prob(&node.nu).value;
        },
        |acc, other| {
            for (row, o) in acc.iter_mut().zip(other) {
                row.iter_mut().zip(o).for_each(|(x, y)| *x += y);
            }
        },
    ))
}

/// `sum_{m=k+1}^{m_hi} sum_{b < k} A[m][b]`.
fn a_from_mass(mass: &[Vec<f64>], k: usize, m_hi: usize) -> f64 {
    (k + 1..=m_hi).map(|m| mass[m][..k].iter().sum::<f64>()).sum()
}

fn e_from_mass(mass: &[Vec<f64>], k: usize) -> f64 {
    mass[k].iter().sum()
}

/// `a_{k,n}`; zero for `k = n - 1`.
pub fn a_coeff(mu: &Measure, nu: &Measure, k: usize, n: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n - 1, got k={k}, n={n}")));
    }
    let mass = border_mass(mu, nu, n - 1)?;
    Ok(a_from_mass(&mass, k, n - 1))
}

/// `a_{k,n}` for `k = 1..n-1`.
pub fn a_table(mu: &Measure, nu: &Measure, n: usize) -> Result<Vec<f64>> {
    let mass = border_mass(mu, nu, n.saturating_sub(1))?;
    Ok((1..n).map(|k| a_from_mass(&mass, k, n - 1)).collect())
}

fn hypothesis_warnings(mu: &Measure, nu: &Measure, n: usize) -> Vec<String> {
    let mut out = Vec::new();
    match nu.is_complete_grammar(n) {
        Ok(true) => {}
        Ok(false) => out.push(format!("nu lacks complete grammar at length {n}; full-shift semantics apply")),
        Err(e) => out.push(format!("complete grammar of nu not verified: {e}")),
    }
    for (name, m) in [("mu", mu), ("nu", nu)] {
        if !m.is_stationary() {
            out.push(format!("{name} is not shift-invariant; the overlap identity may fail"));
        }
    }
    out
}

/// Point masses from tails, with the mass checks applied.
fn pmf_from_tail(n: usize, tail: &[f64]) -> Result<Vec<f64>> {
    let at = |k: usize| match k {
        0 => 1.0,
        k if k >= n => 0.0,
        k => tail[k - 1],
    };
    let mut pmf = Vec::with_capacity(n);
    for t in 1..=n {
        let p = at(n - t) - at(n - t + 1);
        if p < -MASS_TOL {
            return Err(Error::Invariant(format!("negative point mass P(T = {t}) = {p:e}")));
        }
        pmf.push(p.max(0.0));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::Invariant(format!("point masses sum to {total:.17}")));
    }
    Ok(pmf)
}

/// Law of `T_n` from `E(k) + a_{k,n}`.
pub fn law_exact(mu: &Measure, nu: &Measure, n: usize) -> Result<DistributionTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let warnings = hypothesis_warnings(mu, nu, n);
    let mass = border_mass(mu, nu, n - 1)?;
    let components: Vec<Component> = (1..n)
        .map(|k| Component {
            k,
            e: Prob::from_value(e_from_mass(&mass, k)),
            a: a_from_mass(&mass, k, n - 1),
        })
        .collect();
    let tail: Vec<f64> = components.iter().map(|c| c.e.value + c.a).collect();
    let pmf = pmf_from_tail(n, &tail)?;
    Ok(DistributionTable {
        n,
        source: TableSource::Coefficients,
        avoiding_mass: pmf[n - 1],
        tail,
        pmf,
        components,
        warnings,
    })
}

/// Law of `T_n` by binning every pair of `n`-words by its shortest path.
pub fn law_bruteforce(mu: &Measure, nu: &Measure, n: usize) -> Result<DistributionTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let size = mu.alphabet().size();
    limits::check_power("pair enumeration", size, 2 * n)?;
    let table = CylinderTable::new(mu, nu, n)?;
    let mut words = Vec::with_capacity(size.pow(n as u32));
    for_each_word(size, n, |w| words.push(w.to_vec()));
    let (mw, nw) = table.weights();
    let ys: Vec<(&[Sym], f64)> = words
        .iter()
        .zip(nw)
        .filter(|(_, &p)| p > 0.0)
        .map(|(w, &p)| (w.as_slice(), p))
        .collect();
    let xs: Vec<(&[Sym], f64)> = words
        .iter()
        .zip(mw)
        .filter(|(_, &p)| p > 0.0)
        .map(|(w, &p)| (w.as_slice(), p))
        .collect();
    let parts: Vec<Vec<f64>> = xs
        .par_chunks(64)
        .map(|chunk| {
            let mut local = vec![0.0; n];
            for &(x, px) in chunk {
                for &(y, py) in &ys {
                    let t = overlap::shortest_path_syms(x, y).expect("equal lengths");
                    local[t - 1] += px * py;
                }
            }
            local
        })
        .collect();
    let mut pmf = vec![0.0; n];
    for part in parts {
        pmf.iter_mut().zip(part).for_each(|(a, b)| *a += b);
    }
    let tail: Vec<f64> = (1..n).map(|k| pmf[..n - k].iter().sum()).collect();
    Ok(DistributionTable {
        n,
        source: TableSource::BruteForce,
        avoiding_mass: pmf[n - 1],
        tail,
        pmf,
        components: Vec::new(),
        warnings: Vec::new(),
    })
}

/// `P(T_n = n) = 1 - E(1) - a_{1,n}`.
pub fn avoiding_pairs_prob(mu: &Measure, nu: &Measure, n: usize) -> Result<f64> {
    Ok(law_exact(mu, nu, n)?.avoiding_mass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitTail {
    pub k: usize,
    pub m_max: usize,
    pub e_k: Prob,
    /// `a_k` summed over `m <= m_max`.
    pub a_partial: f64,
    /// `E(k) + a_partial`, a lower bound on the limit tail.
    pub tail_lower: f64,
    /// Bound on `sum_{m > m_max} E(m)`, which dominates the omitted terms.
    pub truncation_bound: Option<f64>,
    pub tail_upper: Option<f64>,
    /// Lower bound on `P(n - T = infinity)`, from `lim_k E(k)`.
    pub defect_lower_bound: f64,
    /// The limit tails form a proper distribution; requires a summable
    /// majorant of `E`.
    pub certified: bool,
}

/// `lim_n P(n - T_n >= k) = E(k) + a_k`, truncated at `m_max`.
pub fn law_limit(mu: &Measure, nu: &Measure, k: usize, m_max: usize) -> Result<LimitTail> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mass = border_mass(mu, nu, k.max(m_max))?;
    let e_k = e_from_mass(&mass, k);
    let a_partial = a_from_mass(&mass, k, m_max);
    let truncation_bound = divergence::tail_sum_bound(mu, nu, m_max.max(k));
    let tail_lower = e_k + a_partial;
    let defect_lower_bound = divergence::limit_lower_bound(mu, nu);
    Ok(LimitTail {
        k,
        m_max,
        e_k: Prob::from_value(e_k),
        a_partial,
        tail_lower,
        truncation_bound,
        tail_upper: truncation_bound.map(|b| (tail_lower + b).min(1.0)),
        defect_lower_bound,
        certified: truncation_bound.is_some() && defect_lower_bound == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Pattern;
    use crate::word::Alphabet;

    fn chain(p: Vec<Vec<f64>>) -> Measure {
        let labels: Vec<String> = (0..p.len()).map(|i| i.to_string()).collect();
        Measure::markov(Alphabet::new(&labels).unwrap(), p).unwrap()
    }

    /// Oracle for `a_{k,n}` straight from the definition: border sets by
    /// direct comparison.
    fn a_naive(mu: &Measure, nu: &Measure, k: usize, n: usize) -> f64 {
        let s = mu.alphabet().size();
        let mut total = 0.0;
        for m in k + 1..n {
            for_each_word(s, m, |w| {
                let bordered = (k..m).any(|j| w[m - j..] == w[..j]);
                if !bordered {
                    total += mu.cylinder(w).value * nu.cylinder(w).value;
                }
            });
        }
        total
    }

    #[test]
    fn uniform_three() {
        let u = Measure::uniform(2).unwrap();
        assert_eq!(a_coeff(&u, &u, 1, 3).unwrap(), 0.125);
        assert_eq!(a_coeff(&u, &u, 2, 3).unwrap(), 0.0);
        let t = law_exact(&u, &u, 3).unwrap();
        assert_eq!(t.pmf, vec![0.25, 0.375, 0.375]);
        assert_eq!(t.avoiding_mass, 0.375);
        assert!(t.warnings.is_empty());
        let b = law_bruteforce(&u, &u, 3).unwrap();
        assert_eq!(b.pmf, vec![0.25, 0.375, 0.375]);
    }

    #[test]
    fn coefficients_match_definition() {
        let mu = chain(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        let nu = Measure::bernoulli(0.35).unwrap();
        for n in 2..=9 {
            let table = a_table(&mu, &nu, n).unwrap();
            for k in 1..n {
                let naive = a_naive(&mu, &nu, k, n);
                assert!((table[k - 1] - naive).abs() < 1e-15, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn coefficient_monotonicity_and_bound() {
        let (mu, nu) = (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.6).unwrap());
        let seq = divergence::divergence_seq(&mu, &nu, 12, Default::default()).unwrap();
        let rows: Vec<Vec<f64>> = (2..=12).map(|n| a_table(&mu, &nu, n).unwrap()).collect();
        for (i, row) in rows.iter().enumerate() {
            let n = i + 2;
            for k in 1..n {
                let bound: f64 = (k + 1..n).map(|m| seq.e(m).value).sum();
                assert!(row[k - 1] <= bound + 1e-15);
                if k > 1 {
                    assert!(row[k - 1] <= row[k - 2] + 1e-15);
                }
                if n > 2 && k < n - 1 {
                    assert!(row[k - 1] >= rows[i - 1][k - 1] - 1e-15);
                }
            }
        }
    }

    #[test]
    fn exact_matches_bruteforce() {
        let pairs = [
            (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.7).unwrap()),
            (
                chain(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
                chain(vec![vec![0.4, 0.6], vec![0.5, 0.5]]),
            ),
        ];
        for (mu, nu) in &pairs {
            for n in 1..=8 {
                let e = law_exact(mu, nu, n).unwrap();
                let b = law_bruteforce(mu, nu, n).unwrap();
                assert!(e.max_discrepancy(&b) < 1e-12, "n={n}");
                assert_eq!(e.tail_at(1) + e.avoiding_mass, 1.0);
            }
        }
    }

    #[test]
    fn constant_dirac_has_full_overlap() {
        let one = Measure::dirac(Alphabet::binary(), Pattern::Periodic(vec![1])).unwrap();
        let t = law_exact(&one, &one, 7).unwrap();
        assert_eq!(t.pmf_at(1), 1.0);
        assert!(t.tail.iter().all(|&x| x == 1.0));
        assert_eq!(avoiding_pairs_prob(&one, &one, 7).unwrap(), 0.0);
    }

    #[test]
    fn non_stationary_input_is_flagged() {
        let ab = Alphabet::new(&["A", "B"]).unwrap();
        let d = Measure::dirac(ab, Pattern::Periodic(vec![0, 1])).unwrap();
        assert!(matches!(law_exact(&d, &d, 5), Err(Error::Invariant(_))));
    }

    #[test]
    fn limit_for_bernoulli_pair() {
        let (mu, nu) = (Measure::bernoulli(0.3).unwrap(), Measure::bernoulli(0.7).unwrap());
        let lim = law_limit(&mu, &nu, 1, 14).unwrap();
        let bound = lim.truncation_bound.unwrap();
        assert!((bound - 0.42f64.powi(15) / 0.58).abs() < 1e-18);
        assert!(lim.certified);
        let mut last = 0.0;
        for n in 2..=14 {
            let t = law_exact(&mu, &nu, n).unwrap().tail_at(1);
            assert!(t >= last - 1e-15);
            assert!(t <= lim.tail_upper.unwrap() + 1e-15);
            last = t;
        }
        assert!(lim.tail_lower >= last - 1e-15);
    }

    #[test]
    fn defect_for_mixture() {
        let one = Measure::dirac(Alphabet::binary(), Pattern::Periodic(vec![1])).unwrap();
        let mix = Measure::mixture(0.4, one.clone(), Measure::bernoulli(0.3).unwrap()).unwrap();
        let lim = law_limit(&one, &mix, 3, 12).unwrap();
        assert!(lim.defect_lower_bound >= 0.4);
        assert!(!lim.certified);
        assert!(lim.tail_lower >= 0.4);
    }
}
