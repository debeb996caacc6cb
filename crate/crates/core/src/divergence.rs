//! The k-divergence `E(k) = sum_{|w| = k} mu(w) nu(w)` and its rates.
//!
//! Each pair of measures is routed to the cheapest exact method:
//! i.i.d. pairs use `E(1)^k`, pairs of chains use the transfer matrix
//! `H = P_mu o P_nu`, a Dirac side reduces to the cylinder of its sequence
//! under the other side, mixtures split linearly, and anything else is
//! enumerated.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::enumerate::par_dfs;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, Matrix, PerronRoot};
use crate::measures::{Measure, MeasureKind, Prefix};
use crate::prob::{ln_add_exp, LogSum, Prob};
use crate::word::{same_alphabet, Sym};

/// Relative tolerance of the Perron root.
pub const PERRON_TOL: f64 = 1e-13;
pub const PERRON_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Closed,
    Transfer,
    Enumeration,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Closed => "closed",
            Method::Transfer => "transfer",
            Method::Enumeration => "enumeration",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Closed or transfer form where available, enumeration otherwise.
    #[default]
    Auto,
    Enum,
    /// Refuses pairs without a closed or transfer form.
    Closed,
}

/// A nonnegative rate, with `+inf` serialized as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Finite(f64),
    Infinite,
}

impl Rate {
    pub fn from_ln_prob(ln: f64, k: usize) -> Self {
        if ln == f64::NEG_INFINITY {
            Rate::Infinite
        } else {
            Rate::Finite(-ln / k as f64)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Rate::Finite(r) => Some(r),
            Rate::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn scaled(self, factor: f64) -> Self {
        match self {
            Rate::Finite(r) => Rate::Finite(r * factor),
            Rate::Infinite => Rate::Infinite,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Finite(r) => write!(f, "{r:.16e}"),
            Rate::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Finite(r) => s.serialize_f64(*r),
            Rate::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(Rate::Finite(r)),
            Raw::Text(t) if t == "inf" => Ok(Rate::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid rate {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceEntry {
    pub k: usize,
    pub e: Prob,
    pub rate: Rate,
    pub method: Method,
}

/// `E(1..=kmax)`. `E(0) = 1` is implied and not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSeq {
    pub kmax: usize,
    pub entries: Vec<DivergenceEntry>,
    /// First `k` with `E(k) = 0`; every later value vanishes too.
    pub zero_from: Option<usize>,
}

impl DivergenceSeq {
    fn from_ln(ln: Vec<f64>, method: Method) -> Self {
        let entries: Vec<DivergenceEntry> = ln
            .into_iter()
            .enumerate()
            .map(|(i, l)| DivergenceEntry {
                k: i + 1,
                e: Prob::from_ln(l.min(0.0)),
                rate: Rate::from_ln_prob(l.min(0.0), i + 1),
                method,
            })
            .collect();
        let zero_from = entries.iter().find(|e| e.e.ln == f64::NEG_INFINITY).map(|e| e.k);
        DivergenceSeq {
            kmax: entries.len(),
            entries,
            zero_from,
        }
    }

    /// `E(k)` for `1 <= k <= kmax`, and `E(0) = 1`.
    pub fn e(&self, k: usize) -> Prob {
        if k == 0 {
            Prob::ONE
        } else {
            self.entries[k - 1].e
        }
    }

    pub fn ln_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.e.ln).collect()
    }

    pub fn rates(&self) -> Vec<Rate> {
        self.entries.iter().map(|e| e.rate).collect()
    }

    pub fn method(&self) -> Method {
        self.entries.iter().map(|e| e.method).max().unwrap_or(Method::Closed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    /// `-ln E(1)` for i.i.d. pairs.
    Closed,
    /// `-ln rho(H)` from power iteration.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactRate {
    pub value: Rate,
    pub source: RateSource,
    /// Set when `mu = nu`, in which case the rate is the order-2 Renyi entropy.
    pub renyi2: bool,
    /// Rate bounds implied by the Collatz-Wielandt bracket on `rho(H)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEstimate {
    /// Inclusive `k` range the extremes are taken over.
    pub window: (usize, usize),
    pub liminf_est: Rate,
    pub limsup_est: Rate,
    pub exact_rate: Option<ExactRate>,
}

fn check_pair(mu: &Measure, nu: &Measure) -> Result<()> {
    same_alphabet(mu.alphabet(), nu.alphabet())
}

/// Transfer data `(H, w)` for a pair of chains (i.i.d. counts as a chain).
pub fn transfer_pair(mu: &Measure, nu: &Measure) -> Option<(Matrix, Vec<f64>)> {
    let (pm, sm) = mu.chain_view()?;
    let (pn, sn) = nu.chain_view()?;
    let h = pm
        .iter()
        .zip(&pn)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).collect())
        .collect();
    let w = sm.iter().zip(&sn).map(|(x, y)| x * y).collect();
    Some((h, w))
}

fn iid_e1(mu: &Measure, nu: &Measure) -> Option<f64> {
    match (mu.kind(), nu.kind()) {
        (MeasureKind::Iid(a), MeasureKind::Iid(b)) => {
            Some(a.probs().iter().zip(b.probs()).map(|(x, y)| x * y).sum())
        }
        _ => None,
    }
}

/// `E(k)` for two i.i.d. measures: `E(1)^k`.
pub fn divergence_iid(mu: &Measure, nu: &Measure, k: usize) -> Result<Prob> {
    check_pair(mu, nu)?;
    let e1 = iid_e1(mu, nu).ok_or_else(|| variant_mismatch("divergence_iid", mu, nu))?;
    Ok(ln_pow(e1, k))
}

fn ln_pow(base: f64, k: usize) -> Prob {
    if k == 0 {
        Prob::ONE
    } else if base == 0.0 {
        Prob::ZERO
    } else {
        Prob::from_ln((base.ln() * k as f64).min(0.0))
    }
}

fn variant_mismatch(op: &str, mu: &Measure, nu: &Measure) -> Error {
    Error::VariantMismatch(format!(
        "{op} does not apply to ({}, {})",
        mu.variant_name(),
        nu.variant_name()
    ))
}

/// `ln E(k)` for `k = 1..=kmax` by `E(k) = w^T H^{k-1} 1`, rescaling each step.
fn transfer_ln_seq(h: &Matrix, w: &[f64], kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax);
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return vec![f64::NEG_INFINITY; kmax];
    }
    let mut scale = total.ln();
    let mut v: Vec<f64> = w.iter().map(|x| x / total).collect();
    for k in 1..=kmax {
        if k > 1 {
            v = linalg::vec_mat(&v, h);
            let s: f64 = v.iter().sum();
            if s == 0.0 {
                out.resize(kmax, f64::NEG_INFINITY);
                break;
            }
            scale += s.ln();
            v.iter_mut().for_each(|x| *x /= s);
        }
        out.push(scale);
    }
    out
}

/// `E(k)` for a pair of chains (one side may be i.i.d.).
pub fn divergence_markov(mu: &Measure, nu: &Measure, k: usize) -> Result<Prob> {
    check_pair(mu, nu)?;
    let (h, w) = transfer_pair(mu, nu).ok_or_else(|| variant_mismatch("divergence_markov", mu, nu))?;
    if k == 0 {
        return Ok(Prob::ONE);
    }
    Ok(Prob::from_ln(transfer_ln_seq(&h, &w, k)[k - 1].min(0.0)))
}

/// `E(k)` by summing `mu(w) nu(w)` over every word of length `k`.
pub fn divergence_enum(mu: &Measure, nu: &Measure, k: usize) -> Result<Prob> {
    check_pair(mu, nu)?;
    if k == 0 {
        return Ok(Prob::ONE);
    }
    let ln = enum_ln_seq(mu, nu, k)?;
    Ok(Prob::from_ln(ln[k - 1].min(0.0)))
}

/// `ln E(k)` for `k = 1..=kmax` from one pruned traversal.
fn enum_ln_seq(mu: &Measure, nu: &Measure, kmax: usize) -> Result<Vec<f64>> {
    let size = mu.alphabet().size();
    limits::check_power("divergence enumeration", size, kmax)?;
    let sums = par_dfs(
        size,
        kmax,
        (mu.prefix_start(), nu.prefix_start()),
        |(pm, pn): &(Prefix, Prefix), w: &[Sym]| {
            let a = *w.last().unwrap();
            let pm = mu.prefix_push(pm, a);
            if mu.prefix_prob(&pm).is_zero() {
                return None;
            }
            let pn = nu.prefix_push(pn, a);
            if nu.prefix_prob(&pn).is_zero() {
                return None;
            }
            Some((pm, pn))
        },
        || vec![LogSum::new(); kmax],
        |acc: &mut Vec<LogSum>, w: &[Sym], (pm, pn): &(Prefix, Prefix)| {
            acc[w.len() - 1].add_ln(mu.prefix_prob(pm).ln + nu.prefix_prob(pn).ln);
        },
        |acc, other| acc.iter_mut().zip(&other).for_each(|(a, b)| a.merge(b)),
    );
    Ok(sums.iter().map(LogSum::ln).collect())
}

fn dirac_ln_seq(pattern_side: &Measure, other: &Measure, kmax: usize) -> Option<Vec<f64>> {
    let MeasureKind::Dirac(d) = pattern_side.kind() else {
        return None;
    };
    let mut p = other.prefix_start();
    Some(
        d.pattern()
            .prefix(kmax)
            .into_iter()
            .map(|a| {
                other.prefix_push_mut(&mut p, a);
                other.prefix_prob(&p).ln
            })
            .collect(),
    )
}

/// `ln E(1..=kmax)` with the method used. `choice` restricts the routes.
fn ln_seq(mu: &Measure, nu: &Measure, kmax: usize, choice: MethodChoice) -> Result<(Vec<f64>, Method)> {
    if choice == MethodChoice::Enum {
        return Ok((enum_ln_seq(mu, nu, kmax)?, Method::Enumeration));
    }
    if let Some(e1) = iid_e1(mu, nu) {
        let l = if e1 > 0.0 { e1.ln() } else { f64::NEG_INFINITY };
        return Ok(((1..=kmax).map(|k| l * k as f64).collect(), Method::Closed));
    }
    if let Some((h, w)) = transfer_pair(mu, nu) {
        return Ok((transfer_ln_seq(&h, &w, kmax), Method::Transfer));
    }
    if let Some(s) = dirac_ln_seq(mu, nu, kmax).or_else(|| dirac_ln_seq(nu, mu, kmax)) {
        return Ok((s, Method::Closed));
    }
    let split = |lambda: f64, a: &Measure, b: &Measure, other: &Measure, flip: bool| -> Result<(Vec<f64>, Method)> {
        let (s1, m1) = if flip { ln_seq(other, a, kmax, choice)? } else { ln_seq(a, other, kmax, choice)? };
        let (s2, m2) = if flip { ln_seq(other, b, kmax, choice)? } else { ln_seq(b, other, kmax, choice)? };
        let (l1, l2) = (lambda.ln(), (1.0 - lambda).ln());
        let seq = s1.iter().zip(&s2).map(|(x, y)| ln_add_exp(l1 + x, l2 + y)).collect();
        Ok((seq, m1.max(m2)))
    };
    if let MeasureKind::Mixture(m) = mu.kind() {
        return split(m.lambda(), m.first(), m.second(), nu, false);
    }
    if let MeasureKind::Mixture(m) = nu.kind() {
        return split(m.lambda(), m.first(), m.second(), mu, true);
    }
    if choice == MethodChoice::Closed {
        return Err(variant_mismatch("closed-form divergence", mu, nu));
    }
    Ok((enum_ln_seq(mu, nu, kmax)?, Method::Enumeration))
}

/// `E(1..=kmax)` by the chosen route.
pub fn divergence_seq(mu: &Measure, nu: &Measure, kmax: usize, choice: MethodChoice) -> Result<DivergenceSeq> {
    check_pair(mu, nu)?;
    let (ln, method) = ln_seq(mu, nu, kmax, choice)?;
    Ok(DivergenceSeq::from_ln(ln, method))
}

/// Structural equality of two i.i.d. or Markov laws.
pub fn same_law(mu: &Measure, nu: &Measure) -> bool {
    if std::ptr::eq(mu, nu) {
        return true;
    }
    let same = match (mu.kind(), nu.kind()) {
        (MeasureKind::Iid(a), MeasureKind::Iid(b)) => a.probs() == b.probs(),
        (MeasureKind::Markov(a), MeasureKind::Markov(b)) => a.transition() == b.transition(),
        _ => false,
    };
    same && same_alphabet(mu.alphabet(), nu.alphabet()).is_ok()
}

/// Perron data of `H` when the spectral rate is valid: `H` irreducible and
/// `w > 0`.
pub fn transfer_perron(mu: &Measure, nu: &Measure) -> Option<(Matrix, Vec<f64>, PerronRoot)> {
    let (h, w) = transfer_pair(mu, nu)?;
    if w.iter().any(|&x| x <= 0.0) || !linalg::is_irreducible(&h) {
        return None;
    }
    let root = linalg::perron_root(&h, PERRON_TOL, PERRON_MAX_ITER)?;
    Some((h, w, root))
}

/// `lim -(1/k) ln E(k)` when a closed or spectral form applies.
pub fn exact_rate(mu: &Measure, nu: &Measure) -> Option<ExactRate> {
    let renyi2 = same_law(mu, nu);
    if let Some(e1) = iid_e1(mu, nu) {
        return Some(ExactRate {
            value: Rate::from_ln_prob(if e1 > 0.0 { e1.ln() } else { f64::NEG_INFINITY }, 1),
            source: RateSource::Closed,
            renyi2,
            bracket: None,
        });
    }
    let (_, _, root) = transfer_perron(mu, nu)?;
    if root.value <= 0.0 {
        return None;
    }
    Some(ExactRate {
        value: Rate::Finite(-root.value.ln()),
        source: RateSource::Spectral,
        renyi2,
        bracket: Some((-root.upper.ln(), -root.lower.ln())),
    })
}

/// Rate sequence with window extremes over `k in [kmax/2, kmax]`.
pub fn divergence_rate(
    mu: &Measure,
    nu: &Measure,
    kmax: usize,
    choice: MethodChoice,
) -> Result<(RateEstimate, DivergenceSeq)> {
    if kmax < 2 {
        return Err(Error::InvalidArgument("kmax must be at least 2".into()));
    }
    let seq = divergence_seq(mu, nu, kmax, choice)?;
    let window = (kmax / 2, kmax);
    let rates: Vec<f64> = seq.entries[window.0 - 1..].iter().map(|e| e.rate.as_f64()).collect();
    let pick = |r: f64| if r.is_finite() { Rate::Finite(r) } else { Rate::Infinite };
    let estimate = RateEstimate {
        window,
        liminf_est: pick(rates.iter().cloned().fold(f64::INFINITY, f64::min)),
        limsup_est: pick(rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        exact_rate: exact_rate(mu, nu),
    };
    Ok((estimate, seq))
}

/// Order-2 Renyi entropy `lim -(1/k) ln sum_w mu(w)^2`.
pub fn renyi2(mu: &Measure) -> Result<f64> {
    match mu.kind() {
        MeasureKind::Iid(_) | MeasureKind::Markov(_) => {}
        _ => return Err(Error::EntropyUnavailable(mu.variant_name())),
    }
    exact_rate(mu, mu)
        .and_then(|r| r.value.finite())
        .ok_or_else(|| Error::Degenerate("collision operator has no usable Perron root".into()))
}

/// `RHS - LHS` of `E(i + g + j) <= sum_{w, z} mu nu(w . X^g . z)` with
/// `|w| = i`, `|z| = j`.
pub fn check_gap_inequality(mu: &Measure, nu: &Measure, i: usize, g: usize, j: usize) -> Result<f64> {
    check_pair(mu, nu)?;
    let table = CylinderTable::new(mu, nu, i + g + j)?;
    Ok(table.gap_slack(i, g))
}

/// Joint table of `mu(w)` and `nu(w)` over every word of one length, indexed
/// lexicographically.
pub struct CylinderTable {
    size: usize,
    len: usize,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl CylinderTable {
    pub fn new(mu: &Measure, nu: &Measure, len: usize) -> Result<Self> {
        check_pair(mu, nu)?;
        let size = mu.alphabet().size();
        limits::check_power("gap inequality enumeration", size, len)?;
        let mut t = CylinderTable {
            size,
            len,
            mu: vec![0.0; size.pow(len as u32)],
            nu: vec![0.0; size.pow(len as u32)],
        };
        if len == 0 {
            t.mu[0] = 1.0;
            t.nu[0] = 1.0;
            return Ok(t);
        }
        fill_table(mu, &mu.prefix_start(), size, len, 0, &mut t.mu);
        fill_table(nu, &nu.prefix_start(), size, len, 0, &mut t.nu);
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(mu(w), nu(w))` per lexicographic word index.
    pub fn weights(&self) -> (&[f64], &[f64]) {
        (&self.mu, &self.nu)
    }

    /// `E(len)` summed in lexicographic order.
    pub fn divergence(&self) -> f64 {
        self.mu.iter().zip(&self.nu).map(|(a, b)| a * b).sum()
    }

    /// Slack of the gap inequality for the split `len = i + g + j`.
    pub fn gap_slack(&self, i: usize, g: usize) -> f64 {
        assert!(i + g <= self.len, "split exceeds the table length");
        let j = self.len - i - g;
        let tail = self.size.pow((g + j) as u32);
        let right = self.size.pow(j as u32);
        let buckets = self.size.pow(i as u32) * right;
        let (mut bm, mut bn) = (vec![0.0; buckets], vec![0.0; buckets]);
        for (idx, (a, b)) in self.mu.iter().zip(&self.nu).enumerate() {
            let bucket = (idx / tail) * right + idx % right;
            bm[bucket] += a;
            bn[bucket] += b;
        }
        let rhs: f64 = bm.iter().zip(&bn).map(|(a, b)| a * b).sum();
        rhs - self.divergence()
    }
}

fn fill_table(m: &Measure, p: &Prefix, size: usize, len: usize, idx: usize, out: &mut [f64]) {
    if p.len() == len {
        out[idx] = m.prefix_prob(p).value;
        return;
    }
    for a in 0..size {
        let next = m.prefix_push(p, a as Sym);
        if m.prefix_prob(&next).is_zero() {
            continue;
        }
        fill_table(m, &next, size, len, idx * size + a, out);
    }
}

/// Lower bound on `lim_k E(k)`, nonzero only for Dirac pairs that share
/// their sequence and mixtures built from them.
pub fn limit_lower_bound(mu: &Measure, nu: &Measure) -> f64 {
    match (mu.kind(), nu.kind()) {
        (MeasureKind::Mixture(m), _) => {
            m.lambda() * limit_lower_bound(m.first(), nu) + (1.0 - m.lambda()) * limit_lower_bound(m.second(), nu)
        }
        (_, MeasureKind::Mixture(m)) => {
            m.lambda() * limit_lower_bound(mu, m.first()) + (1.0 - m.lambda()) * limit_lower_bound(mu, m.second())
        }
        (MeasureKind::Dirac(a), MeasureKind::Dirac(b)) => {
            use crate::measures::Pattern;
            let same = match (a.pattern(), b.pattern()) {
                (Pattern::Blocks, Pattern::Blocks) => true,
                (Pattern::Periodic(p), Pattern::Periodic(q)) => {
                    let l = lcm(p.len(), q.len());
                    a.pattern().prefix(l) == b.pattern().prefix(l)
                }
                _ => false,
            };
            if same {
                1.0
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Rigorous upper bound on `sum_{m > m0} E(m)`, or `None` when no summable
/// majorant is known.
pub fn tail_sum_bound(mu: &Measure, nu: &Measure, m0: usize) -> Option<f64> {
    if let MeasureKind::Mixture(m) = mu.kind() {
        let a = tail_sum_bound(m.first(), nu, m0)?;
        let b = tail_sum_bound(m.second(), nu, m0)?;
        return Some(m.lambda() * a + (1.0 - m.lambda()) * b);
    }
    if let MeasureKind::Mixture(m) = nu.kind() {
        let a = tail_sum_bound(mu, m.first(), m0)?;
        let b = tail_sum_bound(mu, m.second(), m0)?;
        return Some(m.lambda() * a + (1.0 - m.lambda()) * b);
    }
    if let Some(e1) = iid_e1(mu, nu) {
        return (e1 < 1.0).then(|| e1.powi(m0 as i32 + 1) / (1.0 - e1));
    }
    let (h, w, root) = transfer_perron(mu, nu)?;
    // with H v <= rho' v and rho' < 1: E(m) <= w^T H^{m-1} v / min v
    let v = root.vector;
    let hv = linalg::mat_vec(&h, &v);
    let rho = hv.iter().zip(&v).map(|(a, b)| a / b).fold(0.0, f64::max);
    if rho >= 1.0 {
        return None;
    }
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = w;
    for _ in 0..m0 {
        x = linalg::vec_mat(&x, &h);
    }
    let head: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
    Some(head / (vmin * (1.0 - rho)))
}
