//! Stationary measures over one-sided sequences: exact cylinder
//! probabilities, sampling, entropy, support queries and the conditional
//! regularity functional used by the divergence-rate existence criterion.

mod psi;
mod sampler;
mod spec;

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;

use crate::enumerate::par_dfs;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, Matrix};
use crate::prob::{ln_add_exp, Prob, LINEAR_MAX_LEN};
use crate::word::{same_alphabet, Alphabet, Sym, Word};

pub use psi::{check_sublog, psi_plus, SublogReport};
pub use sampler::{sample_prefix, PathSampler};
pub use spec::{MeasureSpec, PatternSpec, RenewalPreset};

/// Tolerance for probability vectors summing to one.
pub const SUM_TOL: f64 = 1e-12;
/// Relative residual targeted by the stationary-vector iteration.
pub const STATIONARY_TOL: f64 = 1e-14;
/// Default truncation level of the house-of-cards chain.
pub const DEFAULT_Y_MAX: usize = 4096;

#[derive(Debug, Clone)]
pub struct Measure {
    alphabet: Arc<Alphabet>,
    kind: MeasureKind,
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    Iid(Iid),
    Markov(Markov),
    Dirac(Dirac),
    Mixture(Mixture),
    Renewal(HouseOfCards),
}

#[derive(Debug, Clone)]
pub struct Iid {
    probs: Vec<f64>,
    ln_probs: Vec<f64>,
    pub(crate) draw: WeightedIndex<f64>,
}

impl Iid {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone)]
pub struct Markov {
    transition: Matrix,
    ln_transition: Matrix,
    stationary: Vec<f64>,
    residual: f64,
    pub(crate) start: WeightedIndex<f64>,
    pub(crate) rows: Vec<WeightedIndex<f64>>,
}

impl Markov {
    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `max_i |(pi P)_i - pi_i|` at construction.
    pub fn stationary_residual(&self) -> f64 {
        self.residual
    }
}

/// Deterministic sequence a Dirac measure is concentrated on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// The word repeated forever.
    Periodic(Vec<Sym>),
    /// `0^2 1^4 0^8 1^16 ...`: block `s >= 1` has length `2^s`, zeros on odd `s`.
    Blocks,
}

impl Pattern {
    pub fn symbol_at(&self, t: usize) -> Sym {
        match self {
            Pattern::Periodic(w) => w[t % w.len()],
            Pattern::Blocks => {
                let s = usize::BITS - 1 - (t + 2).leading_zeros();
                if s % 2 == 1 {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<Sym> {
        (0..n).map(|t| self.symbol_at(t)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Dirac {
    pattern: Pattern,
}

impl Dirac {
    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }
}

#[derive(Debug, Clone)]
pub struct Mixture {
    lambda: f64,
    first: Box<Measure>,
    second: Box<Measure>,
}

impl Mixture {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn first(&self) -> &Measure {
        &self.first
    }
    pub fn second(&self) -> &Measure {
        &self.second
    }
}

/// Renewal image of the house-of-cards chain `Y`: from state `y` move to
/// `y + 1` with probability `q_y`, else back to 0. The emitted symbol is 1
/// exactly when `Y = 0`.
#[derive(Debug, Clone)]
pub struct HouseOfCards {
    q: Vec<f64>,
    stationary: Vec<f64>,
    pub(crate) start: WeightedIndex<f64>,
}

impl HouseOfCards {
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn y_max(&self) -> usize {
        self.q.len() - 1
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `q_y = 1` on every `[m^2, m^2 + m]`, `other` elsewhere, `q_{y_max} = 0`.
    pub fn squares_preset(y_max: usize, other: f64) -> Vec<f64> {
        let mut q = vec![other; y_max + 1];
        let mut m = 0usize;
        while m * m <= y_max {
            q[m * m..=(m * m + m).min(y_max)].fill(1.0);
            m += 1;
        }
        q[y_max] = 0.0;
        q
    }

    fn can_continue(&self, y: usize) -> bool {
        self.q[y] > 0.0
    }

    fn can_reset(&self, y: usize) -> bool {
        self.q[y] < 1.0
    }
}

/// Incremental cylinder state of a growing prefix.
#[derive(Debug, Clone)]
pub struct Prefix {
    len: usize,
    state: PrefixState,
}

#[derive(Debug, Clone)]
enum PrefixState {
    Chain { last: Option<Sym>, lin: f64, ln: f64 },
    Dirac { alive: bool },
    Mixture(Box<[Prefix; 2]>),
    Renewal { alpha: Vec<f64>, ln: f64 },
}

impl Prefix {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

fn check_prob_vector(field: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid(format!("{field}[{i}]"), "must be a finite nonnegative number"));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(field, format!("sums to {total}, expected 1")));
    }
    Ok(())
}

fn weighted(field: &str, w: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(w.iter().copied()).map_err(|e| Error::invalid(field, e.to_string()))
}

impl Measure {
    pub fn iid(alphabet: Arc<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.size() {
            return Err(Error::invalid(
                "probs",
                format!("{} entries for alphabet of size {}", probs.len(), alphabet.size()),
            ));
        }
        check_prob_vector("probs", &probs)?;
        let draw = weighted("probs", &probs)?;
        let ln_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(Measure {
            alphabet,
            kind: MeasureKind::Iid(Iid {
                probs,
                ln_probs,
                draw,
            }),
        })
    }

    /// Product of Bernoulli measures on `{0, 1}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Measure::iid(Alphabet::binary(), vec![1.0 - p, p])
    }

    /// Uniform i.i.d. measure on the labels `"0", ..., "s-1"`.
    pub fn uniform(s: usize) -> Result<Self> {
        let labels: Vec<String> = (0..s).map(|i| i.to_string()).collect();
        Measure::iid(Alphabet::new(&labels)?, vec![1.0 / s as f64; s])
    }

    pub fn markov(alphabet: Arc<Alphabet>, transition: Matrix) -> Result<Self> {
        let n = alphabet.size();
        if transition.len() != n {
            return Err(Error::invalid(
                "transition",
                format!("{} rows for alphabet of size {n}", transition.len()),
            ));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(
                    format!("transition[{i}]"),
                    format!("{} entries, expected {n}", row.len()),
                ));
            }
            check_prob_vector(&format!("transition[{i}]"), row)?;
        }
        let unreachable = linalg::outside_main_component(&transition);
        if !unreachable.is_empty() {
            return Err(Error::Reducible { unreachable });
        }
        let (stationary, residual) =
            linalg::stationary_vector(&transition, STATIONARY_TOL, 2_000_000);
        if residual > SUM_TOL {
            return Err(Error::Invariant(format!(
                "stationary vector residual {residual:e} exceeds {SUM_TOL:e}"
            )));
        }
        let start = weighted("transition", &stationary)?;
        let rows = transition
            .iter()
            .enumerate()
            .map(|(i, r)| weighted(&format!("transition[{i}]"), r))
            .collect::<Result<Vec<_>>>()?;
        let ln_transition = transition
            .iter()
            .map(|r| r.iter().map(|p| p.ln()).collect())
            .collect();
        Ok(Measure {
            alphabet,
            kind: MeasureKind::Markov(Markov {
                transition,
                ln_transition,
                stationary,
                residual,
                start,
                rows,
            }),
        })
    }

    pub fn dirac(alphabet: Arc<Alphabet>, pattern: Pattern) -> Result<Self> {
        match &pattern {
            Pattern::Periodic(w) => {
                if w.is_empty() {
                    return Err(Error::invalid("pattern", "periodic word must be nonempty"));
                }
                if w.iter().any(|&s| s as usize >= alphabet.size()) {
                    return Err(Error::invalid("pattern", "symbol outside alphabet"));
                }
            }
            Pattern::Blocks => {
                if alphabet.size() != 2 {
                    return Err(Error::invalid("pattern", "blocks pattern needs a binary alphabet"));
                }
            }
        }
        Ok(Measure {
            alphabet,
            kind: MeasureKind::Dirac(Dirac { pattern }),
        })
    }

    /// Dirac measure on `0^2 1^4 0^8 ...` over `{0, 1}`.
    pub fn dirac_blocks() -> Self {
        Measure::dirac(Alphabet::binary(), Pattern::Blocks).expect("binary alphabet")
    }

    pub fn mixture(lambda: f64, first: Measure, second: Measure) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid("lambda", format!("{lambda} not in (0, 1)")));
        }
        same_alphabet(&first.alphabet, &second.alphabet)?;
        Ok(Measure {
            alphabet: Arc::clone(&first.alphabet),
            kind: MeasureKind::Mixture(Mixture {
                lambda,
                first: Box::new(first),
                second: Box::new(second),
            }),
        })
    }

    /// House-of-cards renewal process. `q` is padded with `default_q` up to
    /// `y_max`, and `q_{y_max}` is forced to 0.
    pub fn house_of_cards(q: &[f64], y_max: usize, default_q: f64) -> Result<Self> {
        if y_max == 0 {
            return Err(Error::invalid("y_max", "must be at least 1"));
        }
        if q.len() > y_max + 1 {
            return Err(Error::invalid("q", format!("{} entries exceed y_max + 1", q.len())));
        }
        let mut full: Vec<f64> = q.to_vec();
        full.resize(y_max + 1, default_q);
        if let Some(y) = full.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!("q[{y}]"), "must lie in [0, 1]"));
        }
        full[y_max] = 0.0;
        // pi(y + 1) = pi(y) q_y, normalised
        let mut stationary = Vec::with_capacity(y_max + 1);
        let mut w = 1.0;
        for &qy in &full {
            stationary.push(w);
            w *= qy;
        }
        let total: f64 = stationary.iter().sum();
        stationary.iter_mut().for_each(|p| *p /= total);
        let start = weighted("q", &stationary)?;
        Ok(Measure {
            alphabet: Alphabet::binary(),
            kind: MeasureKind::Renewal(HouseOfCards {
                q: full,
                stationary,
                start,
            }),
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            MeasureKind::Iid(_) => "iid",
            MeasureKind::Markov(_) => "markov",
            MeasureKind::Dirac(_) => "dirac",
            MeasureKind::Mixture(_) => "mixture",
            MeasureKind::Renewal(_) => "renewal_hoc",
        }
    }

    /// Whether the model is shift-invariant. Dirac measures qualify only on a
    /// constant sequence.
    pub fn is_stationary(&self) -> bool {
        match &self.kind {
            MeasureKind::Iid(_) | MeasureKind::Markov(_) | MeasureKind::Renewal(_) => true,
            MeasureKind::Dirac(d) => match &d.pattern {
                Pattern::Periodic(w) => w.iter().all(|&s| s == w[0]),
                Pattern::Blocks => false,
            },
            MeasureKind::Mixture(m) => m.first.is_stationary() && m.second.is_stationary(),
        }
    }

    /// `(P, pi)` when the measure is a Markov chain, with i.i.d. measures
    /// viewed as chains with identical rows.
    pub fn chain_view(&self) -> Option<(Matrix, Vec<f64>)> {
        match &self.kind {
            MeasureKind::Iid(m) => Some((vec![m.probs.clone(); m.probs.len()], m.probs.clone())),
            MeasureKind::Markov(m) => Some((m.transition.clone(), m.stationary.clone())),
            _ => None,
        }
    }

    // ---- incremental cylinder probabilities ----

    pub fn prefix_start(&self) -> Prefix {
        let state = match &self.kind {
            MeasureKind::Iid(_) | MeasureKind::Markov(_) => PrefixState::Chain {
                last: None,
                lin: 1.0,
                ln: 0.0,
            },
            MeasureKind::Dirac(_) => PrefixState::Dirac { alive: true },
            MeasureKind::Mixture(m) => {
                PrefixState::Mixture(Box::new([m.first.prefix_start(), m.second.prefix_start()]))
            }
            MeasureKind::Renewal(h) => PrefixState::Renewal {
                alpha: h.stationary.clone(),
                ln: 0.0,
            },
        };
        Prefix { len: 0, state }
    }

    pub fn prefix_push(&self, p: &Prefix, a: Sym) -> Prefix {
        let mut next = p.clone();
        self.prefix_push_mut(&mut next, a);
        next
    }

    pub fn prefix_push_mut(&self, p: &mut Prefix, a: Sym) {
        let pos = p.len;
        p.len += 1;
        match (&self.kind, &mut p.state) {
            (MeasureKind::Iid(m), PrefixState::Chain { lin, ln, .. }) => {
                *lin *= m.probs[a as usize];
                *ln += m.ln_probs[a as usize];
            }
            (MeasureKind::Markov(m), PrefixState::Chain { last, lin, ln }) => {
                let (p1, l1) = match *last {
                    None => (m.stationary[a as usize], m.stationary[a as usize].ln()),
                    Some(b) => (
                        m.transition[b as usize][a as usize],
                        m.ln_transition[b as usize][a as usize],
                    ),
                };
                *lin *= p1;
                *ln += l1;
                *last = Some(a);
            }
            (MeasureKind::Dirac(d), PrefixState::Dirac { alive }) => {
                *alive = *alive && d.pattern.symbol_at(pos) == a;
            }
            (MeasureKind::Mixture(m), PrefixState::Mixture(parts)) => {
                m.first.prefix_push_mut(&mut parts[0], a);
                m.second.prefix_push_mut(&mut parts[1], a);
            }
            (MeasureKind::Renewal(h), PrefixState::Renewal { alpha, ln }) => {
                if *ln == f64::NEG_INFINITY {
                    return;
                }
                if pos > 0 {
                    let mut next = vec![0.0; alpha.len()];
                    for (y, &w) in alpha.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        next[0] += w * (1.0 - h.q[y]);
                        if y + 1 < alpha.len() {
                            next[y + 1] += w * h.q[y];
                        }
                    }
                    *alpha = next;
                }
                if a == 1 {
                    alpha[1..].iter_mut().for_each(|w| *w = 0.0);
                } else {
                    alpha[0] = 0.0;
                }
                let total: f64 = alpha.iter().sum();
                if total > 0.0 {
                    alpha.iter_mut().for_each(|w| *w /= total);
                    *ln += total.ln();
                } else {
                    *ln = f64::NEG_INFINITY;
                }
            }
            _ => unreachable!("prefix state built for another measure"),
        }
    }

    fn prefix_lin_ln(&self, p: &Prefix) -> (f64, f64) {
        match (&self.kind, &p.state) {
            (_, PrefixState::Chain { lin, ln, .. }) => (*lin, *ln),
            (_, PrefixState::Dirac { alive }) => {
                if *alive {
                    (1.0, 0.0)
                } else {
                    (0.0, f64::NEG_INFINITY)
                }
            }
            (MeasureKind::Mixture(m), PrefixState::Mixture(parts)) => {
                let (l1, g1) = m.first.prefix_lin_ln(&parts[0]);
                let (l2, g2) = m.second.prefix_lin_ln(&parts[1]);
                (
                    m.lambda * l1 + (1.0 - m.lambda) * l2,
                    ln_add_exp(m.lambda.ln() + g1, (1.0 - m.lambda).ln() + g2),
                )
            }
            (_, PrefixState::Renewal { ln, .. }) => (ln.exp(), *ln),
            _ => unreachable!("prefix state built for another measure"),
        }
    }

    /// Probability of the cylinder spelled by the prefix. Linear accumulation
    /// up to 50 symbols, log domain beyond.
    pub fn prefix_prob(&self, p: &Prefix) -> Prob {
        let (lin, ln) = self.prefix_lin_ln(p);
        if p.len <= LINEAR_MAX_LEN {
            Prob::from_value(lin)
        } else {
            Prob::from_ln(ln)
        }
    }

    /// `mu(w)` for a raw symbol slice over this measure's alphabet.
    pub fn cylinder(&self, w: &[Sym]) -> Prob {
        let mut p = self.prefix_start();
        for &a in w {
            self.prefix_push_mut(&mut p, a);
        }
        self.prefix_prob(&p)
    }

    /// `ln mu(w_0^{t})` for every `t < w.len()`.
    pub fn prefix_log_probs(&self, w: &[Sym]) -> Vec<Prob> {
        let mut p = self.prefix_start();
        w.iter()
            .map(|&a| {
                self.prefix_push_mut(&mut p, a);
                self.prefix_prob(&p)
            })
            .collect()
    }

    pub fn cylinder_prob(&self, w: &Word) -> Result<Prob> {
        same_alphabet(&self.alphabet, w.alphabet())?;
        Ok(self.cylinder(w.syms()))
    }

    /// `mu(w) > 0`; for the renewal process decided by a feasibility search
    /// over the hidden chain so that underflow cannot hide a positive mass.
    pub fn admissible_syms(&self, w: &[Sym]) -> bool {
        match &self.kind {
            MeasureKind::Renewal(h) => renewal_feasible(h, w),
            MeasureKind::Mixture(m) => m.first.admissible_syms(w) || m.second.admissible_syms(w),
            _ => !self.cylinder(w).is_zero(),
        }
    }

    pub fn admissible(&self, w: &Word) -> Result<bool> {
        same_alphabet(&self.alphabet, w.alphabet())?;
        Ok(self.admissible_syms(w.syms()))
    }

    /// Shannon entropy rate in nats.
    pub fn shannon_entropy(&self) -> Result<f64> {
        let plogp = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
        match &self.kind {
            MeasureKind::Iid(m) => Ok(m.probs.iter().map(|&p| plogp(p)).sum()),
            MeasureKind::Markov(m) => Ok(m
                .stationary
                .iter()
                .zip(&m.transition)
                .map(|(pi, row)| pi * row.iter().map(|&p| plogp(p)).sum::<f64>())
                .sum()),
            _ => Err(Error::EntropyUnavailable(self.variant_name())),
        }
    }

    /// Every word of length `n` has positive probability.
    pub fn is_complete_grammar(&self, n: usize) -> Result<bool> {
        if n == 0 {
            return Err(Error::InvalidArgument("word length must be at least 1".into()));
        }
        match &self.kind {
            MeasureKind::Iid(m) => return Ok(m.probs.iter().all(|&p| p > 0.0)),
            MeasureKind::Markov(m) => {
                return Ok(n == 1 || m.transition.iter().flatten().all(|&p| p > 0.0))
            }
            _ => {}
        }
        let size = self.alphabet.size();
        limits::check_power("complete-grammar enumeration", size, n)?;
        // count admissible leaves; the tree is pruned at dead prefixes
        let leaves = par_dfs(
            size,
            n,
            self.prefix_start(),
            |p: &Prefix, w: &[Sym]| {
                let next = self.prefix_push(p, *w.last().unwrap());
                (!self.prefix_prob(&next).is_zero()).then_some(next)
            },
            || 0u64,
            |acc: &mut u64, w: &[Sym], _| {
                if w.len() == n {
                    *acc += 1;
                }
            },
            |acc, other| *acc += other,
        );
        Ok(leaves as f64 == (size as f64).powi(n as i32))
    }
}

fn renewal_feasible(h: &HouseOfCards, w: &[Sym]) -> bool {
    let states = h.q.len();
    let emit_ok = |y: usize, a: Sym| (y == 0) == (a == 1);
    let mut cur: Vec<bool> = (0..states)
        .map(|y| h.stationary[y] > 0.0 && w.first().is_none_or(|&a| emit_ok(y, a)))
        .collect();
    for &a in w.iter().skip(1) {
        let mut next = vec![false; states];
        for y in (0..states).filter(|&y| cur[y]) {
            if h.can_reset(y) {
                next[0] = true;
            }
            if y + 1 < states && h.can_continue(y) {
                next[y + 1] = true;
            }
        }
        for (y, v) in next.iter_mut().enumerate() {
            *v = *v && emit_ok(y, a);
        }
        if !next.iter().any(|&v| v) {
            return false;
        }
        cur = next;
    }
    cur.iter().any(|&v| v)
}
