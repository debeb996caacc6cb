use serde::{Deserialize, Serialize};

use super::{Measure, MeasureKind, Prefix};
use crate::enumerate::for_each_word;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg;
use crate::word::Sym;

/// `sup_{w in X^i, xi in X^j} mu(w . X^g . xi) / (mu(w) mu(xi))`.
///
/// Pairs with `mu(w) = 0` or `mu(xi) = 0` are skipped. I.i.d. measures return
/// 1 and Markov chains use `max_{a,b} P^{g+1}(a,b) / pi(b)`; other variants
/// are enumerated.
pub fn psi_plus(m: &Measure, g: usize, i: usize, j: usize) -> Result<f64> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidArgument("psi_plus needs i, j >= 1".into()));
    }
    match m.kind() {
        MeasureKind::Iid(_) => Ok(1.0),
        MeasureKind::Markov(chain) => {
            let step = linalg::mat_pow(chain.transition(), g + 1);
            let pi = chain.stationary();
            Ok(step
                .iter()
                .flat_map(|row| row.iter().zip(pi).map(|(p, q)| p / q))
                .fold(0.0, f64::max))
        }
        _ => psi_plus_enum(m, g, i, j),
    }
}

/// Enumeration route for any measure; also the oracle for the closed forms.
pub(crate) fn psi_plus_enum(m: &Measure, g: usize, i: usize, j: usize) -> Result<f64> {
    let size = m.alphabet().size();
    limits::check_power("psi_plus enumeration", size, i + g + j)?;

    let mut xi_prob = Vec::with_capacity(size.pow(j as u32));
    for_each_word(size, j, |xi| xi_prob.push(m.cylinder(xi).value));

    let mut best: Option<f64> = None;
    let mut joint = vec![0.0; xi_prob.len()];
    for_each_word(size, i, |omega| {
        let start = {
            let mut p = m.prefix_start();
            for &a in omega {
                m.prefix_push_mut(&mut p, a);
            }
            p
        };
        let mu_omega = m.prefix_prob(&start).value;
        if mu_omega == 0.0 {
            return;
        }
        joint.iter_mut().for_each(|x| *x = 0.0);
        let mut tail = Vec::with_capacity(g + j);
        accumulate(m, &start, g, j, size, &mut tail, &mut joint);
        for (&num, &den) in joint.iter().zip(&xi_prob) {
            if den > 0.0 {
                let r = num / (mu_omega * den);
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
        }
    });
    best.ok_or_else(|| Error::Degenerate("every conditioning pair has zero mass".into()))
}

fn accumulate(
    m: &Measure,
    state: &Prefix,
    g: usize,
    j: usize,
    size: usize,
    tail: &mut Vec<Sym>,
    joint: &mut [f64],
) {
    if tail.len() == g + j {
        let idx = tail[g..]
            .iter()
            .fold(0usize, |acc, &s| acc * size + s as usize);
        joint[idx] += m.prefix_prob(state).value;
        return;
    }
    for a in 0..size as Sym {
        let next = m.prefix_push(state, a);
        if m.prefix_prob(&next).is_zero() {
            continue;
        }
        tail.push(a);
        accumulate(m, &next, g, j, size, tail, joint);
        tail.pop();
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublogViolation {
    pub i: usize,
    pub j: usize,
    pub log_psi: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublogReport {
    pub g: usize,
    pub k: f64,
    pub eps: f64,
    pub checked: usize,
    pub violations: Vec<SublogViolation>,
}

/// Checks `log psi_g(i, j) <= K (i + j) / log(i + j)^{1 + eps}` for all
/// `i, j >= 1` with `i + j <= max_ij`.
pub fn check_sublog(m: &Measure, g: usize, k: f64, eps: f64, max_ij: usize) -> Result<SublogReport> {
    if !(k > 0.0 && eps > 0.0) {
        return Err(Error::InvalidArgument("K and eps must be positive".into()));
    }
    let mut report = SublogReport {
        g,
        k,
        eps,
        checked: 0,
        violations: Vec::new(),
    };
    for total in 2..=max_ij {
        let bound = k * total as f64 / (total as f64).ln().powf(1.0 + eps);
        for i in 1..total {
            let j = total - i;
            let log_psi = psi_plus(m, g, i, j)?.ln();
            report.checked += 1;
            if log_psi > bound {
                report.violations.push(SublogViolation { i, j, log_psi, bound });
            }
        }
    }
    Ok(report)
}
