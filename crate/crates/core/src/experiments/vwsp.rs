use serde::{Deserialize, Serialize};

use crate::enumerate::par_dfs;
use crate::error::{Error, Result};
use crate::limits;
use crate::measures::Measure;
use crate::overlap::find_gap_filling;
use crate::word::{Sym, Word};

/// Smallest `g <= g_max` such that `omega . u . xi` is admissible for some
/// word `u` of length `g`. The oracle must accept every prefix of an
/// admissible word.
pub fn vwsp_gap(omega: &Word, xi: &Word, oracle: &dyn Fn(&[Sym]) -> bool, g_max: usize) -> Result<Option<usize>> {
    omega.same_alphabet(xi)?;
    if omega.len() != xi.len() {
        return Err(Error::LengthMismatch {
            left: omega.len(),
            right: xi.len(),
        });
    }
    let size = omega.alphabet().size();
    for g in 0..=g_max {
        if find_gap_filling(omega.syms(), xi.syms(), g, size, oracle)?.is_some() {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapRow {
    pub n: usize,
    pub pairs: usize,
    /// Largest minimal gap found, with the pair attaining it.
    pub max_gap: Option<usize>,
    pub witness: Option<(String, String)>,
    /// Pairs with no joining word within `g_max`.
    pub unresolved: usize,
}

/// Admissible words of length `n` under the measure, lexicographically.
pub fn admissible_words(m: &Measure, n: usize) -> Result<Vec<Vec<Sym>>> {
    let size = m.alphabet().size();
    limits::check_power("admissible word enumeration", size, n)?;
    Ok(par_dfs(
        size,
        n,
        (),
        |_, w: &[Sym]| m.admissible_syms(w).then_some(()),
        Vec::new,
        |acc: &mut Vec<Vec<Sym>>, w: &[Sym], _| {
            if w.len() == n {
                acc.push(w.to_vec());
            }
        },
        |acc, mut other| acc.append(&mut other),
    ))
}

/// Minimal gaps over the given pairs, or over every admissible pair of
/// `n`-words when `pairs` is empty.
pub fn gap_survey(m: &Measure, n: usize, pairs: &[(Word, Word)], g_max: usize) -> Result<GapRow> {
    let oracle = |w: &[Sym]| m.admissible_syms(w);
    let alphabet = m.alphabet().clone();
    let owned: Vec<(Word, Word)>;
    let pairs = if pairs.is_empty() {
        let words = admissible_words(m, n)?;
        let count = (words.len() as f64).powi(2);
        if count > limits::enum_cap() as f64 {
            return Err(Error::CapExceeded {
                what: "admissible pair survey".into(),
                needed: count,
                cap: limits::enum_cap(),
            });
        }
        let as_word = |w: &Vec<Sym>| Word::new(alphabet.clone(), w.clone()).expect("valid symbols");
        owned = words
            .iter()
            .flat_map(|a| words.iter().map(move |b| (a, b)))
            .map(|(a, b)| (as_word(a), as_word(b)))
            .collect();
        &owned[..]
    } else {
        pairs
    };
    let mut row = GapRow {
        n,
        pairs: pairs.len(),
        max_gap: None,
        witness: None,
        unresolved: 0,
    };
    for (omega, xi) in pairs {
        match vwsp_gap(omega, xi, &oracle, g_max)? {
            Some(g) if row.max_gap.is_none_or(|best| g > best) => {
                row.max_gap = Some(g);
                row.witness = Some((omega.to_string(), xi.to_string()));
            }
            Some(_) => {}
            None => row.unresolved += 1,
        }
    }
    Ok(row)
}
