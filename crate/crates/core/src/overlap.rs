//! Border arrays, cross overlaps and the recurrence functions built on them:
//! the shortest path between two words, the shortest return of a word to
//! itself, and the waiting time of a word inside a stream.
//!
//! All functions use full-shift semantics unless they take an admissibility
//! oracle. Under full-shift semantics the shortest path from `y` to `x` is
//! `n - j*`, where `j*` is the longest suffix of `y` that is a prefix of `x`
//! (0 when there is none).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::word::{Sym, Word};

/// Failure function: `f[i]` is the longest proper border of `w[..i]`, for
/// `i in 0..=w.len()` (`f[0] = f[1] = 0`).
pub fn failure_function(w: &[Sym]) -> Vec<usize> {
    let mut f = vec![0usize; w.len() + 1];
    let mut k = 0;
    for i in 1..w.len() {
        while k > 0 && w[i] != w[k] {
            k = f[k];
        }
        if w[i] == w[k] {
            k += 1;
        }
        f[i + 1] = k;
    }
    f
}

/// Border lengths `j` in `[1, len - 1]` of a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorderProfile {
    pub len: usize,
    /// Ascending.
    pub borders: Vec<usize>,
}

impl BorderProfile {
    pub fn longest(&self) -> usize {
        self.borders.last().copied().unwrap_or(0)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.borders.binary_search(&j).is_ok()
    }
}

/// Pairs `(x, y)` of equal length `n` with the set of `j in [1, n - 1]` such that
/// `y[n-j..] == x[..j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossOverlapProfile {
    pub len: usize,
    /// Ascending.
    pub overlaps: Vec<usize>,
}

impl CrossOverlapProfile {
    pub fn longest(&self) -> usize {
        self.overlaps.last().copied().unwrap_or(0)
    }
}

fn chain_from(mut j: usize, f: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    while j > 0 {
        out.push(j);
        j = f[j];
    }
    out.reverse();
    out
}

pub fn border_profile_syms(w: &[Sym]) -> BorderProfile {
    let f = failure_function(w);
    let borders = if w.is_empty() {
        Vec::new()
    } else {
        chain_from(f[w.len()], &f)
    };
    BorderProfile {
        len: w.len(),
        borders,
    }
}

pub fn border_profile(w: &Word) -> BorderProfile {
    border_profile_syms(w.syms())
}

/// Longest prefix of `x` that is a suffix of `y`, capped below `x.len()` when
/// the two words are equal. Runs the matching automaton of `x` over `y`.
fn longest_cross(x: &[Sym], y: &[Sym], f: &[usize]) -> usize {
    let n = x.len();
    let mut q = 0;
    for &c in y {
        if q == n {
            q = f[q];
        }
        while q > 0 && x[q] != c {
            q = f[q];
        }
        if x[q] == c {
            q += 1;
        }
    }
    if q == n {
        f[n]
    } else {
        q
    }
}

pub fn cross_overlaps_syms(x: &[Sym], y: &[Sym]) -> Result<CrossOverlapProfile> {
    check_equal_len(x, y)?;
    let f = failure_function(x);
    let overlaps = if x.is_empty() {
        Vec::new()
    } else {
        chain_from(longest_cross(x, y, &f), &f)
    };
    Ok(CrossOverlapProfile {
        len: x.len(),
        overlaps,
    })
}

pub fn cross_overlaps(x: &Word, y: &Word) -> Result<CrossOverlapProfile> {
    x.same_alphabet(y)?;
    cross_overlaps_syms(x.syms(), y.syms())
}

fn check_equal_len(x: &[Sym], y: &[Sym]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Shortest path from `y` to `x` in the full shift, for words of equal length
/// `n >= 1`. Always in `[1, n]`.
pub fn shortest_path_syms(x: &[Sym], y: &[Sym]) -> Result<usize> {
    check_equal_len(x, y)?;
    if x.is_empty() {
        return Err(Error::InvalidArgument("words must be nonempty".into()));
    }
    let f = failure_function(x);
    Ok(x.len() - longest_cross(x, y, &f))
}

pub fn shortest_path(x: &Word, y: &Word) -> Result<usize> {
    x.same_alphabet(y)?;
    shortest_path_syms(x.syms(), y.syms())
}

/// Shortest return of a word to itself: `n` minus its longest border.
pub fn shortest_return_syms(w: &[Sym]) -> Result<usize> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("word must be nonempty".into()));
    }
    Ok(w.len() - failure_function(w)[w.len()])
}

pub fn shortest_return(w: &Word) -> Result<usize> {
    shortest_return_syms(w.syms())
}

/// First `k >= 1` with `stream[k..k + n] == x`, or `None`.
pub fn waiting_time_syms(x: &[Sym], stream: &[Sym]) -> Result<Option<usize>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("word must be nonempty".into()));
    }
    if stream.len() < n {
        return Err(Error::InvalidArgument(format!(
            "stream of length {} is shorter than the word ({n})",
            stream.len()
        )));
    }
    let f = failure_function(x);
    let mut q = 0;
    for (i, &c) in stream.iter().enumerate().skip(1) {
        while q > 0 && (q == n || x[q] != c) {
            q = f[q];
        }
        if x[q] == c {
            q += 1;
        }
        if q == n {
            return Ok(Some(i + 1 - n));
        }
    }
    Ok(None)
}

pub fn waiting_time(x: &Word, stream: &Word) -> Result<Option<usize>> {
    x.same_alphabet(stream)?;
    waiting_time_syms(x.syms(), stream.syms())
}

/// Extends `prefix` by exactly `gap` free symbols followed by `suffix` and
/// returns the first admissible filling found in lexicographic order.
///
/// Fillings are grown symbol by symbol and abandoned as soon as
/// `prefix . partial` is inadmissible, so the oracle must be closed under
/// taking prefixes. `budget` bounds the number of oracle calls.
pub fn find_gap_filling(
    prefix: &[Sym],
    suffix: &[Sym],
    gap: usize,
    alphabet_size: usize,
    oracle: &dyn Fn(&[Sym]) -> bool,
) -> Result<Option<Vec<Sym>>> {
    limits::check_power("gap filling search", alphabet_size, gap)?;
    let mut word = prefix.to_vec();
    if !oracle(&word) {
        return Ok(None);
    }
    let mut calls = 0u64;
    let found = fill(&mut word, prefix.len(), suffix, gap, alphabet_size, oracle, &mut calls)?;
    Ok(found.then(|| word[prefix.len()..prefix.len() + gap].to_vec()))
}

fn fill(
    word: &mut Vec<Sym>,
    base: usize,
    suffix: &[Sym],
    gap: usize,
    size: usize,
    oracle: &dyn Fn(&[Sym]) -> bool,
    calls: &mut u64,
) -> Result<bool> {
    *calls += 1;
    if *calls > limits::enum_cap() {
        return Err(Error::CapExceeded {
            what: "gap filling search".into(),
            needed: *calls as f64,
            cap: limits::enum_cap(),
        });
    }
    if word.len() == base + gap {
        word.extend_from_slice(suffix);
        let ok = oracle(word);
        word.truncate(base + gap);
        return Ok(ok);
    }
    for a in 0..size as Sym {
        word.push(a);
        if oracle(word) && fill(word, base, suffix, gap, size, oracle, calls)? {
            return Ok(true);
        }
        word.pop();
    }
    Ok(false)
}

/// Shortest path inside a subshift described by `oracle`: the smallest
/// `k in [1, k_max]` such that `y` followed, `k` steps later, by `x` is an
/// admissible word. For `k < n` the words must agree on their overlap; for
/// `k >= n` the `k - n` gap symbols are searched.
pub fn shortest_path_constrained_syms(
    x: &[Sym],
    y: &[Sym],
    alphabet_size: usize,
    oracle: &dyn Fn(&[Sym]) -> bool,
    k_max: usize,
) -> Result<Option<usize>> {
    check_equal_len(x, y)?;
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("words must be nonempty".into()));
    }
    for k in 1..=k_max {
        if k < n {
            if y[k..] != x[..n - k] {
                continue;
            }
            let mut fused = y[..k].to_vec();
            fused.extend_from_slice(x);
            if oracle(&fused) {
                return Ok(Some(k));
            }
        } else if find_gap_filling(y, x, k - n, alphabet_size, oracle)?.is_some() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

pub fn shortest_path_constrained(
    x: &Word,
    y: &Word,
    oracle: &dyn Fn(&[Sym]) -> bool,
    k_max: usize,
) -> Result<Option<usize>> {
    x.same_alphabet(y)?;
    shortest_path_constrained_syms(x.syms(), y.syms(), x.alphabet().size(), oracle, k_max)
}
