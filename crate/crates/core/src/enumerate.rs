//! Depth-first enumeration of words with pruning, parallel over top-level
//! prefixes.
//!
//! Each subtree below the split depth is walked sequentially into its own
//! accumulator, and accumulators are merged in lexicographic order of their
//! prefixes. The result therefore does not depend on the number of workers.

use rayon::prelude::*;

use crate::word::Sym;

/// Number of subtrees aimed for when splitting the tree across workers.
const SPLIT_TARGET: f64 = 256.0;

/// Walks every word of length `1..=max_depth` over `size` symbols.
///
/// `extend(parent, word)` builds the state of `word` (whose last symbol is new)
/// or returns `None` to prune the whole subtree. `visit` sees every surviving
/// node, shallow nodes first, then each subtree in depth-first lexicographic
/// order.
pub(crate) fn par_dfs<S, A, E, N, V, M>(
    size: usize,
    max_depth: usize,
    root: S,
    extend: E,
    new_acc: N,
    visit: V,
    merge: M,
) -> A
where
    S: Clone + Send + Sync,
    A: Send,
    E: Fn(&S, &[Sym]) -> Option<S> + Sync,
    N: Fn() -> A + Sync,
    V: Fn(&mut A, &[Sym], &S) + Sync,
    M: Fn(&mut A, A),
{
    let mut acc = new_acc();
    if max_depth == 0 || size == 0 {
        return acc;
    }
    let mut split = 1;
    while split < max_depth && (size as f64).powi(split as i32) < SPLIT_TARGET {
        split += 1;
    }

    let mut frontier: Vec<(Vec<Sym>, S)> = vec![(Vec::new(), root)];
    for depth in 1..=split {
        let mut next = Vec::with_capacity(frontier.len() * size);
        for (w, s) in &frontier {
            for a in 0..size as Sym {
                let mut child = w.clone();
                child.push(a);
                if let Some(cs) = extend(s, &child) {
                    if depth < split {
                        visit(&mut acc, &child, &cs);
                    }
                    next.push((child, cs));
                }
            }
        }
        frontier = next;
    }

    let parts: Vec<A> = frontier
        .into_par_iter()
        .map(|(mut w, s)| {
            let mut local = new_acc();
            visit(&mut local, &w, &s);
            descend(size, max_depth, &mut w, &s, &extend, &visit, &mut local);
            local
        })
        .collect();
    for part in parts {
        merge(&mut acc, part);
    }
    acc
}

fn descend<S, A, E, V>(
    size: usize,
    max_depth: usize,
    word: &mut Vec<Sym>,
    state: &S,
    extend: &E,
    visit: &V,
    acc: &mut A,
) where
    E: Fn(&S, &[Sym]) -> Option<S>,
    V: Fn(&mut A, &[Sym], &S),
{
    if word.len() >= max_depth {
        return;
    }
    for a in 0..size as Sym {
        word.push(a);
        if let Some(cs) = extend(state, word) {
            visit(acc, word, &cs);
            descend(size, max_depth, word, &cs, extend, visit, acc);
        }
        word.pop();
    }
}

/// Calls `f` on every word of length `len` in lexicographic order.
pub(crate) fn for_each_word(size: usize, len: usize, mut f: impl FnMut(&[Sym])) {
    let mut w = vec![0 as Sym; len];
    loop {
        f(&w);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            w[i] += 1;
            if (w[i] as usize) < size {
                break;
            }
            w[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visits_every_node_once() {
        let count = par_dfs(
            3,
            5,
            (),
            |_, _| Some(()),
            || vec![0usize; 6],
            |acc: &mut Vec<usize>, w, _| acc[w.len()] += 1,
            |acc, other| acc.iter_mut().zip(other).for_each(|(a, b)| *a += b),
        );
        assert_eq!(count, vec![0, 3, 9, 27, 81, 243]);
    }

    #[test]
    fn pruning_removes_subtrees() {
        // words with no "11" factor: Fibonacci counts
        let count = par_dfs(
            2,
            10,
            (),
            |_, w: &[Sym]| (!w.ends_with(&[1, 1])).then_some(()),
            || vec![0usize; 11],
            |acc: &mut Vec<usize>, w, _| acc[w.len()] += 1,
            |acc, other| acc.iter_mut().zip(other).for_each(|(a, b)| *a += b),
        );
        assert_eq!(&count[1..], &[2, 3, 5, 8, 13, 21, 34, 55, 89, 144]);
    }

    #[test]
    fn lexicographic_words() {
        let mut seen = Vec::new();
        for_each_word(2, 2, |w| seen.push(w.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut empty = 0;
        for_each_word(3, 0, |_| empty += 1);
        assert_eq!(empty, 1);
    }
}
