//! Small dense helpers for nonnegative matrices stored as row vectors.

pub type Matrix = Vec<Vec<f64>>;

/// States not in the strongly connected component of state 0, in ascending order.
///
/// Edges are the strictly positive entries.
pub fn outside_main_component(m: &Matrix) -> Vec<usize> {
    let n = m.len();
    let forward = reach(n, 0, |i, j| m[i][j] > 0.0);
    let backward = reach(n, 0, |i, j| m[j][i] > 0.0);
    (0..n).filter(|&i| !(forward[i] && backward[i])).collect()
}

pub fn is_irreducible(m: &Matrix) -> bool {
    !m.is_empty() && outside_main_component(m).is_empty()
}

fn reach(n: usize, start: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for (j, s) in seen.iter_mut().enumerate() {
            if !*s && edge(i, j) {
                *s = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Row vector times matrix.
pub fn vec_mat(v: &[f64], m: &Matrix) -> Vec<f64> {
    let n = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (vi, row) in v.iter().zip(m) {
        if *vi == 0.0 {
            continue;
        }
        for (o, mij) in out.iter_mut().zip(row) {
            *o += vi * mij;
        }
    }
    out
}

/// Matrix times column vector.
pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().map(|row| vec_mat(row, b)).collect()
}

pub fn mat_pow(m: &Matrix, mut e: usize) -> Matrix {
    let n = m.len();
    let mut result: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result
}

/// Stationary row vector of an irreducible stochastic matrix.
///
/// Power iteration on the lazy chain `(I + P) / 2`, which shares the stationary
/// vector and is aperiodic. Returns the vector and the final residual
/// `max_i |(pi P)_i - pi_i|`.
pub fn stationary_vector(p: &Matrix, rel_tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let step = vec_mat(&pi, p);
        residual = step
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = pi.iter().cloned().fold(0.0, f64::max);
        if residual <= rel_tol * scale {
            break;
        }
        let mut next: Vec<f64> = step.iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        pi = next;
    }
    (pi, residual)
}

/// Perron root estimate with Collatz-Wielandt bounds.
#[derive(Debug, Clone)]
pub struct PerronRoot {
    pub value: f64,
    /// `min_i (Hv)_i / v_i`, a lower bound on the spectral radius.
    pub lower: f64,
    /// `max_i (Hv)_i / v_i`, an upper bound on the spectral radius.
    pub upper: f64,
    /// Positive vector the bounds were taken at.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration from the all-ones vector, stopping when the Collatz-Wielandt
/// bounds agree to `rel_tol`. `None` when the bounds do not meet within
/// `max_iter` steps (also retried on `H + I` to break periodicity).
pub fn perron_root(h: &Matrix, rel_tol: f64, max_iter: usize) -> Option<PerronRoot> {
    if let Some(r) = perron_iter(h, 0.0, rel_tol, max_iter) {
        return Some(r);
    }
    perron_iter(h, 1.0, rel_tol, max_iter)
}

fn perron_iter(h: &Matrix, shift: f64, rel_tol: f64, max_iter: usize) -> Option<PerronRoot> {
    let n = h.len();
    let mut v = vec![1.0; n];
    for it in 1..=max_iter {
        let mut w = mat_vec(h, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += shift * vi;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (wi, vi) in w.iter().zip(&v) {
            if *vi <= 0.0 {
                return None;
            }
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return None;
        }
        if hi - lo <= rel_tol * hi {
            let value = 0.5 * (lo + hi) - shift;
            return Some(PerronRoot {
                value,
                lower: lo - shift,
                upper: hi - shift,
                vector: v,
                iterations: it,
            });
        }
        v = w.into_iter().map(|x| x / norm).collect();
    }
    None
}
