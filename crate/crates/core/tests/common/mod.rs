//! Seeded generators of random measure pairs shared by the integration tests.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use recurstat::word::Alphabet;
use recurstat::Measure;

pub fn alphabet(size: usize) -> Arc<Alphabet> {
    let labels: Vec<String> = (0..size).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    Alphabet::new(&labels).unwrap()
}

/// Strictly positive probability vector, so every word is admissible.
pub fn positive_probs<R: Rng>(rng: &mut R, size: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..size).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn random_iid<R: Rng>(rng: &mut R, size: usize) -> Measure {
    Measure::iid(alphabet(size), positive_probs(rng, size)).unwrap()
}

pub fn random_markov<R: Rng>(rng: &mut R, size: usize) -> Measure {
    let p = (0..size).map(|_| positive_probs(rng, size)).collect();
    Measure::markov(alphabet(size), p).unwrap()
}

pub fn random_mixture<R: Rng>(rng: &mut R, size: usize) -> Measure {
    let lambda = 0.1 + 0.8 * rng.random::<f64>();
    Measure::mixture(lambda, random_iid(rng, size), random_markov(rng, size)).unwrap()
}

/// Cycles through i.i.d., Markov, mixed and mixture pairs.
pub fn random_pair<R: Rng>(rng: &mut R, size: usize, variant: usize) -> (Measure, Measure) {
    match variant % 4 {
        0 => (random_iid(rng, size), random_iid(rng, size)),
        1 => (random_markov(rng, size), random_markov(rng, size)),
        2 => (random_iid(rng, size), random_markov(rng, size)),
        _ => (random_mixture(rng, size), random_iid(rng, size)),
    }
}

/// Sticky three-state chains; `E(k)` decays slowly, which keeps the summed
/// tail bound well away from the true tail probability.
pub fn sticky_chains() -> (Measure, Measure) {
    let a = alphabet(3);
    let mu = Measure::markov(
        a.clone(),
        vec![vec![0.9, 0.05, 0.05], vec![0.05, 0.9, 0.05], vec![0.05, 0.05, 0.9]],
    )
    .unwrap();
    let nu = Measure::markov(a, vec![vec![0.85, 0.1, 0.05], vec![0.1, 0.8, 0.1], vec![0.05, 0.1, 0.85]]).unwrap();
    (mu, nu)
}

/// Mixing three-state chains with rate near 1.
pub fn mixing_chains() -> (Measure, Measure) {
    let a = alphabet(3);
    let mu = Measure::markov(a.clone(), vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.3, 0.3, 0.4]]).unwrap();
    let nu = Measure::markov(a, vec![vec![0.5, 0.2, 0.3], vec![0.3, 0.4, 0.3], vec![0.1, 0.4, 0.5]]).unwrap();
    (mu, nu)
}
