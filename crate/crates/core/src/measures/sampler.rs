use rand::distr::Distribution;
use rand::Rng;

use super::{Dirac, HouseOfCards, Iid, Markov, Measure, MeasureKind};
use crate::word::{Sym, Word};

/// Sequential sampler of one realization. Mixtures pick their component once
/// at construction, so successive symbols follow the conditional law of the
/// chosen path.
#[derive(Debug, Clone)]
pub enum PathSampler<'a> {
    Iid(&'a Iid),
    Markov {
        chain: &'a Markov,
        last: Option<Sym>,
    },
    Dirac {
        dirac: &'a Dirac,
        pos: usize,
    },
    Renewal {
        hoc: &'a HouseOfCards,
        state: Option<usize>,
    },
}

impl Measure {
    pub fn sampler<R: Rng + ?Sized>(&self, rng: &mut R) -> PathSampler<'_> {
        match &self.kind {
            MeasureKind::Iid(m) => PathSampler::Iid(m),
            MeasureKind::Markov(m) => PathSampler::Markov {
                chain: m,
                last: None,
            },
            MeasureKind::Dirac(d) => PathSampler::Dirac { dirac: d, pos: 0 },
            MeasureKind::Mixture(m) => {
                if rng.random::<f64>() < m.lambda {
                    m.first.sampler(rng)
                } else {
                    m.second.sampler(rng)
                }
            }
            MeasureKind::Renewal(h) => PathSampler::Renewal {
                hoc: h,
                state: None,
            },
        }
    }
}

impl PathSampler<'_> {
    pub fn next_symbol<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Sym {
        match self {
            PathSampler::Iid(m) => m.draw.sample(rng) as Sym,
            PathSampler::Markov { chain, last } => {
                let a = match *last {
                    None => chain.start.sample(rng),
                    Some(b) => chain.rows[b as usize].sample(rng),
                } as Sym;
                *last = Some(a);
                a
            }
            PathSampler::Dirac { dirac, pos } => {
                let a = dirac.pattern.symbol_at(*pos);
                *pos += 1;
                a
            }
            PathSampler::Renewal { hoc, state } => {
                let y = match *state {
                    None => hoc.start.sample(rng),
                    Some(y) => {
                        if rng.random::<f64>() < hoc.q[y] {
                            y + 1
                        } else {
                            0
                        }
                    }
                };
                *state = Some(y);
                Sym::from(y == 0)
            }
        }
    }

    pub fn take<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Vec<Sym> {
        (0..n).map(|_| self.next_symbol(rng)).collect()
    }
}

/// Draws an `n`-prefix distributed as the `n`-marginal of `m`.
pub fn sample_prefix<R: Rng + ?Sized>(m: &Measure, n: usize, rng: &mut R) -> Word {
    let syms = m.sampler(rng).take(n, rng);
    Word::new(m.alphabet().clone(), syms).expect("sampled symbols lie in the alphabet")
}
