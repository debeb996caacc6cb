//! Recurrence statistics between two stationary symbolic processes.
//!
//! The crate computes the shortest path `T_n(x, y)` between two words, the
//! k-divergence `E(k) = sum_w mu(w) nu(w)` with its rate `-(1/k) ln E(k)`,
//! the exact law of `n - T_n` under `mu x nu`, and Monte Carlo drivers for the
//! associated limit theorems.

pub mod cli;
pub mod distribution;
pub mod divergence;
pub(crate) mod enumerate;
pub mod error;
pub mod experiments;
pub mod limits;
pub mod linalg;
pub mod measures;
pub mod overlap;
pub mod prob;
pub mod word;

pub use error::{Error, Result};
pub use measures::{Measure, MeasureSpec};
pub use prob::Prob;
pub use word::{Alphabet, Sym, Word};
