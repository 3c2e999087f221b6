//! Combinatorics of finite binary expansions in base φ (the golden mean) and
//! the random Cantor set generated by the overlapping IFS
//! `{x ↦ x/φ, x ↦ (x + 1)/φ}`.
//!
//! Modules, bottom up:
//!
//! - [`golden`]: exact arithmetic in `Z[φ]`.
//! - [`words`]: binary words, their base-φ values, greedy words and the
//!   forbidden-factor automaton.
//! - [`classes`]: equivalence classes of words with equal value, their sizes
//!   and the multiplicity histogram.
//! - [`intervals`]: the level-`n` intervals `I_c` and their overlaps.
//! - [`expected`]: expected survivor counts and the expected-dimension law.
//! - [`simulate`]: seeded Bernoulli retention trees and Monte Carlo.
//! - [`cli`]: the `phicantor` command line.

pub mod classes;
pub mod cli;
pub mod expected;
pub mod golden;
pub mod intervals;
pub mod simulate;
pub mod words;

pub use classes::{ClassRecord, MultiplicityHistogram};
pub use golden::{ArithError, GoldenInt, GoldenRational};
pub use intervals::PhiInterval;
pub use simulate::{McSummary, SimulationOutcome};
pub use words::{LevelPartition, Word};

/// The golden mean `(1 + √5) / 2` as an `f64`.
pub const PHI: f64 = 1.618_033_988_749_895;
