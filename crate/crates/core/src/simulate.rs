//! Seeded Bernoulli retention trees.
//!
//! Every node of the binary tree keeps each of its two children with
//! probability `p`. The coin for a child is drawn from a ChaCha8 stream keyed
//! by the trial seed and addressed by the parent's path, so a trial's outcome
//! does not depend on traversal order or thread count.
//!
//! Tree paths are in IFS composition order; they are reversed before being
//! turned into intervals.

use std::collections::HashSet;
use std::io;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expected::CompensatedSum;
use crate::golden::{ArithError, GoldenRational};
use crate::intervals::{interval_of, PhiInterval};
use crate::words::{enumerate_greedy, Word};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("depth {depth} exceeds the cap of {cap}")]
    DepthCap { depth: usize, cap: usize },
    #[error("level {level} would hold {alive} live nodes, above the budget of {budget}")]
    NodeBudget {
        level: usize,
        alive: usize,
        budget: usize,
    },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Deepest tree the path encoding supports.
pub const MAX_DEPTH: usize = 63;
/// Upper bound on the children generated from one level (`2^24`).
pub const MAX_ALIVE: usize = 1 << 24;

fn check_p(p: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SimError::BadProbability(p))
    }
}

/// Seed of trial `index` within a Monte Carlo run seeded by `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Counter-based coins: one ChaCha8 stream per parent node.
struct NodeCoins {
    base: ChaCha8Rng,
}

impl NodeCoins {
    fn new(seed: u64) -> Self {
        NodeCoins {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Retention decisions for the children `parent·0` and `parent·1`.
    fn children(&self, parent: &Word, p: f64) -> [bool; 2] {
        let mut rng = self.base.clone();
        // unique id: leading 1 marks the depth
        rng.set_stream((1u64 << parent.len()) | parent.bits());
        rng.set_word_pos(0);
        let mut draw = || ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p;
        [draw(), draw()]
    }
}

/// Live paths at every level `0..=n`.
fn grow(
    n: usize,
    p: f64,
    seed: u64,
    keep_levels: bool,
    budget: usize,
) -> Result<Vec<Vec<Word>>, SimError> {
    check_p(p)?;
    if n > MAX_DEPTH {
        return Err(SimError::DepthCap {
            depth: n,
            cap: MAX_DEPTH,
        });
    }
    let coins = NodeCoins::new(seed);
    let mut levels = vec![vec![Word::EMPTY]];
    for level in 1..=n {
        let prev = levels.last().expect("root level");
        if p > 0.0 && prev.len() * 2 > budget {
            return Err(SimError::NodeBudget {
                level,
                alive: prev.len() * 2,
                budget,
            });
        }
        let mut next = Vec::with_capacity(prev.len() * 2);
        for parent in prev {
            let keep = coins.children(parent, p);
            for digit in 0..=1u8 {
                if keep[digit as usize] {
                    next.push(parent.push(digit));
                }
            }
        }
        if keep_levels {
            levels.push(next);
        } else {
            levels = vec![next];
        }
    }
    Ok(levels)
}

/// Survivor set of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    /// Live paths at depth `n`, in tree orientation, sorted.
    pub survivors: Vec<Word>,
    /// Number of distinct intervals among the survivors.
    pub distinct_count: u64,
    pub extinct: bool,
}

fn distinct_values(paths: &[Word]) -> Result<usize, ArithError> {
    let mut seen = HashSet::with_capacity(paths.len());
    for w in paths {
        seen.insert(w.reversed().scaled_value()?);
    }
    Ok(seen.len())
}

pub fn run_trial(n: usize, p: f64, seed: u64) -> Result<SimulationOutcome, SimError> {
    let mut levels = grow(n, p, seed, false, MAX_ALIVE)?;
    let survivors = levels.pop().expect("final level");
    let distinct = distinct_values(&survivors)? as u64;
    Ok(SimulationOutcome {
        n,
        p,
        seed,
        extinct: survivors.is_empty(),
        distinct_count: distinct,
        survivors,
    })
}

/// All levels of one trial, level 0 being the root alone.
pub fn run_trial_levels(n: usize, p: f64, seed: u64) -> Result<Vec<Vec<Word>>, SimError> {
    grow(n, p, seed, true, MAX_ALIVE)
}

/// Every live node at level `k + 1` has its parent live at level `k`.
pub fn is_hereditary(levels: &[Vec<Word>]) -> bool {
    levels.windows(2).all(|pair| {
        let parents: HashSet<&Word> = pair[0].iter().collect();
        pair[1].iter().all(|w| parents.contains(&w.parent()))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean_distinct: f64,
    pub std_err: f64,
    pub extinction_freq: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

pub fn monte_carlo(n: usize, p: f64, trials: u64, seed: u64) -> Result<McSummary, SimError> {
    monte_carlo_with(n, p, trials, seed, Execution::Parallel)
}

/// Aggregates `trials` independent trials. Results are reduced in trial
/// order, so serial and parallel execution give identical summaries.
pub fn monte_carlo_with(
    n: usize,
    p: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<McSummary, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    check_p(p)?;
    let one = |i: u64| run_trial(n, p, trial_seed(seed, i)).map(|o| (o.distinct_count, o.extinct));
    let results: Vec<(u64, bool)> = match exec {
        Execution::Serial => (0..trials).map(one).collect::<Result<_, _>>()?,
        Execution::Parallel => (0..trials)
            .into_par_iter()
            .map(one)
            .collect::<Result<_, _>>()?,
    };
    let t = trials as f64;
    let mut sum = CompensatedSum::default();
    let mut extinct = 0u64;
    for &(d, e) in &results {
        sum.add(d as f64);
        extinct += e as u64;
    }
    let mean = sum.value() / t;
    let mut sq = CompensatedSum::default();
    for &(d, _) in &results {
        sq.add((d as f64 - mean).powi(2));
    }
    let std_err = if trials > 1 {
        (sq.value() / (t - 1.0)).sqrt() / t.sqrt()
    } else {
        0.0
    };
    Ok(McSummary {
        n,
        p,
        trials,
        seed,
        mean_distinct: mean,
        std_err,
        extinction_freq: extinct as f64 / t,
    })
}

/// `P(tree dead by depth n)` via `q₀ = 0`, `q_{k+1} = ((1 - p) + p·q_k)²`.
pub fn extinction_by_level(p: f64, n: usize) -> f64 {
    let mut q = 0.0;
    for _ in 0..n {
        q = ((1.0 - p) + p * q).powi(2);
    }
    q
}

/// Limit of [`extinction_by_level`]: 1 for `p ≤ 1/2`, else `((1 - p)/p)²`.
pub fn extinction_limit(p: f64) -> f64 {
    if p <= 0.5 {
        1.0
    } else {
        ((1.0 - p) / p).powi(2)
    }
}

pub const BANDS_MAX_DETERMINISTIC: usize = 16;
pub const BANDS_MAX_RANDOM: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandMode {
    Deterministic,
    Random { p: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandInterval {
    /// Greedy representative of the interval's class.
    pub word: Word,
    pub left: GoldenRational,
    pub right: GoldenRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandOverlap {
    pub c: Word,
    pub d: Word,
    pub left: GoldenRational,
    pub right: GoldenRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandLevel {
    pub level: usize,
    /// Distinct retained intervals, by left endpoint.
    pub intervals: Vec<BandInterval>,
    /// Positive-length intersections of pairs of distinct intervals.
    pub overlaps: Vec<BandOverlap>,
}

fn band_level(level: usize, reps: impl IntoIterator<Item = Word>) -> Result<BandLevel, SimError> {
    let mut intervals: Vec<(PhiInterval, Word)> = Vec::new();
    let mut seen = HashSet::new();
    for w in reps {
        let rep = w.normalize_to_greedy();
        if seen.insert(rep) {
            intervals.push((interval_of(&rep)?, rep));
        }
    }
    intervals.sort();
    let mut overlaps = Vec::new();
    for (i, (a, wa)) in intervals.iter().enumerate() {
        let a_right = a.right()?;
        for (b, wb) in &intervals[i + 1..] {
            // sorted by left endpoint: once b starts at or after a ends, stop
            if b.left.try_cmp(&a_right)?.is_ge() {
                break;
            }
            overlaps.push(BandOverlap {
                c: *wa,
                d: *wb,
                left: b.left,
                right: a_right.min(b.right()?)?,
            });
        }
    }
    Ok(BandLevel {
        level,
        intervals: intervals
            .into_iter()
            .map(|(iv, w)| {
                Ok(BandInterval {
                    word: w,
                    left: iv.left,
                    right: iv.right()?,
                })
            })
            .collect::<Result<_, ArithError>>()?,
        overlaps,
    })
}

/// Band data for levels `0..=n`, either every interval or one seeded realization.
pub fn emit_bands(n: usize, mode: BandMode) -> Result<Vec<BandLevel>, SimError> {
    match mode {
        BandMode::Deterministic => {
            if n > BANDS_MAX_DETERMINISTIC {
                return Err(SimError::DepthCap {
                    depth: n,
                    cap: BANDS_MAX_DETERMINISTIC,
                });
            }
            (0..=n)
                .map(|k| band_level(k, enumerate_greedy(k).expect("k ≤ 16")))
                .collect()
        }
        BandMode::Random { p, seed } => {
            if n > BANDS_MAX_RANDOM {
                return Err(SimError::DepthCap {
                    depth: n,
                    cap: BANDS_MAX_RANDOM,
                });
            }
            run_trial_levels(n, p, seed)?
                .into_iter()
                .enumerate()
                .map(|(k, paths)| band_level(k, paths.iter().map(Word::reversed)))
                .collect()
        }
    }
}

/// One row of the bands CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandRow {
    pub level: usize,
    /// Greedy word, or `c|d` for an overlap row.
    pub word: String,
    pub left_a: i128,
    pub left_b: i128,
    pub left_scale: u32,
    /// `interval` or `overlap`.
    pub kind: String,
    pub right_a: i128,
    pub right_b: i128,
    pub right_scale: u32,
}

pub fn band_rows(levels: &[BandLevel]) -> Vec<BandRow> {
    let row = |level, word: String, kind: &str, l: &GoldenRational, r: &GoldenRational| BandRow {
        level,
        word,
        left_a: l.num().a,
        left_b: l.num().b,
        left_scale: l.scale(),
        kind: kind.to_string(),
        right_a: r.num().a,
        right_b: r.num().b,
        right_scale: r.scale(),
    };
    let mut rows = Vec::new();
    for lv in levels {
        for iv in &lv.intervals {
            rows.push(row(lv.level, iv.word.to_string(), "interval", &iv.left, &iv.right));
        }
        for ov in &lv.overlaps {
            rows.push(row(lv.level, format!("{}|{}", ov.c, ov.d), "overlap", &ov.left, &ov.right));
        }
    }
    rows
}

pub fn write_bands_csv<W: io::Write>(levels: &[BandLevel], out: W) -> Result<(), SimError> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in band_rows(levels) {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::fibonacci;

    #[test]
    fn full_retention_keeps_everything() {
        let o = run_trial(6, 1.0, 9).unwrap();
        assert_eq!(o.survivors.len(), 64);
        assert_eq!(o.distinct_count as u128, fibonacci(9).unwrap() - 1);
        assert!(!o.extinct);
    }

    #[test]
    fn zero_retention_dies_at_once() {
        let levels = run_trial_levels(4, 0.0, 1).unwrap();
        assert!(levels[1..].iter().all(Vec::is_empty));
        let o = run_trial(4, 0.0, 1).unwrap();
        assert!(o.extinct);
        assert_eq!(o.distinct_count, 0);
    }

    #[test]
    fn small_trial_in_range() {
        let o = run_trial(3, 0.7, 42).unwrap();
        assert!(o.distinct_count <= 7);
        assert!(o.distinct_count as usize <= o.survivors.len());
        assert_eq!(o, run_trial(3, 0.7, 42).unwrap());
    }

    #[test]
    fn trials_are_hereditary() {
        for seed in 0..20 {
            let levels = run_trial_levels(12, 0.75, seed).unwrap();
            assert!(is_hereditary(&levels));
        }
    }

    #[test]
    fn deterministic_summary() {
        let s = monte_carlo(2, 1.0, 10, 5).unwrap();
        assert_eq!(s.mean_distinct, 4.0);
        assert_eq!(s.std_err, 0.0);
        assert_eq!(s.extinction_freq, 0.0);
        assert!(matches!(monte_carlo(2, 1.0, 0, 5), Err(SimError::NoTrials)));
        assert!(matches!(monte_carlo(2, 1.2, 1, 5), Err(SimError::BadProbability(_))));
    }

    #[test]
    fn extinction_iteration() {
        assert_eq!(extinction_by_level(0.0, 1), 1.0);
        assert!((0..50).all(|n| extinction_by_level(1.0, n) == 0.0));
        assert!(extinction_by_level(0.45, 40) >= 0.99);
        assert_eq!(extinction_limit(0.4), 1.0);
    }

    #[test]
    fn caps() {
        assert!(matches!(run_trial(64, 0.5, 0), Err(SimError::DepthCap { .. })));
        assert!(matches!(grow(12, 1.0, 0, false, 1 << 10), Err(SimError::NodeBudget { level: 11, .. })));
        assert!(grow(12, 0.0, 0, false, 1 << 10).is_ok());
        assert!(matches!(emit_bands(17, BandMode::Deterministic), Err(SimError::DepthCap { .. })));
    }

    #[test]
    fn deterministic_bands_level_two() {
        let bands = emit_bands(2, BandMode::Deterministic).unwrap();
        assert_eq!(bands.len(), 3);
        assert_eq!(bands[0].intervals.len(), 1);
        assert_eq!(bands[2].intervals.len(), 4);
        assert_eq!(bands[2].overlaps.len(), 3);
        assert_eq!(bands[1].overlaps.len(), 1);
    }

    #[test]
    fn random_bands_without_retention() {
        let bands = emit_bands(3, BandMode::Random { p: 0.0, seed: 3 }).unwrap();
        assert_eq!(bands[0].intervals.len(), 1);
        assert!(bands[1..].iter().all(|b| b.intervals.is_empty() && b.overlaps.is_empty()));
    }
}
