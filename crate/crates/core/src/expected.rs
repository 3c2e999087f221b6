//! Expected survivor counts and the expected-dimension law.
//!
//! `E_n(p) = Σ_[c] 1 - (1 - pⁿ)^{#[c]}` is evaluated from the multiplicity
//! histogram. [`expected_count_tree`] computes the exact expectation of the
//! number of distinct surviving intervals in the retention tree, where
//! members of one class that share tree ancestors survive together more
//! often than the independent product assumes.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::{ClassError, MultiplicityHistogram, OracleTable};
use crate::words::{fibonacci, Word};
use crate::PHI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpectedError {
    #[error("histogram is for level {found}, expected level {expected}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("base q = {0} is below 2; the closed form needs the open set condition")]
    BaseBelowTwo(f64),
    #[error("expected count {0} is not positive; the dimension estimate is undefined")]
    NonPositiveCount(f64),
    #[error("level {0} below the minimum of 3 for the recursion check")]
    LevelTooSmall(usize),
    #[error("missing histogram for level {0}")]
    MissingHistogram(usize),
    #[error(transparent)]
    Class(#[from] ClassError),
}

fn check_p(p: f64) -> Result<(), ExpectedError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ExpectedError::BadProbability(p))
    }
}

/// Neumaier-compensated sum.
#[derive(Default, Clone, Copy, Debug)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `1 - (1 - x)^m` without cancellation for small `x`.
fn at_least_one(x: f64, m: u64) -> f64 {
    if x >= 1.0 {
        return if m > 0 { 1.0 } else { 0.0 };
    }
    -((m as f64) * (-x).ln_1p()).exp_m1()
}

/// `E_n(p) = Σ_m N_n(m)·(1 - (1 - pⁿ)^m)`.
pub fn expected_count_paper(
    n: usize,
    p: f64,
    hist: &MultiplicityHistogram,
) -> Result<f64, ExpectedError> {
    if hist.n != n {
        return Err(ExpectedError::LevelMismatch {
            expected: n,
            found: hist.n,
        });
    }
    check_p(p)?;
    let x = p.powi(n as i32);
    let mut acc = CompensatedSum::default();
    for (&m, &count) in &hist.counts {
        acc.add(count as f64 * at_least_one(x, m));
    }
    Ok(acc.value())
}

pub const TREE_MAX_LEN: usize = 16;

/// Probability that at least one of `paths` survives, by inclusion–exclusion.
/// Only for small sets (fewer than 32 paths); see [`union_survival`].
///
/// `paths` are words in retention-tree orientation: a path survives iff every
/// one of its non-empty prefixes is retained, and `P(all of S survive)` is
/// `p^{#distinct non-empty prefixes over S}`.
pub fn union_survival_inclusion_exclusion(paths: &[Word], p: f64) -> f64 {
    let k = paths.len();
    assert!(k < 32, "class too large for subset enumeration");
    let mut acc = CompensatedSum::default();
    let mut nodes: HashSet<Word> = HashSet::new();
    for subset in 1u32..(1 << k) {
        nodes.clear();
        for (i, path) in paths.iter().enumerate() {
            if subset & (1 << i) != 0 {
                for len in 1..=path.len() {
                    nodes.insert(path.prefix(len));
                }
            }
        }
        let term = p.powi(nodes.len() as i32);
        if subset.count_ones() % 2 == 1 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    acc.value()
}

/// Probability that at least one of `paths` survives, by recursion over the
/// trie of the paths. Equal to [`union_survival_inclusion_exclusion`] but
/// linear in the trie size, so it handles classes of any size.
///
/// All paths must have the same length.
pub fn union_survival(paths: &[Word], p: f64) -> f64 {
    let mut sorted = paths.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    match sorted.first() {
        None => 0.0,
        Some(first) => reach(&sorted, 0, first.len(), p),
    }
}

/// `P(some path below a retained node at depth `depth` survives)`; `paths`
/// is sorted and shares its first `depth` digits.
fn reach(paths: &[Word], depth: usize, n: usize, p: f64) -> f64 {
    if depth == n {
        return 1.0;
    }
    let split = paths.partition_point(|w| w.digit(depth) == 0);
    // 1 - Π(1 - tᵢ), accumulated without cancellation.
    let mut q = 0.0;
    for group in [&paths[..split], &paths[split..]] {
        if !group.is_empty() {
            let t = p * reach(group, depth + 1, n, p);
            q = q + t - q * t;
        }
    }
    q
}

/// Exact expected number of distinct surviving intervals at level `n`
/// (`n ≤ 16`), summing the union-survival probability of each class.
pub fn expected_count_tree(n: usize, p: f64) -> Result<f64, ExpectedError> {
    check_p(p)?;
    if n > TREE_MAX_LEN {
        return Err(ClassError::LengthCap {
            len: n,
            cap: TREE_MAX_LEN,
        }
        .into());
    }
    let mut acc = CompensatedSum::default();
    for members in class_tree_paths(n)? {
        acc.add(union_survival(&members, p));
    }
    Ok(acc.value())
}

/// Every class of level `n` as its members' retention-tree paths.
pub fn class_tree_paths(n: usize) -> Result<Vec<Vec<Word>>, ExpectedError> {
    let table = OracleTable::build(n)?;
    let mut seen = HashSet::new();
    let mut classes = Vec::new();
    for bits in 0u64..(1 << n) {
        let w = Word::from_bits(bits, n).map_err(ClassError::from)?;
        let rep = w.normalize_to_greedy();
        if seen.insert(rep) {
            let members = table.members(&rep)?;
            classes.push(members.iter().map(Word::reversed).collect());
        }
    }
    Ok(classes)
}

/// Expected dimension of the random Cantor set with ratio `1/φ`:
/// 0 up to `p = 1/2`, `log(2p)/log φ` up to `p = φ/2`, then 1.
pub fn dimension_formula(p: f64) -> Result<f64, ExpectedError> {
    check_p(p)?;
    Ok(if p <= 0.5 {
        0.0
    } else {
        ((2.0 * p).ln() / PHI.ln()).min(1.0)
    })
}

/// The same law for ratio `1/q` with `q ≥ 2`: 0 up to `1/2`, then `log(2p)/log q`.
pub fn dimension_formula_osc(p: f64, q: f64) -> Result<f64, ExpectedError> {
    check_p(p)?;
    if q.is_nan() || q < 2.0 {
        return Err(ExpectedError::BaseBelowTwo(q));
    }
    Ok(if p <= 0.5 { 0.0 } else { (2.0 * p).ln() / q.ln() })
}

/// Finite-level estimate `log E_n(p) / (n log φ)`.
pub fn dimension_estimate(
    n: usize,
    p: f64,
    hist: &MultiplicityHistogram,
) -> Result<f64, ExpectedError> {
    let e = expected_count_paper(n, p, hist)?;
    if e <= 0.0 || n == 0 {
        return Err(ExpectedError::NonPositiveCount(e));
    }
    Ok(e.ln() / (n as f64 * PHI.ln()))
}

/// One sample of an expected-count curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub p: f64,
    pub e_paper: f64,
    pub e_tree: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCurve {
    pub n: usize,
    pub samples: Vec<CurveSample>,
}

impl ExpectedCurve {
    pub fn evaluate(
        n: usize,
        grid: &[f64],
        hist: &MultiplicityHistogram,
        with_tree: bool,
    ) -> Result<ExpectedCurve, ExpectedError> {
        let samples = grid
            .iter()
            .map(|&p| {
                Ok(CurveSample {
                    p,
                    e_paper: expected_count_paper(n, p, hist)?,
                    e_tree: if with_tree {
                        Some(expected_count_tree(n, p)?)
                    } else {
                        None
                    },
                })
            })
            .collect::<Result<Vec<_>, ExpectedError>>()?;
        Ok(ExpectedCurve { n, samples })
    }
}

/// `{0.50, 0.55, …, 1.00}` plus `φ/2`, sorted.
pub fn default_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect();
    g.push(PHI / 2.0);
    g.sort_by(f64::total_cmp);
    g
}

/// Relative slack allowed for floating rounding in bound checks.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    /// `E_n(p) ≤ min{(2p)ⁿ, F_{n+3} - 1}`.
    Upper,
    /// `E_n(p) ≥ E_{n-1}(p^{n/(n-1)}) + E_{n-2}(p^{n/(n-2)}) + 2^{n-2}pⁿ(1 - pⁿ)`.
    Recursion,
    /// `E_n(p) ≥ (2^{n-1} - 2)/2ⁿ · min{2ⁿpⁿ, φⁿ}` for `p ∈ [1/2, 1]`.
    FinalLower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub p: f64,
    pub e_n: f64,
    pub upper: f64,
    pub upper_margin: f64,
    pub recursion_rhs: f64,
    pub recursion_margin: f64,
    pub final_lower: Option<f64>,
    pub final_margin: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub p: f64,
    pub bound: Bound,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub rows: Vec<BoundsRow>,
    pub violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations_of(&self, bound: Bound) -> impl Iterator<Item = &BoundViolation> {
        self.violations.iter().filter(move |v| v.bound == bound)
    }
}

fn hist_at(hists: &[MultiplicityHistogram], level: usize) -> Result<&MultiplicityHistogram, ExpectedError> {
    hists
        .iter()
        .find(|h| h.n == level)
        .ok_or(ExpectedError::MissingHistogram(level))
}

/// Evaluates the upper bound, the two-step recursion and the final lower
/// bound at every `p` in `grid`. Margins are `larger - smaller` so that a
/// holding relation has a non-negative margin.
pub fn check_recursion_bounds(
    n: usize,
    grid: &[f64],
    hists: &[MultiplicityHistogram],
) -> Result<BoundsReport, ExpectedError> {
    if n < 3 {
        return Err(ExpectedError::LevelTooSmall(n));
    }
    let (h0, h1, h2) = (hist_at(hists, n)?, hist_at(hists, n - 1)?, hist_at(hists, n - 2)?);
    let classes = (fibonacci(n as u32 + 3).map_err(ClassError::from)? - 1) as f64;
    let nf = n as f64;
    let mut report = BoundsReport {
        n,
        rows: Vec::new(),
        violations: Vec::new(),
    };
    for &p in grid {
        check_p(p)?;
        let e_n = expected_count_paper(n, p, h0)?;
        let pn = p.powi(n as i32);
        let upper = (2.0 * p).powi(n as i32).min(classes);
        let recursion_rhs = expected_count_paper(n - 1, p.powf(nf / (nf - 1.0)), h1)?
            + expected_count_paper(n - 2, p.powf(nf / (nf - 2.0)), h2)?
            + 2f64.powi(n as i32 - 2) * pn * (1.0 - pn);
        let final_lower = (p >= 0.5).then(|| {
            (2f64.powi(n as i32 - 1) - 2.0) / 2f64.powi(n as i32)
                * (2f64.powi(n as i32) * pn).min(PHI.powi(n as i32))
        });
        let row = BoundsRow {
            p,
            e_n,
            upper,
            upper_margin: upper - e_n,
            recursion_rhs,
            recursion_margin: e_n - recursion_rhs,
            final_lower,
            final_margin: final_lower.map(|b| e_n - b),
        };
        let tol = BOUND_TOLERANCE * e_n.abs().max(1.0);
        let mut flag = |bound, margin: f64| {
            if margin < -tol {
                report.violations.push(BoundViolation { p, bound, margin });
            }
        };
        flag(Bound::Upper, row.upper_margin);
        flag(Bound::Recursion, row.recursion_margin);
        if let Some(m) = row.final_margin {
            flag(Bound::FinalLower, m);
        }
        report.rows.push(row);
    }
    Ok(report)
}
