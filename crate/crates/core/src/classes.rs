//! Classes of equal-value words and their sizes.
//!
//! Two words of length `n` are equivalent when they have the same base-φ
//! value (equivalently, the same interval `I_c`). Each class is represented
//! by its greedy word. The class size `#[c]` is computed two ways:
//!
//! - [`OracleTable`]: exhaustive bucketing of `{0,1}ⁿ` by exact value.
//! - [`multiplicity`]: a digit DP over the scaled running difference
//!   between `c` and a candidate word `d`, which never enumerates `{0,1}ⁿ`.
//!
//! The histogram `N_n(m)` (number of classes of size `m`) is what the
//! expected-survivor formulas consume.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::golden::{ArithError, GoldenInt};
use crate::words::{enumerate_greedy, GreedyState, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("length {len} exceeds the cap of {cap} for this operation")]
    LengthCap { len: usize, cap: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Word(#[from] WordError),
}

pub const ORACLE_MAX_LEN: usize = 20;
pub const DP_MAX_LEN: usize = 60;
pub const HISTOGRAM_MAX_LEN: usize = 30;

fn cap(len: usize, cap: usize) -> Result<(), ClassError> {
    if len > cap {
        Err(ClassError::LengthCap { len, cap })
    } else {
        Ok(())
    }
}

/// A greedy representative with its class size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub rep: Word,
    pub multiplicity: u64,
    /// Filled in only by the exhaustive oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Word>>,
}

/// All words of one length, bucketed by exact value.
pub struct OracleTable {
    n: usize,
    buckets: HashMap<GoldenInt, Vec<Word>>,
}

impl OracleTable {
    pub fn build(n: usize) -> Result<OracleTable, ClassError> {
        cap(n, ORACLE_MAX_LEN)?;
        let mut buckets: HashMap<GoldenInt, Vec<Word>> = HashMap::new();
        for bits in 0u64..(1u64 << n) {
            let w = Word::from_bits(bits, n)?;
            buckets.entry(w.scaled_value()?).or_default().push(w);
        }
        Ok(OracleTable { n, buckets })
    }

    pub fn level(&self) -> usize {
        self.n
    }

    /// Members of the class of `w`, in lexicographic order.
    pub fn members(&self, w: &Word) -> Result<&[Word], ClassError> {
        if w.len() != self.n {
            return Err(ClassError::LengthCap {
                len: w.len(),
                cap: self.n,
            });
        }
        let v = w.scaled_value()?;
        Ok(self.buckets.get(&v).map(Vec::as_slice).unwrap_or(&[]))
    }

    pub fn record(&self, w: &Word) -> Result<ClassRecord, ClassError> {
        let members = self.members(w)?.to_vec();
        Ok(ClassRecord {
            rep: w.normalize_to_greedy(),
            multiplicity: members.len() as u64,
            members: Some(members),
        })
    }

    pub fn class_count(&self) -> usize {
        self.buckets.len()
    }
}

/// Brute-force class of `w` over all of `{0,1}^{|w|}`.
pub fn class_members_oracle(w: &Word) -> Result<ClassRecord, ClassError> {
    OracleTable::build(w.len())?.record(w)
}

/// Reachable scaled differences `(val(c₁…cᵢ) - val(d₁…dᵢ))·φⁱ` with the number
/// of prefixes `d` reaching each.
///
/// Only differences with `|D| < φ` are kept: the remaining digits can change
/// the scaled difference by at most `Σ_{j≥1} φ^{-j} = φ`, strictly less for a
/// finite tail, so any other state can never return to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffStates(Vec<(GoldenInt, u64)>);

impl Default for DiffStates {
    fn default() -> Self {
        DiffStates::start()
    }
}

impl DiffStates {
    pub fn start() -> DiffStates {
        DiffStates(vec![(GoldenInt::ZERO, 1)])
    }

    pub fn step(&self, digit: u8) -> Result<DiffStates, ArithError> {
        let mut next: Vec<(GoldenInt, u64)> = Vec::with_capacity(self.0.len() * 2);
        for &(d, count) in &self.0 {
            let base = d.mul_phi()?;
            for other in 0..=1u8 {
                let delta = GoldenInt::from_int(digit as i128 - other as i128);
                let nd = base.checked_add(delta)?;
                if GoldenInt::PHI.checked_sub(nd)?.signum() > 0
                    && nd.checked_add(GoldenInt::PHI)?.signum() > 0
                {
                    next.push((nd, count));
                }
            }
        }
        next.sort_unstable_by_key(|(d, _)| (d.a, d.b));
        let mut merged: Vec<(GoldenInt, u64)> = Vec::with_capacity(next.len());
        for (d, c) in next {
            match merged.last_mut() {
                Some((ld, lc)) if *ld == d => *lc += c,
                _ => merged.push((d, c)),
            }
        }
        Ok(DiffStates(merged))
    }

    /// Number of completed words with zero difference.
    pub fn zero_count(&self) -> u64 {
        self.0
            .iter()
            .find(|(d, _)| d.is_zero())
            .map_or(0, |&(_, c)| c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `#[w]`: the number of words of length `|w|` with the same value as `w`.
pub fn multiplicity(w: &Word) -> Result<u64, ClassError> {
    cap(w.len(), DP_MAX_LEN)?;
    let mut states = DiffStates::start();
    for d in w.digits() {
        states = states.step(d)?;
    }
    Ok(states.zero_count())
}

// Greedy prefixes of length `depth` with their DP states, in lexicographic order.
fn frontier(depth: usize) -> Result<Vec<(Word, GreedyState, DiffStates)>, ClassError> {
    let mut level = vec![(Word::EMPTY, GreedyState::START, DiffStates::start())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (w, s, dp) in &level {
            for digit in 0..=1u8 {
                if let Some(ns) = s.step(digit) {
                    next.push((w.push(digit), ns, dp.step(digit)?));
                }
            }
        }
        level = next;
    }
    Ok(level)
}

fn walk<F: FnMut(Word, u64)>(
    n: usize,
    w: Word,
    state: GreedyState,
    dp: &DiffStates,
    visit: &mut F,
) -> Result<(), ArithError> {
    if w.len() == n {
        visit(w, dp.zero_count());
        return Ok(());
    }
    for digit in 0..=1u8 {
        if let Some(ns) = state.step(digit) {
            let next = dp.step(digit)?;
            walk(n, w.push(digit), ns, &next, visit)?;
        }
    }
    Ok(())
}

/// Depth of the prefix split used to parallelise trie walks.
const SPLIT_DEPTH: usize = 12;

/// Class sizes of every greedy word of length `n`, in lexicographic order.
///
/// The DP state is shared along common prefixes of the greedy trie.
pub fn level_multiplicities(n: usize) -> Result<Vec<ClassRecord>, ClassError> {
    cap(n, HISTOGRAM_MAX_LEN)?;
    let roots = frontier(n.min(SPLIT_DEPTH))?;
    let chunks: Result<Vec<Vec<ClassRecord>>, ArithError> = roots
        .par_iter()
        .map(|(w, s, dp)| {
            let mut out = Vec::new();
            walk(n, *w, *s, dp, &mut |rep, m| {
                out.push(ClassRecord {
                    rep,
                    multiplicity: m,
                    members: None,
                })
            })?;
            Ok(out)
        })
        .collect();
    Ok(chunks?.into_iter().flatten().collect())
}

/// `N_n(m)`: how many classes of level `n` have size `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityHistogram {
    pub n: usize,
    pub counts: BTreeMap<u64, u64>,
}

impl MultiplicityHistogram {
    pub fn from_multiplicities(n: usize, ms: impl IntoIterator<Item = u64>) -> Self {
        let mut counts = BTreeMap::new();
        for m in ms {
            *counts.entry(m).or_insert(0) += 1;
        }
        MultiplicityHistogram { n, counts }
    }

    /// `Σ_m N_n(m)`, the number of classes.
    pub fn total_classes(&self) -> u128 {
        self.counts.values().map(|&c| c as u128).sum()
    }

    /// `Σ_m m·N_n(m)`, the number of words.
    pub fn total_words(&self) -> u128 {
        self.counts.iter().map(|(&m, &c)| m as u128 * c as u128).sum()
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

/// The multiplicity histogram of level `n` (`n ≤ 30`).
pub fn histogram(n: usize) -> Result<MultiplicityHistogram, ClassError> {
    cap(n, HISTOGRAM_MAX_LEN)?;
    let roots = frontier(n.min(SPLIT_DEPTH))?;
    let parts: Result<Vec<BTreeMap<u64, u64>>, ArithError> = roots
        .par_iter()
        .map(|(w, s, dp)| {
            let mut local = BTreeMap::new();
            walk(n, *w, *s, dp, &mut |_, m| *local.entry(m).or_insert(0u64) += 1)?;
            Ok(local)
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in parts? {
        for (m, c) in part {
            *counts.entry(m).or_insert(0) += c;
        }
    }
    Ok(MultiplicityHistogram { n, counts })
}

/// Histograms for every level `0..=max_n`, indexed by level.
pub fn histogram_family(max_n: usize) -> Result<Vec<MultiplicityHistogram>, ClassError> {
    (0..=max_n).map(histogram).collect()
}

/// Histogram straight from the oracle (`n ≤ 20`).
pub fn histogram_oracle(n: usize) -> Result<MultiplicityHistogram, ClassError> {
    let table = OracleTable::build(n)?;
    Ok(MultiplicityHistogram::from_multiplicities(
        n,
        table.buckets.values().map(|v| v.len() as u64),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Oracle,
    Dp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prop2Relation {
    /// `c1` greedy ending in `1`: `#[c1] = #[c]`.
    AppendOne,
    /// `c0` greedy ending in `10`: `#[c0] = #[c]`.
    AppendZeroAfterOne,
    /// `c` nonzero greedy: `#[c00] ≥ #[c] + 1`.
    AppendZeroZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop2Violation {
    pub relation: Prop2Relation,
    pub extended: Word,
    pub base: Word,
    pub extended_multiplicity: u64,
    pub base_multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub n: usize,
    pub backend: Backend,
    /// Number of instances checked for each of the three relations.
    pub checked: [u64; 3],
    pub violations: Vec<Prop2Violation>,
}

impl Prop2Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn multiplicity_table(level: usize, backend: Backend) -> Result<HashMap<Word, u64>, ClassError> {
    match backend {
        Backend::Dp => Ok(level_multiplicities(level)?
            .into_iter()
            .map(|r| (r.rep, r.multiplicity))
            .collect()),
        Backend::Oracle => {
            let table = OracleTable::build(level)?;
            enumerate_greedy(level)?
                .map(|w| Ok((w, table.members(&w)?.len() as u64)))
                .collect()
        }
    }
}

/// Checks the three class-size relations over every greedy word whose
/// extended form has length at most `n`.
pub fn check_prop2(n: usize, backend: Backend) -> Result<Prop2Report, ClassError> {
    cap(
        n,
        match backend {
            Backend::Oracle => ORACLE_MAX_LEN,
            Backend::Dp => HISTOGRAM_MAX_LEN,
        },
    )?;
    let tables = (0..=n)
        .map(|k| multiplicity_table(k, backend))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Prop2Report {
        n,
        backend,
        checked: [0; 3],
        violations: Vec::new(),
    };
    for (k, table) in tables.iter().enumerate().skip(1) {
        let mut words: Vec<&Word> = table.keys().collect();
        words.sort();
        for &x in words {
            let mx = table[&x];
            let parent = x.parent();
            let mut check = |relation: Prop2Relation, base: Word, ok: fn(u64, u64) -> bool| {
                let mb = tables[base.len()][&base];
                let idx = relation as usize;
                report.checked[idx] += 1;
                if !ok(mx, mb) {
                    report.violations.push(Prop2Violation {
                        relation,
                        extended: x,
                        base,
                        extended_multiplicity: mx,
                        base_multiplicity: mb,
                    });
                }
            };
            if x.last() == Some(1) {
                check(Prop2Relation::AppendOne, parent, |a, b| a == b);
            } else if k >= 2 && x.digit(k - 2) == 1 {
                check(Prop2Relation::AppendZeroAfterOne, parent, |a, b| a == b);
            } else if k >= 2 {
                let base = x.prefix(k - 2);
                if base.bits() != 0 {
                    check(Prop2Relation::AppendZeroZero, base, |a, b| a > b);
                }
            }
        }
    }
    Ok(report)
}
