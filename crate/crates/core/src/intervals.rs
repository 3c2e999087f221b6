//! The level-`n` intervals `I_c = [val(c), val(c) + φ^{-(n-1)}]` and their
//! pairwise intersections.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::golden::{ArithError, GoldenRational};
use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("intervals of different levels ({0} and {1})")]
    LevelMismatch(u32, u32),
    #[error("words of different lengths in one set")]
    MixedLengths,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A closed interval of level `n`: left endpoint plus the fixed length
/// `φ^{-(n-1)}`. Level 0 is the whole attractor `[0, φ]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhiInterval {
    pub level: u32,
    pub left: GoldenRational,
}

/// `φ^{1-n}` for any level, including `n = 0`.
pub fn level_length(level: u32) -> Result<GoldenRational, ArithError> {
    if level == 0 {
        Ok(GoldenRational::from_golden_int(crate::GoldenInt::PHI))
    } else {
        GoldenRational::phi_inv_pow(level - 1)
    }
}

impl PhiInterval {
    pub fn length(&self) -> Result<GoldenRational, ArithError> {
        level_length(self.level)
    }

    pub fn right(&self) -> Result<GoldenRational, ArithError> {
        self.left.checked_add(self.length()?)
    }
}

/// `I_w` for a word in value orientation (most significant digit first).
/// Words from the retention tree must be reversed first.
pub fn interval_of(w: &Word) -> Result<PhiInterval, ArithError> {
    Ok(PhiInterval {
        level: w.len() as u32,
        left: w.value_of()?,
    })
}

/// Exact length of `x ∩ y` (zero when they are disjoint or touch in a point).
pub fn intersection_length(x: &PhiInterval, y: &PhiInterval) -> Result<GoldenRational, IntervalError> {
    Ok(intersection(x, y)?.map_or(GoldenRational::ZERO, |(l, r)| {
        r.checked_sub(l).expect("intersection endpoints are bounded")
    }))
}

/// `x ∩ y` as `(left, right)` when it has positive length.
pub fn intersection(
    x: &PhiInterval,
    y: &PhiInterval,
) -> Result<Option<(GoldenRational, GoldenRational)>, IntervalError> {
    if x.level != y.level {
        return Err(IntervalError::LevelMismatch(x.level, y.level));
    }
    let left = x.left.max(y.left)?;
    let right = x.right()?.min(y.right()?)?;
    Ok(if right.try_cmp(&left)?.is_gt() {
        Some((left, right))
    } else {
        None
    })
}

/// The four possible same-level intersection lengths at level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpectrumValue {
    Zero,
    /// `φ^{-(n+1)}`
    NPlusOne,
    /// `φ^{-n}`
    N,
    /// `φ^{-(n-1)}`: the intervals coincide.
    NMinusOne,
}

pub fn classify_length(len: &GoldenRational, level: u32) -> Result<Option<SpectrumValue>, ArithError> {
    let candidates = [
        (SpectrumValue::Zero, GoldenRational::ZERO),
        (SpectrumValue::NPlusOne, GoldenRational::phi_inv_pow(level + 1)?),
        (SpectrumValue::N, GoldenRational::phi_inv_pow(level)?),
        (SpectrumValue::NMinusOne, level_length(level)?),
    ];
    Ok(candidates
        .into_iter()
        .find(|(_, v)| v == len)
        .map(|(s, _)| s))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumViolation {
    pub c: Word,
    pub d: Word,
    pub length: GoldenRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: u32,
    pub pairs: u64,
    pub counts: BTreeMap<SpectrumValue, u64>,
    pub violations: Vec<SpectrumViolation>,
}

impl SpectrumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const SPECTRUM_MAX_LEVEL: u32 = 10;

/// Classifies `|I_c ∩ I_d|` for every pair of distinct words `c ≠ d` in `{0,1}ⁿ`.
pub fn verify_intersection_spectrum(n: u32) -> Result<SpectrumReport, IntervalError> {
    assert!(
        (1..=SPECTRUM_MAX_LEVEL).contains(&n),
        "spectrum check supports levels 1..={SPECTRUM_MAX_LEVEL}"
    );
    let words: Vec<Word> = (0u64..1 << n)
        .map(|b| Word::from_bits(b, n as usize).expect("n ≤ 10"))
        .collect();
    let intervals = words
        .iter()
        .map(interval_of)
        .collect::<Result<Vec<_>, _>>()?;
    type Partial = (BTreeMap<SpectrumValue, u64>, Vec<SpectrumViolation>, u64);
    let parts: Result<Vec<Partial>, IntervalError> = (0..words.len())
        .into_par_iter()
        .map(|i| {
            let mut counts = BTreeMap::new();
            let mut violations = Vec::new();
            let mut pairs = 0;
            for j in i + 1..words.len() {
                let len = intersection_length(&intervals[i], &intervals[j])?;
                pairs += 1;
                match classify_length(&len, n)? {
                    Some(s) => *counts.entry(s).or_insert(0) += 1,
                    None => violations.push(SpectrumViolation {
                        c: words[i],
                        d: words[j],
                        length: len,
                    }),
                }
            }
            Ok((counts, violations, pairs))
        })
        .collect();
    let mut report = SpectrumReport {
        n,
        pairs: 0,
        counts: BTreeMap::new(),
        violations: Vec::new(),
    };
    for (counts, violations, pairs) in parts? {
        report.pairs += pairs;
        for (k, v) in counts {
            *report.counts.entry(k).or_insert(0) += v;
        }
        report.violations.extend(violations);
    }
    Ok(report)
}

/// Deduplicates by exact left endpoint. The result is sorted by left endpoint.
pub fn distinct_intervals<'a>(
    words: impl IntoIterator<Item = &'a Word>,
) -> Result<Vec<PhiInterval>, IntervalError> {
    let mut level = None;
    let mut out = std::collections::BTreeSet::new();
    for w in words {
        match level {
            None => level = Some(w.len()),
            Some(l) if l != w.len() => return Err(IntervalError::MixedLengths),
            _ => {}
        }
        out.insert(interval_of(w)?);
    }
    Ok(out.into_iter().collect())
}
