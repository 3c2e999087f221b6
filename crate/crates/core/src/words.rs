//! Finite binary words and their base-φ values.
//!
//! A [`Word`] is stored most-significant digit first, so `c₁c₂…cₙ` has value
//! `Σ cᵢ φ^{-i}`. The IFS composition order reverses the digits; that
//! reversal happens only at the simulator boundary ([`Word::reversed`]).
//!
//! Greedy words are exactly the words without the factor `011`. They are
//! recognised by a three-state automaton ([`GreedyState`]) which drives both
//! enumeration and transfer-matrix counting.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::golden::{ArithError, GoldenInt, GoldenRational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("word longer than {max} digits", max = Word::MAX_LEN)]
    TooLong,
    #[error("invalid digit {0:?}: words are strings of 0 and 1")]
    InvalidDigit(char),
    #[error("word {0} is not greedy (contains 011)")]
    NotGreedy(Word),
}

/// A binary word of explicit length `≤ 64`.
///
/// Ordering is by length, then lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    // digit i (0-based, most significant first) lives at bit len-1-i
    bits: u64,
}

fn low_mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Word {
    pub const MAX_LEN: usize = 64;

    pub const EMPTY: Word = Word { len: 0, bits: 0 };

    /// Builds a word from its digits packed most-significant first in `bits`.
    pub fn from_bits(bits: u64, len: usize) -> Result<Word, WordError> {
        if len > Self::MAX_LEN {
            return Err(WordError::TooLong);
        }
        Ok(Word {
            len: len as u8,
            bits: bits & low_mask(len as u32),
        })
    }

    pub fn zeros(len: usize) -> Result<Word, WordError> {
        Word::from_bits(0, len)
    }

    pub fn from_digits(digits: &[u8]) -> Result<Word, WordError> {
        if digits.len() > Self::MAX_LEN {
            return Err(WordError::TooLong);
        }
        let mut w = Word::EMPTY;
        for &d in digits {
            w = w.push(d & 1);
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Digit at 0-based position `i`, counting from the most significant end.
    pub fn digit(&self, i: usize) -> u8 {
        assert!(i < self.len(), "digit index out of range");
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.digit(i))
    }

    pub fn last(&self) -> Option<u8> {
        if self.len == 0 {
            None
        } else {
            Some((self.bits & 1) as u8)
        }
    }

    /// Appends one digit. Panics if the word already has [`Word::MAX_LEN`] digits.
    pub fn push(self, digit: u8) -> Word {
        assert!(self.len() < Self::MAX_LEN, "word length limit exceeded");
        Word {
            len: self.len + 1,
            bits: (self.bits << 1) | (digit & 1) as u64,
        }
    }

    pub fn concat(self, tail: Word) -> Result<Word, WordError> {
        if self.len() + tail.len() > Self::MAX_LEN {
            return Err(WordError::TooLong);
        }
        let bits = if tail.len == 64 { 0 } else { self.bits << tail.len };
        Ok(Word {
            len: self.len + tail.len,
            bits: bits | tail.bits,
        })
    }

    /// The first `k` digits.
    pub fn prefix(&self, k: usize) -> Word {
        assert!(k <= self.len());
        let bits = if k == 0 { 0 } else { self.bits >> (self.len() - k) };
        Word { len: k as u8, bits }
    }

    /// The word without its last digit (empty stays empty).
    pub fn parent(&self) -> Word {
        self.prefix(self.len().saturating_sub(1))
    }

    pub fn reversed(&self) -> Word {
        let n = self.len();
        let bits = if n == 0 {
            0
        } else {
            self.bits.reverse_bits() >> (64 - n)
        };
        Word { len: self.len, bits }
    }

    fn pattern_011(&self) -> u64 {
        let n = self.len();
        if n < 3 {
            return 0;
        }
        // bit k: digit at k is 1, at k+1 is 1, at k+2 is 0 (k counted from the end)
        self.bits & (self.bits >> 1) & (!self.bits >> 2) & low_mask(n as u32 - 2)
    }

    pub fn is_greedy(&self) -> bool {
        self.pattern_011() == 0
    }

    /// The unique greedy word with the same length and value.
    ///
    /// Rewrites the leftmost `011` to `100` until none is left. Each rewrite
    /// makes the word lexicographically larger, so this terminates.
    pub fn normalize_to_greedy(&self) -> Word {
        let mut w = *self;
        loop {
            let m = w.pattern_011();
            if m == 0 {
                return w;
            }
            let k = 63 - m.leading_zeros();
            w.bits ^= 0b111 << k;
        }
    }

    /// `h` such that the word ends in `1 0^h`; `-1` for the all-zero word.
    pub fn suffix_class(&self) -> Result<i32, WordError> {
        if !self.is_greedy() {
            return Err(WordError::NotGreedy(*self));
        }
        if self.bits == 0 {
            Ok(-1)
        } else {
            Ok(self.bits.trailing_zeros() as i32)
        }
    }

    /// `Σ cᵢ φ^{n-i}`, the value scaled by `φⁿ`. Words of one length have
    /// equal values iff their scaled values are equal.
    pub fn scaled_value(&self) -> Result<GoldenInt, ArithError> {
        let mut acc = GoldenInt::ZERO;
        for d in self.digits() {
            acc = acc.mul_phi()?;
            if d == 1 {
                acc = acc.checked_add(GoldenInt::ONE)?;
            }
        }
        Ok(acc)
    }

    /// Exact value `Σ cᵢ φ^{-i}`; the empty word has value 0.
    pub fn value_of(&self) -> Result<GoldenRational, ArithError> {
        GoldenRational::new(self.scaled_value()?, self.len() as u32)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            f.write_str(if d == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Word, WordError> {
        let mut w = Word::EMPTY;
        for ch in s.trim().chars() {
            let d = match ch {
                '0' => 0,
                '1' => 1,
                other => return Err(WordError::InvalidDigit(other)),
            };
            if w.len() == Word::MAX_LEN {
                return Err(WordError::TooLong);
            }
            w = w.push(d);
        }
        Ok(w)
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// State of the automaton recognising words without the factor `011`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GreedyState {
    /// Empty, or ending in a `1` not preceded by `0`.
    Free,
    /// Ending in `0`.
    Zero,
    /// Ending in `01`: a further `1` is forbidden.
    ZeroOne,
}

impl GreedyState {
    pub const START: GreedyState = GreedyState::Free;

    pub fn step(self, digit: u8) -> Option<GreedyState> {
        use GreedyState::*;
        match (self, digit) {
            (_, 0) => Some(Zero),
            (Free, _) => Some(Free),
            (Zero, _) => Some(ZeroOne),
            (ZeroOne, _) => None,
        }
    }

    pub fn of(word: &Word) -> Option<GreedyState> {
        word.digits()
            .try_fold(GreedyState::START, |s, d| s.step(d))
    }
}

/// Depth-first walk of the greedy automaton: yields `G_n` in lexicographic order.
pub struct GreedyWords {
    n: usize,
    stack: Vec<(Word, GreedyState)>,
}

impl Iterator for GreedyWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        while let Some((w, s)) = self.stack.pop() {
            if w.len() == self.n {
                return Some(w);
            }
            // push 1 first so that 0 is visited first
            if let Some(s1) = s.step(1) {
                self.stack.push((w.push(1), s1));
            }
            self.stack.push((w.push(0), GreedyState::Zero));
        }
        None
    }
}

/// All greedy words of length `n`, lexicographically.
pub fn enumerate_greedy(n: usize) -> Result<GreedyWords, WordError> {
    if n > Word::MAX_LEN {
        return Err(WordError::TooLong);
    }
    Ok(GreedyWords {
        n,
        stack: vec![(Word::EMPTY, GreedyState::START)],
    })
}

/// `#G_n` by iterating the automaton's transfer matrix, without enumeration.
pub fn count_greedy(n: usize) -> u128 {
    // (free, zero, zero_one)
    let (mut f, mut z, mut zo) = (1u128, 0u128, 0u128);
    for _ in 0..n {
        (f, z, zo) = (f, f + z + zo, z);
    }
    f + z + zo
}

/// Counts of `G_n` split by the suffix `1 0^h`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LevelPartition {
    pub n: usize,
    /// `h ↦ #G_n^h` for `h ∈ {-1, 0, …, n-1}`.
    pub counts: BTreeMap<i32, u64>,
    pub total: u64,
    /// Words ending in `01` (the only ones whose 1-extension is forbidden).
    pub count_g0: u64,
    /// Words ending in `0`, the all-zero word included.
    pub count_gh: u64,
    /// Words ending in `1`.
    pub ending_in_one: u64,
}

impl LevelPartition {
    pub fn from_words(n: usize, words: impl IntoIterator<Item = Word>) -> Result<Self, WordError> {
        let mut p = LevelPartition {
            n,
            counts: BTreeMap::new(),
            total: 0,
            count_g0: 0,
            count_gh: 0,
            ending_in_one: 0,
        };
        for w in words {
            let h = w.suffix_class()?;
            *p.counts.entry(h).or_insert(0) += 1;
            p.total += 1;
            match w.last() {
                Some(0) => p.count_gh += 1,
                Some(_) => {
                    p.ending_in_one += 1;
                    if w.len() >= 2 && w.digit(w.len() - 2) == 0 {
                        p.count_g0 += 1;
                    }
                }
                None => {}
            }
        }
        Ok(p)
    }
}

pub fn level_partition(n: usize) -> Result<LevelPartition, WordError> {
    LevelPartition::from_words(n, enumerate_greedy(n)?)
}

/// `(#G_n, #G_n^0, #G_n^H)` from the recursive system on greedy counts.
///
/// `G^0` are the words ending in `01` and `G^H` those ending in `0`; the one
/// remaining greedy word is `1ⁿ`. Appending a digit gives
///
/// ```text
/// #G_{n+1}   = 2 + #G_n^0 + 2·#G_n^H
/// #G_{n+1}^0 = #G_n^H
/// #G_{n+1}^H = #G_n^0 + #G_n^H + 1
/// ```
///
/// starting from `#G_1^0 = 0`, `#G_1^H = 1`, `#G_1 = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyCounts {
    pub total: u128,
    pub g0: u128,
    pub gh: u128,
}

pub fn greedy_counts_recursive(n: usize) -> GreedyCounts {
    if n == 0 {
        return GreedyCounts {
            total: 1,
            g0: 0,
            gh: 0,
        };
    }
    let mut c = GreedyCounts {
        total: 2,
        g0: 0,
        gh: 1,
    };
    for _ in 1..n {
        c = GreedyCounts {
            total: 2 + c.g0 + 2 * c.gh,
            g0: c.gh,
            gh: c.g0 + c.gh + 1,
        };
    }
    c
}

/// `F_n` with `F_0 = 0`, `F_1 = 1`; defined for `n ≤ 180`.
pub fn fibonacci(n: u32) -> Result<u128, ArithError> {
    if n > 180 {
        return Err(ArithError::Overflow);
    }
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        let next = a.checked_add(b).ok_or(ArithError::Overflow)?;
        a = b;
        b = next;
    }
    Ok(a)
}
