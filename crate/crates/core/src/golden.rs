//! Exact arithmetic in the ring `Z[φ] = { a + bφ : a, b ∈ Z }`.
//!
//! Everything is reduced with `φ² = φ + 1`. Coefficients are `i128` and every
//! fallible operation is checked: overflow is reported as [`ArithError`],
//! never wrapped.
//!
//! [`GoldenRational`] carries an extra power-of-φ denominator so that values
//! such as `Σ cᵢ φ^{-i}` can be written down directly. Since `φ·(φ - 1) = 1`,
//! φ is a unit of `Z[φ]`; normalization therefore always reaches scale 0 and
//! the canonical form of a `GoldenRational` is a plain `GoldenInt`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("coefficient overflow in Z[phi] arithmetic")]
    Overflow,
}

/// The number `a + bφ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoldenInt {
    pub a: i128,
    pub b: i128,
}

impl GoldenInt {
    pub const ZERO: GoldenInt = GoldenInt::new(0, 0);
    pub const ONE: GoldenInt = GoldenInt::new(1, 0);
    pub const PHI: GoldenInt = GoldenInt::new(0, 1);
    /// `1/φ = φ - 1`.
    pub const PHI_INV: GoldenInt = GoldenInt::new(-1, 1);

    pub const fn new(a: i128, b: i128) -> Self {
        GoldenInt { a, b }
    }

    pub const fn from_int(a: i128) -> Self {
        GoldenInt { a, b: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, ArithError> {
        Ok(GoldenInt {
            a: self.a.checked_add(rhs.a).ok_or(ArithError::Overflow)?,
            b: self.b.checked_add(rhs.b).ok_or(ArithError::Overflow)?,
        })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, ArithError> {
        Ok(GoldenInt {
            a: self.a.checked_sub(rhs.a).ok_or(ArithError::Overflow)?,
            b: self.b.checked_sub(rhs.b).ok_or(ArithError::Overflow)?,
        })
    }

    pub fn checked_neg(self) -> Result<Self, ArithError> {
        Ok(GoldenInt {
            a: self.a.checked_neg().ok_or(ArithError::Overflow)?,
            b: self.b.checked_neg().ok_or(ArithError::Overflow)?,
        })
    }

    /// `(a + bφ)(c + dφ) = (ac + bd) + (ad + bc + bd)φ`.
    pub fn checked_mul(self, rhs: Self) -> Result<Self, ArithError> {
        let m = |x: i128, y: i128| x.checked_mul(y).ok_or(ArithError::Overflow);
        let s = |x: i128, y: i128| x.checked_add(y).ok_or(ArithError::Overflow);
        let bd = m(self.b, rhs.b)?;
        let a = s(m(self.a, rhs.a)?, bd)?;
        let b = s(s(m(self.a, rhs.b)?, m(self.b, rhs.a)?)?, bd)?;
        Ok(GoldenInt { a, b })
    }

    /// Multiplication by φ: `(a + bφ)φ = b + (a + b)φ`.
    pub fn mul_phi(self) -> Result<Self, ArithError> {
        Ok(GoldenInt {
            a: self.b,
            b: self.a.checked_add(self.b).ok_or(ArithError::Overflow)?,
        })
    }

    /// Exact division by φ: `(a + bφ)/φ = (b - a) + aφ`.
    pub fn div_phi(self) -> Result<Self, ArithError> {
        Ok(GoldenInt {
            a: self.b.checked_sub(self.a).ok_or(ArithError::Overflow)?,
            b: self.a,
        })
    }

    /// `φ^k` for any integer `k`.
    pub fn phi_pow(k: i32) -> Result<Self, ArithError> {
        let mut x = GoldenInt::ONE;
        if k >= 0 {
            for _ in 0..k {
                x = x.mul_phi()?;
            }
        } else {
            for _ in 0..k.unsigned_abs() {
                x = x.div_phi()?;
            }
        }
        Ok(x)
    }

    /// Exact sign of `a + bφ`, using integer arithmetic only.
    ///
    /// With `a + bφ = ((2a + b) + b√5) / 2` the mixed-sign case reduces to
    /// comparing `(2a + b)²` with `5b²`. If those squares do not fit in `i128`
    /// the comparison falls back to a subtractive (Euclid-like) test.
    pub fn signum(self) -> i32 {
        let (a, b) = (self.a, self.b);
        if a >= 0 && b >= 0 {
            return if a == 0 && b == 0 { 0 } else { 1 };
        }
        if a <= 0 && b <= 0 {
            return -1;
        }
        match square_sign(a, b) {
            Some(s) => s,
            None => euclid_sign(a, b),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.a as f64 + self.b as f64 * crate::PHI
    }
}

// Mixed-sign case of `signum` via `(2a+b)^2` against `5b^2`.
fn square_sign(a: i128, b: i128) -> Option<i32> {
    let s = a.checked_mul(2)?.checked_add(b)?;
    let s2 = s.checked_mul(s)?;
    let b2 = b.checked_mul(b)?.checked_mul(5)?;
    // sign(s + b√5): when s and b agree in sign it is immediate.
    if s >= 0 && b > 0 {
        return Some(1);
    }
    if s <= 0 && b < 0 {
        return Some(-1);
    }
    // s and b have opposite signs (b ≠ 0, √5 irrational, so no tie).
    Some(match s2.cmp(&b2) {
        Ordering::Greater => s.signum() as i32,
        _ => b.signum() as i32,
    })
}

// Mixed-sign case via repeated subtraction. Decides whether `x < yφ` for
// non-negative `x, y` (not both zero) using `x < yφ ⇔ ¬(y < (x - y)φ)` when `x > y`.
fn euclid_sign(a: i128, b: i128) -> i32 {
    fn less_than_phi_times(mut x: u128, mut y: u128) -> bool {
        let mut negate = false;
        loop {
            if x <= y {
                // y > 0 here unless both are zero, which callers exclude.
                return !negate;
            }
            let rest = x - y;
            x = y;
            y = rest;
            negate = !negate;
        }
    }
    if b > 0 {
        // a < 0: sign(bφ - |a|)
        if less_than_phi_times(a.unsigned_abs(), b.unsigned_abs()) {
            1
        } else {
            -1
        }
    } else {
        // a > 0, b < 0: sign(a - |b|φ)
        if less_than_phi_times(a.unsigned_abs(), b.unsigned_abs()) {
            -1
        } else {
            1
        }
    }
}

impl Ord for GoldenInt {
    /// Ordering by real value.
    ///
    /// Panics if the coefficient difference overflows `i128`.
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self
            .checked_sub(*other)
            .expect("GoldenInt comparison overflowed");
        d.signum().cmp(&0)
    }
}

impl PartialOrd for GoldenInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Operator impls panic on overflow, matching debug-mode integer semantics.
// Library code paths use the checked methods.
impl Add for GoldenInt {
    type Output = GoldenInt;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("GoldenInt addition overflowed")
    }
}

impl Sub for GoldenInt {
    type Output = GoldenInt;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("GoldenInt subtraction overflowed")
    }
}

impl Mul for GoldenInt {
    type Output = GoldenInt;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("GoldenInt multiplication overflowed")
    }
}

impl Neg for GoldenInt {
    type Output = GoldenInt;
    fn neg(self) -> Self {
        self.checked_neg().expect("GoldenInt negation overflowed")
    }
}

impl fmt::Display for GoldenInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}·φ", self.a, self.b)
    }
}

/// `num · φ^{-scale}`.
///
/// Constructors normalize, so two `GoldenRational`s are equal as reals iff
/// they are equal as structs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGoldenRational", into = "RawGoldenRational")]
pub struct GoldenRational {
    num: GoldenInt,
    scale: u32,
}

#[derive(Serialize, Deserialize)]
struct RawGoldenRational {
    a: i128,
    b: i128,
    scale: u32,
}

impl From<GoldenRational> for RawGoldenRational {
    fn from(x: GoldenRational) -> Self {
        RawGoldenRational {
            a: x.num.a,
            b: x.num.b,
            scale: x.scale,
        }
    }
}

impl TryFrom<RawGoldenRational> for GoldenRational {
    type Error = ArithError;
    fn try_from(r: RawGoldenRational) -> Result<Self, ArithError> {
        GoldenRational::new(GoldenInt::new(r.a, r.b), r.scale)
    }
}

impl GoldenRational {
    pub const ZERO: GoldenRational = GoldenRational {
        num: GoldenInt::ZERO,
        scale: 0,
    };

    /// Builds `num · φ^{-scale}` in normalized form.
    pub fn new(num: GoldenInt, scale: u32) -> Result<Self, ArithError> {
        let mut num = num;
        let mut scale = scale;
        // φ is a unit, so `num` is always divisible by φ while scale > 0.
        while scale > 0 {
            num = num.div_phi()?;
            scale -= 1;
        }
        Ok(GoldenRational { num, scale })
    }

    pub fn from_golden_int(num: GoldenInt) -> Self {
        GoldenRational { num, scale: 0 }
    }

    /// `φ^{-k}`.
    pub fn phi_inv_pow(k: u32) -> Result<Self, ArithError> {
        GoldenRational::new(GoldenInt::ONE, k)
    }

    pub fn num(&self) -> GoldenInt {
        self.num
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Idempotent: a constructed value is already normalized.
    pub fn normalized(self) -> Result<Self, ArithError> {
        GoldenRational::new(self.num, self.scale)
    }

    pub fn signum(&self) -> i32 {
        self.num.signum()
    }

    /// Numerator after rescaling to the larger scale `target`.
    fn num_at_scale(&self, target: u32) -> Result<GoldenInt, ArithError> {
        let mut n = self.num;
        for _ in self.scale..target {
            n = n.mul_phi()?;
        }
        Ok(n)
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, ArithError> {
        let k = self.scale.max(rhs.scale);
        let s = self.num_at_scale(k)?.checked_add(rhs.num_at_scale(k)?)?;
        GoldenRational::new(s, k)
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, ArithError> {
        let k = self.scale.max(rhs.scale);
        let s = self.num_at_scale(k)?.checked_sub(rhs.num_at_scale(k)?)?;
        GoldenRational::new(s, k)
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, ArithError> {
        let scale = self
            .scale
            .checked_add(rhs.scale)
            .ok_or(ArithError::Overflow)?;
        GoldenRational::new(self.num.checked_mul(rhs.num)?, scale)
    }

    /// Exact comparison.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, ArithError> {
        let k = self.scale.max(other.scale);
        let d = self.num_at_scale(k)?.checked_sub(other.num_at_scale(k)?)?;
        Ok(d.signum().cmp(&0))
    }

    pub fn max(self, other: Self) -> Result<Self, ArithError> {
        Ok(match self.try_cmp(&other)? {
            Ordering::Less => other,
            _ => self,
        })
    }

    pub fn min(self, other: Self) -> Result<Self, ArithError> {
        Ok(match self.try_cmp(&other)? {
            Ordering::Greater => other,
            _ => self,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64() * crate::PHI.powi(-(self.scale as i32))
    }
}

impl Ord for GoldenRational {
    /// Panics on coefficient overflow; use [`GoldenRational::try_cmp`] to handle it.
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other)
            .expect("GoldenRational comparison overflowed")
    }
}

impl PartialOrd for GoldenRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GoldenRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}·φ @ φ^-{}", self.num.a, self.num.b, self.scale)
    }
}

/// Free-function form of [`GoldenInt::checked_add`].
pub fn gi_add(x: GoldenInt, y: GoldenInt) -> Result<GoldenInt, ArithError> {
    x.checked_add(y)
}

pub fn gi_mul(x: GoldenInt, y: GoldenInt) -> Result<GoldenInt, ArithError> {
    x.checked_mul(y)
}

pub fn gi_sign(x: GoldenInt) -> i32 {
    x.signum()
}

pub fn gr_cmp(x: &GoldenRational, y: &GoldenRational) -> Result<Ordering, ArithError> {
    x.try_cmp(y)
}
