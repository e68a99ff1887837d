//! Numeric scalar abstraction.
//!
//! Every solver and map in this crate is generic over [`Scalar`], which is
//! implemented for `f64` and for exact arbitrary-precision rationals
//! ([`Rational`]). In exact mode every tolerance collapses to zero.

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and tolerances are meaningless.
    const EXACT: bool;

    /// Converts a finite `f64`. Rationals take the exact binary value.
    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// A tolerance of magnitude `v`, or zero in exact mode.
    fn tolerance(v: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64_lossy(v)
        }
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer conversion")
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Clamps `self` into `[lo, hi]`. Assumes `lo <= hi`.
    fn clamp_to(self, lo: &Self, hi: &Self) -> Self {
        if &self < lo {
            lo.clone()
        } else if &self > hi {
            hi.clone()
        } else {
            self
        }
    }

    /// `self > 0`. Unlike `Signed::is_positive`, false for `0.0`.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    /// `self < 0`. Unlike `Signed::is_negative`, false for `-0.0`.
    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    /// `|self - other| <= tol`.
    fn near(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Parses `"3"`, `"-2.5"` or `"2/3"` into a scalar. Decimal strings are
/// read exactly in rational mode (so `"0.1"` is one tenth, not its binary
/// approximation).
pub fn parse_scalar<T: Scalar>(s: &str) -> Option<T> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: T = parse_scalar(num)?;
        let den: T = parse_scalar(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    if T::EXACT {
        parse_decimal_exact(s)
    } else {
        s.parse::<f64>().ok().filter(|v| v.is_finite()).map(T::from_f64_lossy)
    }
}

fn parse_decimal_exact<T: Scalar>(s: &str) -> Option<T> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let ten = T::from_int(10);
    let mut value = T::zero();
    for c in int_part.chars().chain(frac_part.chars()) {
        value = value * ten.clone() + T::from_int(c.to_digit(10)? as i64);
    }
    let scale = exponent - frac_part.len() as i32;
    let mut factor = T::one();
    for _ in 0..scale.unsigned_abs() {
        factor = factor * ten.clone();
    }
    value = if scale >= 0 { value * factor } else { value / factor };
    Some(if negative { -value } else { value })
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64_lossy).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> Rational {
        Rational::from_int(n) / Rational::from_int(d)
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_scalar::<Rational>("2/3"), Some(ratio(2, 3)));
        assert_eq!(parse_scalar::<Rational>("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_scalar::<Rational>("-1.5e1"), Some(ratio(-15, 1)));
        assert_eq!(parse_scalar::<Rational>("0.1"), Some(ratio(1, 10)));
        assert_eq!(parse_scalar::<f64>("2/4"), Some(0.5));
        assert_eq!(parse_scalar::<f64>("1/0"), None);
        assert_eq!(parse_scalar::<Rational>("abc"), None);
        assert_eq!(parse_scalar::<Rational>("."), None);
    }

    #[test]
    fn signed_zero_is_neither_sign() {
        assert!(!0.0f64.gt_zero() && !(-0.0f64).lt_zero());
        assert!(1e-300f64.gt_zero() && (-1e-300f64).lt_zero());
    }

    #[test]
    fn exact_mode_has_zero_tolerance() {
        assert!(Rational::tolerance(1e-9).is_zero());
        assert_eq!(f64::tolerance(1e-9), 1e-9);
    }
}
