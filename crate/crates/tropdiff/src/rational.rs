//! Arbitrary-precision rationals in canonical reduced form.
//!
//! `Rational` is the scalar type for everything exact in this crate:
//! coefficients, valuations, skeleton lengths and levels. It wraps
//! [`num::BigRational`] and serializes as a `"p/q"` string.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number. The denominator is always positive and the
/// fraction is always reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Exact integer value, if the denominator is 1 and the numerator fits.
    pub fn to_integer(&self) -> Option<i64> {
        if !self.0.is_integer() {
            return None;
        }
        let n = self.0.numer();
        i64::try_from(n.clone()).ok()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn pow(&self, exp: i64) -> Result<Self> {
        if self.is_zero() && exp < 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.pow(
            i32::try_from(exp).expect("exponent out of range"),
        )))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// The exact q-th root if it exists in the rationals.
    ///
    /// For even q the non-negative root is returned; negative inputs have no
    /// even root. For odd q the sign of the input is kept.
    pub fn nth_root(&self, q: u32) -> Option<Self> {
        assert!(q >= 1);
        if q == 1 {
            return Some(self.clone());
        }
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_negative() && q % 2 == 0 {
            return None;
        }
        let root_of = |v: &BigInt| -> Option<BigInt> {
            let (sign, mag) = (v.sign(), v.magnitude().clone());
            let r = mag.nth_root(q);
            if num::pow::pow(r.clone(), q as usize) != mag {
                return None;
            }
            Some(match sign {
                Sign::Minus => -BigInt::from(r),
                _ => BigInt::from(r),
            })
        };
        let num = root_of(self.0.numer())?;
        let den = root_of(self.0.denom())?;
        Some(Rational(BigRational::new(num, den)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            BigInt::from_str(t.trim())
                .map_err(|_| Error::Structural(format!("bad integer literal {t:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let num = parse_int(n)?;
                let den = parse_int(d)?;
                if den.is_zero() {
                    return Err(Error::Structural(format!("zero denominator in {s:?}")));
                }
                Ok(Rational(BigRational::new(num, den)))
            }
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl<'a> Neg for &'a Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        self.0 *= rhs.0;
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// A rational extended by `+∞`. Used for valuations, precisions, tail
/// bounds and edge lengths.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Val {
    Finite(Rational),
    Infinite,
}

impl Val {
    pub fn finite(n: i64, d: i64) -> Self {
        Val::Finite(Rational::new(n, d))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Val::Infinite)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Val::Finite(r) => Some(r),
            Val::Infinite => None,
        }
    }

    pub fn min(self, other: Val) -> Val {
        match (self, other) {
            (Val::Infinite, v) | (v, Val::Infinite) => v,
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a.min(b)),
        }
    }

    pub fn max(self, other: Val) -> Val {
        match (self, other) {
            (Val::Infinite, _) | (_, Val::Infinite) => Val::Infinite,
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a.max(b)),
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, rhs: Val) -> Val {
        match (self, rhs) {
            (Val::Infinite, _) | (_, Val::Infinite) => Val::Infinite,
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
        }
    }
}

impl<'a> Add<&'a Rational> for Val {
    type Output = Val;
    fn add(self, rhs: &'a Rational) -> Val {
        match self {
            Val::Infinite => Val::Infinite,
            Val::Finite(a) => Val::Finite(a + rhs),
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => Ordering::Equal,
            (Val::Infinite, _) => Ordering::Greater,
            (_, Val::Infinite) => Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(r) => write!(f, "{}", r),
            Val::Infinite => write!(f, "inf"),
        }
    }
}

impl From<Rational> for Val {
    fn from(r: Rational) -> Self {
        Val::Finite(r)
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Val {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.trim() == "inf" {
            Ok(Val::Infinite)
        } else {
            Ok(Val::Finite(
                Rational::from_str(&s).map_err(serde::de::Error::custom)?,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["3/4", "-3/4", "7", "0", "-12/5"] {
            let r: Rational = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        // non-canonical input normalizes
        let r: Rational = "6/8".parse().unwrap();
        assert_eq!(r.to_string(), "3/4");
        let r: Rational = "3/-4".parse().unwrap();
        assert_eq!(r.to_string(), "-3/4");
    }

    #[test]
    fn nth_root_exact_cases() {
        assert_eq!(
            Rational::new(4, 9).nth_root(2),
            Some(Rational::new(2, 3))
        );
        assert_eq!(
            Rational::new(-8, 27).nth_root(3),
            Some(Rational::new(-2, 3))
        );
        assert_eq!(Rational::from_int(2).nth_root(2), None);
        assert_eq!(Rational::from_int(-4).nth_root(2), None);
    }

    #[test]
    fn val_ordering() {
        assert!(Val::Infinite > Val::finite(1000, 1));
        assert_eq!(
            Val::finite(1, 2).min(Val::Infinite),
            Val::finite(1, 2)
        );
        assert_eq!(Val::finite(1, 2) + Val::finite(1, 3), Val::finite(5, 6));
    }
}
