//! Arbitrary-precision rational scalars.
//!
//! Every mass, coupling entry, and optimal value in this crate is a
//! [`Rational`]. Values are kept in lowest terms with a positive
//! denominator, so two equal quantities always compare and print
//! identically.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

type Inner = num_rational::BigRational;

/// An exact signed fraction with arbitrary-precision numerator and
/// positive arbitrary-precision denominator, always in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Inner);

impl Rational {
    /// Builds `numer / denom`, reducing to lowest terms.
    ///
    /// Fails with [`Error::DivisionByZero`] when `denom` is zero.
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(Inner::new(numer, denom)))
    }

    /// Convenience constructor from machine integers. Panics on a zero
    /// denominator; use [`Rational::new`] for fallible construction.
    pub fn of(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "Rational::of requires a nonzero denominator");
        Rational(Inner::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(Inner::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Rational(Inner::zero())
    }

    pub fn one() -> Self {
        Rational(Inner::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
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

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
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

    /// Exact division that reports zero divisors instead of panicking.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Nearest `f64`; only used by the floating-point demo backends.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact rational value of a finite float (every finite `f64` is a
    /// dyadic rational). Returns `None` for NaN or infinities.
    pub fn from_f64_exact(value: f64) -> Option<Self> {
        Inner::from_float(value).map(Rational)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `"a/b"` or a bare integer `"a"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidRational {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let text = s.trim();
        if text.is_empty() {
            return Err(bad("empty string"));
        }
        let (numer_text, denom_text) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (text, None),
        };
        let numer: BigInt = numer_text
            .parse()
            .map_err(|_| bad("numerator is not an integer"))?;
        let denom: BigInt = match denom_text {
            Some(d) => d
                .parse()
                .map_err(|_| bad("denominator is not an integer"))?,
            None => BigInt::one(),
        };
        if denom.is_zero() {
            return Err(bad("denominator is zero"));
        }
        Ok(Rational(Inner::new(numer, denom)))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
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
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div for Rational {
    type Output = Rational;
    /// Panics on a zero divisor; use [`Rational::checked_div`] to get an error.
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
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

impl<'a> AddAssign<&'a Rational> for Rational {
    fn add_assign(&mut self, rhs: &'a Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl<'a> SubAssign<&'a Rational> for Rational {
    fn sub_assign(&mut self, rhs: &'a Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        self.0 *= rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stays_in_lowest_terms_with_positive_denominator() {
        let r = Rational::of(6, -8);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(4));
        assert_eq!(r.to_string(), "-3/4");
    }

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!("1/4".parse::<Rational>().unwrap(), Rational::of(1, 4));
        assert_eq!(
            "-7".parse::<Rational>().unwrap(),
            Rational::from_integer(-7)
        );
        assert_eq!("2/4".parse::<Rational>().unwrap().to_string(), "1/2");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
        assert!("a/b".parse::<Rational>().is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Rational::of(1, 3);
        let b = Rational::of(1, 6);
        assert_eq!(&a + &b, Rational::of(1, 2));
        assert_eq!(&a - &b, Rational::of(1, 6));
        assert_eq!(&a * &b, Rational::of(1, 18));
        assert_eq!(a.checked_div(&b).unwrap(), Rational::from_integer(2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = Rational::of(1, 3);
        assert!(matches!(
            a.checked_div(&Rational::zero()),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            Rational::new(BigInt::one(), BigInt::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn float_round_trip_is_exact() {
        let r = Rational::from_f64_exact(0.375).unwrap();
        assert_eq!(r, Rational::of(3, 8));
        assert!(Rational::from_f64_exact(f64::NAN).is_none());
    }
}
