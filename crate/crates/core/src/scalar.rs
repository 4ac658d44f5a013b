//! Probability scalars.
//!
//! Every game, distribution and value in the crate is generic over a
//! [`Scalar`]. The exact instantiation ([`Rational`]) is the default
//! everywhere; `f64` is available for fast heuristic work where exactness is
//! not required.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, ToPrimitive, Zero};

/// Arbitrary-precision exact fraction, always stored reduced with a
/// positive denominator.
pub type Rational = BigRational;

/// A probability-like number usable as a weight.
pub trait Scalar: Num + Clone + Debug + PartialOrd + Send + Sync + 'static {
    /// Converts from an exact fraction (rounding for inexact types).
    fn from_rational(value: &Rational) -> Self;

    /// Exact numerator/denominator pair, or `None` for inexact types.
    fn exact_ratio(&self) -> Option<(BigInt, BigInt)>;

    fn to_f64(&self) -> f64;

    /// Equality used for normalization checks. Exact for exact types.
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn is_exact() -> bool;

    fn from_integer(value: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(value)))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value as a [`Rational`], if the type is exact.
    fn to_rational(&self) -> Option<Rational> {
        self.exact_ratio().map(|(n, d)| Rational::new(n, d))
    }
}

impl Scalar for BigRational {
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn exact_ratio(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for Ratio<i64> {
    /// Panics if the fraction does not fit in `i64`.
    fn from_rational(value: &Rational) -> Self {
        let n = value.numer().to_i64().expect("numerator overflows i64");
        let d = value.denom().to_i64().expect("denominator overflows i64");
        Ratio::new(n, d)
    }

    fn exact_ratio(&self) -> Option<(BigInt, BigInt)> {
        Some((BigInt::from(*self.numer()), BigInt::from(*self.denom())))
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn is_exact() -> bool {
        true
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn from_rational(value: &Rational) -> Self {
                ToPrimitive::to_f64(value).unwrap_or(<$t>::NAN as f64) as $t
            }

            fn exact_ratio(&self) -> Option<(BigInt, BigInt)> {
                None
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn approx_eq(&self, other: &Self) -> bool {
                (self - other).abs() <= $tol
            }

            fn is_exact() -> bool {
                false
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

/// Builds an exact fraction from machine integers.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Sum of a sequence of scalars.
pub fn sum<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |acc, v| acc + v.clone())
}

/// `value^(2^squarings) <= bound`, decided exactly without forming roots.
///
/// For `value` in `[0, 1]` the powers decrease monotonically, so the loop
/// stops at the first power already below `bound`.
pub fn power_of_two_le(value: &Rational, squarings: u32, bound: &Rational) -> bool {
    let one = Rational::from_integer(BigInt::from(1));
    let mut current = value.clone();
    if current.is_zero() || current == one {
        return current <= *bound;
    }
    if current < Rational::zero() || current > one {
        for _ in 0..squarings {
            current = &current * &current;
        }
        return current <= *bound;
    }
    for _ in 0..squarings {
        if current <= *bound {
            return true;
        }
        current = &current * &current;
    }
    current <= *bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_canonical() {
        let r = rational(2, -4);
        assert_eq!(r.numer(), &BigInt::from(-1));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(rational(3, 6), rational(1, 2));
    }

    #[test]
    fn float_equality_is_tolerant() {
        assert!((0.1f64 + 0.2).approx_eq(&0.3));
        assert!(!rational(1, 3).approx_eq(&rational(333, 1000)));
    }

    #[test]
    fn power_comparison_matches_direct_power() {
        let a = rational(2, 3);
        // (2/3)^4 = 16/81
        assert!(power_of_two_le(&a, 2, &rational(16, 81)));
        assert!(!power_of_two_le(&a, 2, &rational(15, 81)));
        assert!(power_of_two_le(&rational(1, 1), 40, &rational(1, 1)));
        assert!(!power_of_two_le(&rational(1, 1), 40, &rational(99, 100)));
        // huge exponent terminates through the early exit
        assert!(power_of_two_le(&a, 200, &rational(1, 1000)));
    }
}
