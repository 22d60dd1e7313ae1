//! Scalar traits shared by the polynomial kernel and the linear algebra.
//!
//! The kernel is generic over the coefficient field. Symbolic work runs over
//! [`BigRational`]; the numeric oracles reuse the same elimination code over
//! `f64` and exact rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Commutative ring with identity.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Pivot preference during elimination; smaller values are chosen first.
    fn pivot_weight(&self) -> usize {
        0
    }
}

/// Ring without zero divisors, with exact division where the quotient exists.
pub trait IntegralDomain: Ring {
    /// `Some(q)` with `q * rhs == self` when such `q` exists in the ring.
    fn exact_div(&self, rhs: &Self) -> Option<Self>;
}

/// Field: every nonzero element is invertible.
pub trait Field: IntegralDomain + Div<Output = Self> {}

/// Exact coefficient field for polynomials.
pub trait Coefficient: Field + fmt::Display + Send + Sync + 'static {
    fn from_bigint(n: BigInt) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Numerator and denominator when the value is a ratio of integers.
    fn as_ratio(&self) -> Option<(BigInt, BigInt)>;
}

impl Ring for f64 {}

impl IntegralDomain for f64 {
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if *rhs == 0.0 {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl Field for f64 {}

impl Ring for BigRational {
    fn pivot_weight(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize
    }
}

impl IntegralDomain for BigRational {
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl Field for BigRational {}

impl Coefficient for BigRational {
    fn from_bigint(n: BigInt) -> Self {
        BigRational::from_integer(n)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn as_ratio(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }
}
