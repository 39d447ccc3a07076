//! Scalar abstraction shared by behaviors, expression evaluation and the
//! simplex solver.
//!
//! Floating types compare with a small absolute epsilon; [`Rational`] is
//! exact and compares against zero.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Exact rational number used for certificates.
pub type Rational = BigRational;

/// Number type the core algorithms are generic over.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    /// Threshold below which a magnitude is treated as zero by the solver.
    fn epsilon() -> Self;

    fn from_int(n: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::epsilon()
    }

    /// Strictly below `-epsilon`.
    fn is_negative_beyond_tol(&self) -> bool {
        *self < -Self::epsilon()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn epsilon() -> Self {
        1e-9
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn epsilon() -> Self {
        1e-5
    }

    fn from_int(n: i64) -> Self {
        n as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn epsilon() -> Self {
        Rational::zero()
    }

    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// `1/n` in the scalar type.
pub(crate) fn reciprocal<T: Scalar>(n: usize) -> T {
    T::one() / T::from_int(n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn rational_is_exact() {
        let third = Rational::ratio(1, 3);
        let sum = third.clone() + third.clone() + third;
        assert_eq!(sum, Rational::one());
        assert_eq!((Rational::EXACT, f64::EXACT), (true, false));
        assert!(Rational::epsilon().is_zero());
    }

    #[test]
    fn float_tolerance() {
        assert!(1e-12_f64.is_negligible());
        assert!(!1e-6_f64.is_negligible());
        assert!((-1e-6_f64).is_negative_beyond_tol());
        assert!(!(-1e-12_f64).is_negative_beyond_tol());
        assert_eq!(reciprocal::<f32>(4), 0.25);
    }
}
