//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! All algorithms are written against [`Scalar`], which is implemented for
//! `f32` and `f64`. Tolerances quoted throughout the docs assume `f64`.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable as the element type of iterates, matrices and objectives.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal or computed constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Scalar")
    }

    /// Lossy conversion to `f64`, used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self;

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Scalar for f32 {
    fn unit_roundoff() -> Self {
        f32::EPSILON
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f64 {
    fn unit_roundoff() -> Self {
        f64::EPSILON
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::Scalar;

    #[test]
    fn literal_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25f32);
        assert_eq!(<f64 as Scalar>::of_usize(7).as_f64(), 7.0);
        assert!(!<f64 as Scalar>::is_finite_value(f64::NAN));
        assert!(!<f32 as Scalar>::is_finite_value(f32::INFINITY));
    }
}
