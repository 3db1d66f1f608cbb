//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything in the crate is written against this trait; pick the precision
/// through the aliases at the crate root.
pub trait Real: RealField + Copy + ToPrimitive + Default {
    /// Lossy constant construction from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest magnitude treated as nonzero in determinant-style checks.
    fn singular_tolerance() -> Self;
}

impl Real for f32 {
    fn singular_tolerance() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn singular_tolerance() -> Self {
        1e-12
    }
}

/// `(√5 − 1)/2`, the inverse golden ratio.
pub fn golden_minor<T: Real>() -> T {
    (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0)
}

/// `(√5 + 1)/2`, the golden ratio.
pub fn golden_major<T: Real>() -> T {
    (T::lit(5.0).sqrt() + T::one()) / T::lit(2.0)
}
