//! Scalar abstraction for the geometric core.

use nalgebra as na;
use num_traits as nt;

/// Floating point types the geometry and integration layers are generic over.
///
/// Implemented for `f32` and `f64`. The analysis layers (focal detection,
/// foliations, harness) are written against `f64` because their tolerance
/// contracts are only meaningful in double precision.
pub trait Real: na::RealField + Copy + nt::FromPrimitive + nt::FloatConst {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;

    /// Widening conversion, used when reporting diagnostics.
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
