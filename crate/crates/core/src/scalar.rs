//! Scalar abstraction used by every numeric routine in the crate.
//!
//! All matrix work goes through nalgebra, so the bound is `RealField`;
//! `ToPrimitive` is only needed where a value leaves the generic world
//! (special functions, report formatting).

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar: RealField + Copy + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Lossy conversion used for reporting and special functions.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute value (disambiguates `Signed::abs` and `ComplexField::abs`).
    #[inline]
    fn mag(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    /// Machine epsilon.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// `Self::lit(tol)` but never below a few ulps of one, so f64 defaults
    /// stay meaningful when the crate runs in `f32`.
    #[inline]
    fn tol(tol: f64) -> Self {
        let t = Self::lit(tol);
        let floor = Self::eps() * Self::lit(16.0);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
