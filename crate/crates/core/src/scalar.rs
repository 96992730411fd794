//! Floating-point abstraction shared by every formula in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the analytic and numeric routines are generic over: `f32` or `f64`.
///
/// Accuracy targets quoted in the docs (e.g. `1e-10` relative for the special
/// functions) refer to `f64`; `f32` evaluations are accurate to a few ulps of
/// single precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion of a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Linear value to decibels: `10·log10(x)`.
#[inline]
pub fn to_db<F: Scalar>(linear: F) -> F {
    F::lit(10.0) * linear.log10()
}

/// Decibels to linear value: `10^(dB/10)`.
#[inline]
pub fn from_db<F: Scalar>(db: F) -> F {
    F::lit(10.0).powf(db / F::lit(10.0))
}
