//! Floating scalar abstraction.
//!
//! Everything numerical in this crate is written against [`Real`] so the
//! whole stack can be instantiated at `f32` or `f64`. Only `f64` reaches the
//! default tolerances; the `f32` instantiation exists for cheap smoke tests
//! and for callers that want bulk low-precision scans.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Tightest absolute truncation target the series evaluators honor.
    /// Requests below this are clamped to it.
    fn eps_floor() -> Self;

    /// Conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }
}

impl Real for f64 {
    fn eps_floor() -> Self {
        1e-13
    }
}

impl Real for f32 {
    fn eps_floor() -> Self {
        1e-5
    }
}
