//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the decay-law routines are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Euler–Mascheroni constant.
    fn euler_gamma() -> Self;
}

impl Real for f32 {
    fn euler_gamma() -> Self {
        0.577_215_7
    }
}

impl Real for f64 {
    fn euler_gamma() -> Self {
        0.577_215_664_901_532_9
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Widens `x` to `f64` for diagnostics and error payloads.
#[inline]
pub fn wide<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
