//! Scalar abstraction: the whole core is generic over the floating-point type.
//!
//! `f64` is the working precision for everything the harness runs; `f32` is
//! supported for cheap smoke checks of type-agnosticism. Concrete aliases for
//! the main types live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar usable throughout the core.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssignOps
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal (panics only for exotic scalar types).
    fn of_f64(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal not representable")
    }

    /// Widen to `f64` (exact for f32/f64).
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar not representable as f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + NumAssignOps
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for converting an `f64` literal into the working scalar type.
pub fn cast<T: Scalar>(x: f64) -> T {
    <T as Scalar>::of_f64(x)
}

/// `|s|^e` with a fast path for integer exponents.
///
/// The built-in damping/nonlinearity families evaluate powers of `|s|` in the
/// innermost solver loops; `powi` is considerably cheaper than `powf` and the
/// common exponents (m = 3, p = 3, q = 8, ...) are integers.
pub fn pow_abs<T: Scalar>(s: T, e: T) -> T {
    let a = s.abs();
    let ef = e.as_f64();
    let rounded = ef.round();
    if (ef - rounded).abs() < 1e-12 && rounded.abs() <= 64.0 {
        a.powi(rounded as i32)
    } else {
        a.powf(e)
    }
}
