//! Scalar abstractions shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance used for lightlike and orthogonality classification.
    fn tolerance() -> Self;

    /// Converts an `f64` literal; the conversion is exact for `f64` and rounds for `f32`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Converts a count into the scalar type.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}
