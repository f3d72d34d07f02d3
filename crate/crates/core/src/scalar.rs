use std::fmt::{Debug, Display};

/// Floating-point scalar used by the curve-fitting code: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}
