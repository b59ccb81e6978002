//! Scalar abstraction so the renderer and its backward pass can run in
//! either f32 or f64.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar used throughout the pipeline.
pub trait Real:
    num_traits::Float
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an f64 constant into the scalar type.
    fn of(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("finite f64 converts to scalar")
    }

    /// Widens to f64 for reporting and cross-precision comparisons.
    fn to_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_round_trips() {
        assert_eq!(f32::of(0.25).to_f64(), 0.25);
        assert_eq!(f64::of(-1.5), -1.5);
    }
}
