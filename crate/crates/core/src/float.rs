//! Scalar abstraction for the numerical routines.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{FromPrimitive, NumAssignOps, NumCast, ToPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// Implemented for `f32` and `f64`. The blanket constant conversion
/// [`Float::cast`] keeps formulas readable in generic code.
pub trait Float:
    num_traits::Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts a constant into the scalar type, panicking on failure.
    fn cast<T: NumCast>(x: T) -> Self {
        NumCast::from(x).unwrap()
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// Lossy view of a generic vector as `f64`, used for error payloads.
pub(crate) fn to_f64_vec<F: Float>(w: &[F]) -> Vec<f64> {
    w.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}
