//! Scalar abstraction for all probability arithmetic.
//!
//! Everything in this crate is generic over [`Real`], which is any IEEE
//! floating point type with the conversions we need. `f64` is the working
//! precision used by the CLI and the test suite; `f32` is supported for
//! callers that want the smaller footprint and can live with the reduced
//! accuracy (and with binomial tables overflowing sooner, around 150 routed
//! photons).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar used for probabilities and amplitudes of diagonal
/// operators. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics on values the scalar cannot hold,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count. Counts in this crate are small enough that the
    /// nearest-value rounding of `f32` is acceptable.
    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
