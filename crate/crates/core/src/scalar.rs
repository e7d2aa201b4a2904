//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the simulators and checkers are generic over.
///
/// Implemented for `f32` and `f64`. Special functions (`ln_gamma`, `erf`)
/// and random variates are evaluated in `f64` and narrowed, so `f32`
/// trades accuracy for memory, never for a different algorithm.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, saturating to infinity on overflow.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}
