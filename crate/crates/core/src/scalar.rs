//! Scalar abstraction shared by every numeric routine.
//!
//! Training runs in `f32`; gradient verification runs in `f64`. Everything
//! numeric in this crate is written against [`Scalar`] so both precisions
//! share one code path.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real number type usable for parameters, activations and gradients.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Short type name used in logs and reports.
    const NAME: &'static str;

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to any float")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64_lossy(n as f64)
    }

    /// Narrow to `f32` for on-disk storage.
    fn to_f32_lossy(self) -> f32 {
        ToPrimitive::to_f32(&self).unwrap_or(f32::NAN)
    }

    fn from_f32(x: f32) -> Self {
        Self::from_f64_lossy(x as f64)
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    fn to_f32_lossy(self) -> f32 {
        self
    }

    fn from_f32(x: f32) -> Self {
        x
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}
