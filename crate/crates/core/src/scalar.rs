//! Scalar abstraction shared by the signal, density and decision code.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the toolkit can run on: `f32` or `f64`.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Significant decimal digits needed for a lossless text round trip.
    const DECIMAL_DIGITS: usize;

    /// Converts an `f64` literal. Every value used as a literal in this crate is
    /// representable (possibly rounded) in both supported types.
    fn lit(v: f64) -> Self;

    fn from_index(i: usize) -> Self {
        Self::from_usize(i).expect("index fits in a float")
    }

    /// Formats with `DECIMAL_DIGITS` significant digits in scientific notation.
    fn to_full_precision(self) -> String {
        format!("{:.*e}", Self::DECIMAL_DIGITS - 1, self)
    }
}

impl Scalar for f32 {
    const DECIMAL_DIGITS: usize = 9;

    fn lit(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for f64 {
    const DECIMAL_DIGITS: usize = 17;

    fn lit(v: f64) -> Self {
        v
    }
}
