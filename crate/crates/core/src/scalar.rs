//! Floating point abstraction used throughout the crate.
//!
//! Every geometric and spectral operation is generic over [`Scalar`], which
//! is implemented for `f32` and `f64`. Tolerances are specified as `f64`
//! constants and converted at the use site with [`flt`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar with the arithmetic, conversion, serialization, and
/// threading bounds the crate relies on.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar type.
pub fn flt<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts the working scalar into `f64`, e.g. for error reporting.
pub fn to_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().expect("scalar representable as f64")
}
