//! Scalar abstraction: all numerics are generic over a real field.
//!
//! The concrete lanes are `f32` and `f64`; everything downstream (states,
//! channels, Fisher information, sweeps) is written against [`Real`] so the
//! scalar type is chosen once at the call site. The crate root exports
//! `f64` type aliases for the common case.

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate: a nalgebra real field that is
/// `Copy` and converts to/from `f64` for constants and I/O.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync
{
}

impl<T> Real for T where
    T: nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync
{
}

/// Lift an `f64` constant into the working scalar type.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite f64 constant must be representable")
}

/// Lower a working scalar to `f64` (for formatting and reports).
#[inline]
pub fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().expect("real scalar must convert to f64")
}
