//! Scalar abstraction for the exact counting arithmetic.
//!
//! Everything in this crate counts subpixels with exact signed integers;
//! there is no floating point anywhere in the calculus. The arithmetic
//! kernels are generic over the integer type so the same code runs on
//! `i64` (the default used by the CLI and all file formats) or on wider
//! types such as `i128` when extra headroom is wanted. Contrast ratios
//! are exact rationals over the same scalar.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{FromPrimitive, NumAssign, PrimInt, Signed, ToPrimitive};

/// Signed integer scalar: `i32`, `i64` or `i128`.
pub trait CountScalar:
    PrimInt
    + Signed
    + Integer
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Hash
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> CountScalar for T where
    T: PrimInt
        + Signed
        + Integer
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Hash
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Default concrete scalar. All CLI commands and file formats use this type.
pub type Count = i64;

/// Exact contrast value over the default scalar.
pub type Rational = num_rational::Ratio<Count>;

/// 2^e as a scalar. `e` stays far below the word width everywhere this
/// crate calls it (ground sets are capped at 16 elements).
#[inline]
pub fn two_pow<C: CountScalar>(e: u32) -> C {
    C::one() << (e as usize)
}

/// Converts a small unsigned quantity into the scalar type.
#[inline]
pub fn from_u64<C: CountScalar>(v: u64) -> C {
    C::from_u64(v).expect("value exceeds scalar range")
}
