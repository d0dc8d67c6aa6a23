//! Scalar abstraction: the numeric core is generic over the float type.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the numeric core: f32 or f64.
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for converting an f64 constant into the working scalar type.
#[inline]
pub(crate) fn cast<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Probability-mass tolerance: 1e-12 for f64, widened for coarser scalars.
#[inline]
pub(crate) fn mass_tol<F: Real>() -> F {
    let base = cast::<F>(1e-12);
    let eps = F::epsilon() * cast::<F>(64.0);
    if eps > base {
        eps
    } else {
        base
    }
}

/// Entries below this are treated as exact zeros inside entropy sums.
#[inline]
pub(crate) fn zero_mass_cutoff<F: Real>() -> F {
    let base = cast::<F>(1e-15);
    let eps = F::epsilon();
    if eps > base {
        eps
    } else {
        base
    }
}
