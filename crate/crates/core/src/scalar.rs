//! Scalar abstraction for the coefficient field.
//!
//! Everything in the crate is generic over [`Scalar`], with two impls:
//! `f64` for the main floating-point path and [`Rational`] for the exact
//! mode used by oracle tests and `--exact` campaigns. Exact mode has no
//! transcendental functions; the `try_*` hooks return `None` there and the
//! callers surface [`Error::ExactModeUnsupported`].
//!
//! [`Error::ExactModeUnsupported`]: crate::error::Error::ExactModeUnsupported

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar used by the exact mode.
pub type Rational = num_rational::BigRational;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Exact conversion: every finite `f64` is a dyadic rational.
    fn from_f64(x: f64) -> Self;

    fn from_i64(x: i64) -> Self;

    /// Exact where the scalar type allows it (`f64` rounds to nearest).
    fn from_rational(r: &Rational) -> Self;

    /// Nearest `f64`; used for norms, pivot selection and reports.
    fn to_f64(&self) -> f64;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn try_sin(&self) -> Option<Self>;
    fn try_cos(&self) -> Option<Self>;
    fn try_exp(&self) -> Option<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_i64(x: i64) -> Self {
        x as f64
    }

    fn from_rational(r: &Rational) -> Self {
        Scalar::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn try_sin(&self) -> Option<Self> {
        Some(self.sin())
    }

    fn try_cos(&self) -> Option<Self> {
        Some(self.cos())
    }

    fn try_exp(&self) -> Option<Self> {
        Some(self.exp())
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("non-finite float cannot become a rational")
    }

    fn from_i64(x: i64) -> Self {
        Rational::from_integer(x.into())
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back to a quotient of approximations for huge operands.
            self.numer().to_f64().unwrap_or(f64::INFINITY) / self.denom().to_f64().unwrap_or(1.0)
        })
    }

    fn abs_f64(&self) -> f64 {
        Scalar::to_f64(&Signed::abs(self))
    }

    fn try_sin(&self) -> Option<Self> {
        None
    }

    fn try_cos(&self) -> Option<Self> {
        None
    }

    fn try_exp(&self) -> Option<Self> {
        None
    }
}

/// Exact small rational as a scalar, e.g. `ratio(1, 16)`.
pub fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    S::from_rational(&Rational::new(num.into(), den.into()))
}
