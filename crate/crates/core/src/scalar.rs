//! Floating point abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Real scalar used for states, function values and constants: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Relative slack applied to sampled inequalities. The `f64` value is
    /// `1e-9`; lower precision types fall back to a multiple of their epsilon.
    fn ineq_rel_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    #[inline]
    fn ineq_rel_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn ineq_rel_tol() -> Self {
        100.0 * f32::EPSILON
    }
}

/// Slack for one inequality `lhs >= rhs`: `rel * (1 + |lhs| + |rhs|)`.
#[inline]
pub fn ineq_tol<S: Scalar>(lhs: S, rhs: S) -> S {
    S::ineq_rel_tol() * (S::one() + lhs.abs() + rhs.abs())
}
