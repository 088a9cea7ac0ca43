//! Dense real vectors.

use std::fmt;
use std::ops::{Add, Index, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of `R^n` with finite coordinates.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point<S> {
    coords: Vec<S>,
}

impl<S: Scalar> Point<S> {
    /// Builds a point, rejecting empty or non-finite input.
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point dimension must be >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { coords })
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| S::lit(c)).collect())
    }

    /// Result of arithmetic on finite points; may hold non-finite values,
    /// which integrators and solvers detect with [`Point::is_finite`].
    pub(crate) fn raw(coords: Vec<S>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![S::zero(); dim] }
    }

    pub fn filled(dim: usize, value: S) -> Self {
        Self { coords: vec![value; dim] }
    }

    /// Unit vector along axis `i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[i] = S::one();
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<S> {
        self.coords
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.as_f64()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords.iter().zip(&other.coords).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn norm(&self) -> S {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.coords.iter().fold(S::zero(), |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, a: S) -> Self {
        Self::raw(self.coords.iter().map(|&c| a * c).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: S, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::raw(self.coords.iter().zip(&other.coords).map(|(&x, &y)| x + a * y).collect())
    }

    /// `(1 - lambda) * self + lambda * other`.
    pub fn lerp(&self, other: &Self, lambda: S) -> Self {
        let mu = S::one() - lambda;
        Self::raw(self.coords.iter().zip(&other.coords).map(|(&x, &y)| mu * x + lambda * y).collect())
    }

    pub fn distance(&self, other: &Self) -> S {
        (self - other).norm()
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::raw(self.coords.iter().map(|&c| f(c)).collect())
    }

    /// Copy with coordinate `i` replaced.
    pub fn with_coord(&self, i: usize, value: S) -> Self {
        let mut p = self.clone();
        p.coords[i] = value;
        p
    }

    /// Converts between scalar types.
    pub fn cast<T: Scalar>(&self) -> Point<T> {
        Point::raw(self.coords.iter().map(|c| T::lit(c.as_f64())).collect())
    }
}

impl<S> Index<usize> for Point<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.coords[i]
    }
}

impl<S: Scalar> Add for &Point<S> {
    type Output = Point<S>;
    fn add(self, rhs: Self) -> Point<S> {
        Point::raw(self.coords.iter().zip(&rhs.coords).map(|(&a, &b)| a + b).collect())
    }
}

impl<S: Scalar> Sub for &Point<S> {
    type Output = Point<S>;
    fn sub(self, rhs: Self) -> Point<S> {
        Point::raw(self.coords.iter().zip(&rhs.coords).map(|(&a, &b)| a - b).collect())
    }
}

impl<S: fmt::Debug> fmt::Debug for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coords).finish()
    }
}

impl<S: fmt::Display> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
