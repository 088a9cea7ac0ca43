//! Function oracles: value and gradient maps plus whatever constants are known.

use std::fmt;
use std::sync::Arc;

use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

pub type ValueFn<S> = Arc<dyn Fn(&Point<S>) -> Result<S> + Send + Sync>;
pub type GradFn<S> = Arc<dyn Fn(&Point<S>) -> Result<Point<S>> + Send + Sync>;
pub type PointPredicate<S> = Arc<dyn Fn(&Point<S>) -> bool + Send + Sync>;

/// Tolerance on `‖∇h(x̄)‖` for a declared minimizer: `1e-8 (1 + ‖x̄‖)`.
pub fn grad_zero_tol<S: Scalar>(x_bar: &Point<S>) -> S {
    let rel = S::lit(1e-8).max(S::lit(1e3) * S::epsilon());
    rel * (S::one() + x_bar.norm())
}

/// A differentiable function `h: R^n -> R` with its gradient.
///
/// Oracles are immutable once built and cheap to clone (closures are shared).
#[derive(Clone)]
pub struct FunctionOracle<S: Scalar> {
    dim: usize,
    value: ValueFn<S>,
    grad: GradFn<S>,
    pub known_modulus: Option<S>,
    pub known_lipschitz: Option<S>,
    known_minimizer: Option<Point<S>>,
    pub domain: DomainSpec<S>,
    sampling_region: DomainKind<S>,
    nonsmooth: Option<PointPredicate<S>>,
}

impl<S: Scalar> FunctionOracle<S> {
    /// Builds an oracle on all of `R^dim`. The sampling region defaults to
    /// the cube `[-2, 2]^dim`; use [`FunctionOracle::with_domain`] or
    /// [`FunctionOracle::with_sampling_region`] to change it.
    pub fn new(
        dim: usize,
        value: impl Fn(&Point<S>) -> Result<S> + Send + Sync + 'static,
        grad: impl Fn(&Point<S>) -> Result<Point<S>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("oracle dimension must be >= 1".into()));
        }
        Ok(Self {
            dim,
            value: Arc::new(value),
            grad: Arc::new(grad),
            known_modulus: None,
            known_lipschitz: None,
            known_minimizer: None,
            domain: DomainSpec::all_space(),
            sampling_region: DomainKind::centered_cube(dim, S::lit(2.0)),
            nonsmooth: None,
        })
    }

    /// Restricts the domain. A bounded domain also becomes the sampling region.
    pub fn with_domain(mut self, domain: DomainSpec<S>) -> Self {
        if domain.kind.is_bounded() {
            self.sampling_region = domain.kind.clone();
        }
        self.domain = domain;
        self
    }

    pub fn with_sampling_region(mut self, region: DomainKind<S>) -> Result<Self> {
        if !region.is_bounded() {
            return Err(Error::InvalidParameter("sampling region must be bounded".into()));
        }
        self.sampling_region = region;
        Ok(self)
    }

    pub fn with_modulus(mut self, gamma: S) -> Result<Self> {
        if !(gamma > S::zero()) {
            return Err(Error::InvalidParameter(format!("modulus must be > 0, got {gamma}")));
        }
        self.known_modulus = Some(gamma);
        Ok(self)
    }

    pub fn with_lipschitz(mut self, l: S) -> Result<Self> {
        if !(l > S::zero()) {
            return Err(Error::InvalidParameter(format!("Lipschitz constant must be > 0, got {l}")));
        }
        self.known_lipschitz = Some(l);
        Ok(self)
    }

    /// Declares the minimizer. Unless the point is flagged nonsmooth, its
    /// gradient norm must not exceed [`grad_zero_tol`].
    pub fn with_minimizer(mut self, x_bar: Point<S>) -> Result<Self> {
        self.check_dim(&x_bar)?;
        if !self.is_nonsmooth(&x_bar) {
            let g = self.grad(&x_bar)?.norm();
            if g > grad_zero_tol(&x_bar) {
                return Err(Error::InvalidParameter(format!(
                    "declared minimizer {x_bar} has gradient norm {g}"
                )));
            }
        }
        self.known_minimizer = Some(x_bar);
        Ok(self)
    }

    /// Marks a set where the gradient is unavailable or ambiguous. Samplers
    /// used by gradient-based checks skip it.
    pub fn with_nonsmooth(mut self, pred: impl Fn(&Point<S>) -> bool + Send + Sync + 'static) -> Self {
        self.nonsmooth = Some(Arc::new(pred));
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_minimizer(&self) -> Option<&Point<S>> {
        self.known_minimizer.as_ref()
    }

    pub fn sampling_region(&self) -> &DomainKind<S> {
        &self.sampling_region
    }

    pub fn is_nonsmooth(&self, x: &Point<S>) -> bool {
        self.nonsmooth.as_ref().is_some_and(|p| p(x))
    }

    fn check_dim(&self, x: &Point<S>) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        Ok(())
    }

    pub fn value(&self, x: &Point<S>) -> Result<S> {
        self.check_dim(x)?;
        (self.value)(x)
    }

    pub fn grad(&self, x: &Point<S>) -> Result<Point<S>> {
        self.check_dim(x)?;
        let g = (self.grad)(x)?;
        self.check_dim(&g)?;
        Ok(g)
    }

    /// `h(x̄)` when the minimizer is known.
    pub fn optimal_value(&self) -> Option<Result<S>> {
        self.known_minimizer.as_ref().map(|x| self.value(x))
    }
}

impl<S: Scalar> fmt::Debug for FunctionOracle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("dim", &self.dim)
            .field("known_modulus", &self.known_modulus)
            .field("known_lipschitz", &self.known_lipschitz)
            .field("known_minimizer", &self.known_minimizer)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square() -> FunctionOracle<f64> {
        FunctionOracle::new(2, |x| Ok(0.5 * x.norm_sq()), |x| Ok(x.clone())).unwrap()
    }

    #[test]
    fn dimension_checked() {
        let o = half_square();
        let bad = Point::from_f64(&[1.0]).unwrap();
        assert!(matches!(o.value(&bad), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(o.grad(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn minimizer_must_be_stationary() {
        let o = half_square();
        assert!(o.clone().with_minimizer(Point::zeros(2)).is_ok());
        let err = o.with_minimizer(Point::from_f64(&[1e-3, 0.0]).unwrap());
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(half_square().with_modulus(0.0).is_err());
        assert!(half_square().with_lipschitz(-1.0).is_err());
    }
}
