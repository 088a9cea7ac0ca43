//! Convex domains and sampling regions.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

/// Geometric shape of a domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind<S: Scalar> {
    AllSpace,
    Ball { center: Point<S>, radius: S },
    Box { lower: Point<S>, upper: Point<S> },
}

impl<S: Scalar> DomainKind<S> {
    pub fn ball(center: Point<S>, radius: S) -> Result<Self> {
        if !(radius > S::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn cube(lower: Point<S>, upper: Point<S>) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch { expected: lower.dim(), got: upper.dim() });
        }
        if lower.as_slice().iter().zip(upper.as_slice()).any(|(l, u)| l > u) {
            return Err(Error::InvalidParameter("box lower bound exceeds upper bound".into()));
        }
        Ok(Self::Box { lower, upper })
    }

    /// The box `[-half, half]^dim`.
    pub fn centered_cube(dim: usize, half: S) -> Self {
        Self::Box { lower: Point::filled(dim, -half), upper: Point::filled(dim, half) }
    }

    pub fn contains(&self, x: &Point<S>) -> bool {
        match self {
            Self::AllSpace => true,
            Self::Ball { center, radius } => x.distance(center) <= *radius,
            Self::Box { lower, upper } => x
                .as_slice()
                .iter()
                .zip(lower.as_slice().iter().zip(upper.as_slice()))
                .all(|(c, (l, u))| l <= c && c <= u),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Self::AllSpace)
    }

    /// Smallest axis-aligned box containing the region.
    pub fn bounding_box(&self) -> Option<(Point<S>, Point<S>)> {
        match self {
            Self::AllSpace => None,
            Self::Ball { center, radius } => {
                Some((center.map(|c| c - *radius), center.map(|c| c + *radius)))
            }
            Self::Box { lower, upper } => Some((lower.clone(), upper.clone())),
        }
    }
}

/// Membership predicate layered on top of a [`DomainKind`].
pub type Constraint<S> = Arc<dyn Fn(&Point<S>) -> bool + Send + Sync>;

/// Domain of a function: a shape plus an optional extra membership test
/// (used for implicitly defined sets such as `{m <= g <= M}`).
#[derive(Clone)]
pub struct DomainSpec<S: Scalar> {
    pub kind: DomainKind<S>,
    constraint: Option<(String, Constraint<S>)>,
}

impl<S: Scalar> DomainSpec<S> {
    pub fn all_space() -> Self {
        Self { kind: DomainKind::AllSpace, constraint: None }
    }

    pub fn from_kind(kind: DomainKind<S>) -> Self {
        Self { kind, constraint: None }
    }

    pub fn with_constraint(
        mut self,
        description: impl Into<String>,
        test: impl Fn(&Point<S>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.constraint = Some((description.into(), Arc::new(test)));
        self
    }

    pub fn contains(&self, x: &Point<S>) -> bool {
        self.kind.contains(x) && self.constraint.as_ref().map_or(true, |(_, c)| c(x))
    }

    pub fn constraint_description(&self) -> Option<&str> {
        self.constraint.as_ref().map(|(d, _)| d.as_str())
    }

    /// Intersection of two domains. The shape of the bounded operand is kept
    /// and the other one becomes part of the membership predicate.
    pub fn intersect(&self, other: &Self) -> Self {
        let (primary, secondary) = match (&self.kind, &other.kind) {
            (DomainKind::AllSpace, _) => (other, self),
            _ => (self, other),
        };
        if matches!(secondary.kind, DomainKind::AllSpace) && secondary.constraint.is_none() {
            return primary.clone();
        }
        let a = primary.clone();
        let b = secondary.clone();
        let kind = a.kind.clone();
        let description = format!("intersection of two domains");
        Self {
            kind,
            constraint: Some((description, Arc::new(move |x: &Point<S>| a.contains(x) && b.contains(x)))),
        }
    }
}

impl<S: Scalar> fmt::Debug for DomainSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("kind", &self.kind)
            .field("constraint", &self.constraint_description())
            .finish()
    }
}

impl<S: Scalar> Serialize for DomainSpec<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        #[derive(Serialize)]
        struct Repr<'a, S: Scalar> {
            #[serde(flatten)]
            kind: &'a DomainKind<S>,
            #[serde(skip_serializing_if = "Option::is_none")]
            constraint: Option<&'a str>,
        }
        Repr { kind: &self.kind, constraint: self.constraint_description() }.serialize(serializer)
    }
}

/// Intersection of two axis-aligned boxes, `None` when empty.
pub(crate) fn intersect_boxes<S: Scalar>(
    a: &(Point<S>, Point<S>),
    b: &(Point<S>, Point<S>),
) -> Option<(Point<S>, Point<S>)> {
    let lo: Vec<S> = a.0.as_slice().iter().zip(b.0.as_slice()).map(|(&x, &y)| x.max(y)).collect();
    let hi: Vec<S> = a.1.as_slice().iter().zip(b.1.as_slice()).map(|(&x, &y)| x.min(y)).collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return None;
    }
    Some((Point::raw(lo), Point::raw(hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point<f64> {
        Point::from_f64(v).unwrap()
    }

    #[test]
    fn membership_is_exact() {
        let ball = DomainKind::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert!(ball.contains(&p(&[1.0, 0.0])));
        assert!(!ball.contains(&p(&[1.0, 1e-7])));
        let cube = DomainKind::cube(p(&[-1.0, 0.0]), p(&[1.0, 2.0])).unwrap();
        assert!(cube.contains(&p(&[-1.0, 2.0])));
        assert!(!cube.contains(&p(&[0.0, -1e-12])));
    }

    #[test]
    fn invalid_shapes() {
        assert!(DomainKind::ball(p(&[0.0]), 0.0).is_err());
        assert!(DomainKind::cube(p(&[1.0]), p(&[0.0])).is_err());
    }

    #[test]
    fn constraint_and_intersection() {
        let d = DomainSpec::all_space().with_constraint("x0 >= 0", |x: &Point<f64>| x[0] >= 0.0);
        assert!(d.contains(&p(&[0.5])));
        assert!(!d.contains(&p(&[-0.5])));
        let ball = DomainSpec::from_kind(DomainKind::ball(p(&[0.0]), 1.0).unwrap());
        let both = d.intersect(&ball);
        assert!(both.kind.is_bounded());
        assert!(both.contains(&p(&[0.9])));
        assert!(!both.contains(&p(&[-0.2])));
        assert!(!both.contains(&p(&[1.2])));
    }
}
