//! Seeded sample streams over domains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::domain::DomainKind;
use crate::error::{Error, Result};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::scalar::Scalar;

/// Consecutive rejections tolerated before a sampler gives up.
pub const MAX_REJECTIONS: usize = 1000;

/// How many sampled pairs (or points) a check evaluates, and from which stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleBudget {
    pub pairs: usize,
    pub lambdas_per_pair: usize,
    pub seed: u64,
}

impl SampleBudget {
    pub fn new(pairs: usize, lambdas_per_pair: usize, seed: u64) -> Result<Self> {
        if pairs == 0 || lambdas_per_pair == 0 {
            return Err(Error::InvalidParameter("sample budget counts must be >= 1".into()));
        }
        Ok(Self { pairs, lambdas_per_pair, seed })
    }

    pub fn pairs(pairs: usize, seed: u64) -> Self {
        Self { pairs: pairs.max(1), lambdas_per_pair: 4, seed }
    }
}

/// Deterministic sampler: identical seeds give identical streams, and a
/// longer run always extends a shorter one (prefix property).
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn unit<S: Scalar>(&mut self) -> S {
        S::lit(self.rng.random::<f64>())
    }

    pub fn uniform<S: Scalar>(&mut self, lo: S, hi: S) -> S {
        lo + (hi - lo) * self.unit::<S>()
    }

    /// Uniform point in a bounded region.
    pub fn uniform_in<S: Scalar>(&mut self, region: &DomainKind<S>) -> Result<Point<S>> {
        match region {
            DomainKind::AllSpace => {
                Err(Error::InvalidParameter("cannot sample uniformly from all of R^n".into()))
            }
            DomainKind::Box { lower, upper } => Ok(Point::raw(
                lower
                    .as_slice()
                    .iter()
                    .zip(upper.as_slice())
                    .map(|(&l, &u)| self.uniform(l, u))
                    .collect(),
            )),
            DomainKind::Ball { center, radius } => {
                let n = center.dim();
                let dir: Vec<f64> = (0..n).map(|_| self.rng.sample(StandardNormal)).collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let r = self.rng.random::<f64>().powf(1.0 / n as f64);
                let coords = center
                    .as_slice()
                    .iter()
                    .zip(&dir)
                    .map(|(&c, &d)| c + *radius * S::lit(r * d / norm))
                    .collect();
                Ok(Point::raw(coords))
            }
        }
    }

    /// Uniform point of `region` accepted by `accept`, by rejection.
    pub fn rejection<S: Scalar>(
        &mut self,
        region: &DomainKind<S>,
        mut accept: impl FnMut(&Point<S>) -> bool,
    ) -> Result<Point<S>> {
        for _ in 0..MAX_REJECTIONS {
            let p = self.uniform_in(region)?;
            if accept(&p) {
                return Ok(p);
            }
        }
        Err(Error::DomainSamplingFailure(MAX_REJECTIONS))
    }

    /// Uniform point of the oracle's sampling region that lies in its domain.
    /// With `smooth`, points flagged nonsmooth are rejected as well.
    pub fn domain_point<S: Scalar>(&mut self, oracle: &FunctionOracle<S>, smooth: bool) -> Result<Point<S>> {
        let region = oracle.sampling_region().clone();
        self.rejection(&region, |p| oracle.domain.contains(p) && !(smooth && oracle.is_nonsmooth(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let region = DomainKind::ball(Point::<f64>::zeros(3), 2.0).unwrap();
        let mut a = Sampler::new(9);
        let mut b = Sampler::new(9);
        for _ in 0..20 {
            assert_eq!(a.uniform_in(&region).unwrap(), b.uniform_in(&region).unwrap());
        }
    }

    #[test]
    fn ball_samples_inside() {
        let region = DomainKind::ball(Point::from_f64(&[1.0, -1.0]).unwrap(), 0.5).unwrap();
        let mut s = Sampler::new(1);
        for _ in 0..1000 {
            assert!(region.contains(&s.uniform_in(&region).unwrap()));
        }
    }

    #[test]
    fn impossible_acceptance_fails() {
        let region = DomainKind::<f64>::centered_cube(1, 1.0);
        let mut s = Sampler::new(0);
        assert_eq!(s.rejection(&region, |_| false), Err(Error::DomainSamplingFailure(MAX_REJECTIONS)));
    }
}
