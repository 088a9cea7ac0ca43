//! Empirical estimates of the constants the convergence results take as
//! given: `L₀`, `γ`, `κ` and a reference minimizer.

use serde::Serialize;

use crate::domain::{intersect_boxes, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::sampling::Sampler;
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

/// Upward inflation of sampled Lipschitz constants.
pub const LIPSCHITZ_SAFETY: f64 = 1.1;
/// Downward deflation of sampled moduli and curvature ratios.
pub const MODULUS_SAFETY: f64 = 0.95;
/// `λ` range used by [`empirical_modulus`].
pub const LAMBDA_RANGE: (f64, f64) = (0.05, 0.95);
const MIN_TRIPLES: usize = 10;
const PROBE_POINTS: usize = 200;
const PROBE_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;
const MAX_EXPANSIONS: usize = 20;

pub const REFERENCE_GRAD_TOL: f64 = 1e-12;
pub const REFERENCE_MAX_ITERS: usize = 1_000_000;
pub const REFERENCE_PATIENCE: usize = 10_000;
const REFERENCE_LIPSCHITZ_SAMPLES: usize = 2000;
const REFERENCE_SEED: u64 = 0x00c0_ffee;

/// A sampled constant before and after its safety factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<S: Scalar> {
    pub value: S,
    pub safety_adjusted_value: S,
    /// Pairs, triples or trajectory samples that entered the extremum.
    pub samples: usize,
}

/// Box around the initial sublevel set `{h <= h(x0)}`.
///
/// Centred at the known minimizer (else `x0`) with half-width twice the
/// distance to `x0`; doubled while probe points of the sublevel set land
/// near the box boundary.
fn sublevel_box<S: Scalar>(oracle: &FunctionOracle<S>, x0: &Point<S>, level: S, seed: u64) -> Result<DomainKind<S>> {
    let center = oracle.known_minimizer().cloned().unwrap_or_else(|| x0.clone());
    let mut half = (S::lit(2.0) * x0.distance(&center)).max(S::one());
    let region_box = oracle.sampling_region().bounding_box();
    let domain_box = oracle.domain.kind.bounding_box();
    for _ in 0..MAX_EXPANSIONS {
        let cube = (center.map(|c| c - half), center.map(|c| c + half));
        let clipped = match &domain_box {
            Some(b) => intersect_boxes(&cube, b),
            None => Some(cube.clone()),
        };
        let Some((lo, hi)) = clipped else {
            break;
        };
        let candidate = DomainKind::Box { lower: lo.clone(), upper: hi.clone() };
        let mut probe = Sampler::new(seed ^ PROBE_SEED_MIX);
        let margin = S::lit(0.05) * half;
        let mut near_edge = false;
        for _ in 0..PROBE_POINTS {
            let x = probe.uniform_in(&candidate)?;
            if !oracle.domain.contains(&x) || oracle.value(&x)? > level {
                continue;
            }
            // only edges of the cube itself matter; domain walls bound the set anyway
            near_edge |= (0..x.dim()).any(|i| {
                (x[i] - cube.0[i] < margin && lo[i] == cube.0[i]) || (cube.1[i] - x[i] < margin && hi[i] == cube.1[i])
            });
        }
        if !near_edge {
            return Ok(candidate);
        }
        half = half * S::lit(2.0);
    }
    region_box
        .map(|(lower, upper)| DomainKind::Box { lower, upper })
        .ok_or(Error::DomainSamplingFailure(crate::sampling::MAX_REJECTIONS))
}

/// `L̂₀ = max ‖∇h(x) - ∇h(y)‖ / ‖x - y‖` over `samples` pairs drawn from the
/// sublevel set of `x0`, reported with the 1.1 inflation.
///
/// Pairs are drawn sequentially from one stream, so doubling `samples`
/// extends the earlier pairs and can only raise the estimate.
pub fn estimate_lipschitz_sublevel<S: Scalar>(
    oracle: &FunctionOracle<S>,
    x0: &Point<S>,
    samples: usize,
    seed: u64,
) -> Result<Estimate<S>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let level = oracle.value(x0)?;
    let region = sublevel_box(oracle, x0, level, seed)?;
    let mut sampler = Sampler::new(seed);
    let draw = |sampler: &mut Sampler| -> Result<Point<S>> {
        let mut failure = None;
        let p = sampler.rejection(&region, |x| {
            if !oracle.domain.contains(x) || oracle.is_nonsmooth(x) {
                return false;
            }
            match oracle.value(x) {
                Ok(v) => v <= level,
                Err(e) => {
                    failure.get_or_insert(e);
                    false
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => p,
        }
    };
    let mut best = S::zero();
    let mut used = 0;
    for _ in 0..samples {
        let x = draw(&mut sampler)?;
        let y = draw(&mut sampler)?;
        let d = x.distance(&y);
        if d == S::zero() {
            continue;
        }
        let ratio = (&oracle.grad(&x)? - &oracle.grad(&y)?).norm() / d;
        best = best.max(ratio);
        used += 1;
    }
    Ok(Estimate { value: best, safety_adjusted_value: best * S::lit(LIPSCHITZ_SAFETY), samples: used })
}

/// `γ̂ = min 2(max{h(x),h(y)} - h(λy+(1-λ)x)) / (λ(1-λ)‖x-y‖²)` over
/// `samples` triples with `λ ∈ [0.05, 0.95]`, clamped at 0 and reported
/// with the 0.95 deflation.
///
/// Unbounded regions are cut down to the oracle's sampling region.
pub fn empirical_modulus<S: Scalar>(
    oracle: &FunctionOracle<S>,
    region: &DomainSpec<S>,
    samples: usize,
    seed: u64,
) -> Result<Estimate<S>> {
    let bbox = match region.kind.bounding_box() {
        Some(b) => b,
        None => oracle.sampling_region().bounding_box().expect("sampling regions are bounded"),
    };
    let cube = DomainKind::Box { lower: bbox.0, upper: bbox.1 };
    let inside = |x: &Point<S>| region.contains(x) && oracle.domain.contains(x);
    let mut sampler = Sampler::new(seed);
    let (lo, hi) = (S::lit(LAMBDA_RANGE.0), S::lit(LAMBDA_RANGE.1));
    let two = S::lit(2.0);
    let mut best = S::infinity();
    let mut valid = 0;
    for _ in 0..samples {
        let x = sampler.rejection(&cube, inside)?;
        let y = sampler.rejection(&cube, inside)?;
        let lambda = sampler.uniform(lo, hi);
        let d2 = x.distance(&y).powi(2);
        let mid = x.lerp(&y, lambda);
        if !(d2 > S::zero()) || !inside(&mid) {
            continue;
        }
        let gap = oracle.value(&x)?.max(oracle.value(&y)?) - oracle.value(&mid)?;
        best = best.min(two * gap / (lambda * (S::one() - lambda) * d2));
        valid += 1;
    }
    if valid < MIN_TRIPLES {
        return Err(Error::InsufficientSamples(format!("only {valid} valid triples (need {MIN_TRIPLES})")));
    }
    let value = best.max(S::zero());
    Ok(Estimate { value, safety_adjusted_value: value * S::lit(MODULUS_SAFETY), samples: valid })
}

/// `κ̂ = min ⟨∇h(x(t)), x(t) - x̄⟩ / (h(x(t)) - h(x̄))` along a trajectory,
/// over samples with `h(x(t)) > h(x̄) + 1e-12`, reported with the 0.95 deflation.
pub fn estimate_kappa<S: Scalar>(
    oracle: &FunctionOracle<S>,
    traj: &Trajectory<S>,
    x_bar: &Point<S>,
) -> Result<Estimate<S>> {
    let h_star = oracle.value(x_bar)?;
    let floor = S::lit(1e-12);
    let mut best = S::infinity();
    let mut used = 0;
    for s in &traj.samples {
        let gap = s.value - h_star;
        if !(gap > floor) || oracle.is_nonsmooth(&s.state) {
            continue;
        }
        let inner = oracle.grad(&s.state)?.dot(&(&s.state - x_bar));
        best = best.min(inner / gap);
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientSamples("no trajectory sample above the optimal value".into()));
    }
    Ok(Estimate { value: best, safety_adjusted_value: best * S::lit(MODULUS_SAFETY), samples: used })
}

/// Best iterate of gradient descent with the conservative step `1/(2L̂₀)`.
///
/// Runs until `‖∇h‖ <= 1e-12`, a bitwise fixed point or 10⁶ iterations. Fails
/// with `StagnationFailure` after 10⁴ consecutive iterations that improve
/// neither the best value nor the best gradient norm.
pub fn reference_minimizer<S: Scalar>(oracle: &FunctionOracle<S>, x0: &Point<S>) -> Result<Point<S>> {
    let l = estimate_lipschitz_sublevel(oracle, x0, REFERENCE_LIPSCHITZ_SAMPLES, REFERENCE_SEED)?;
    if !(l.safety_adjusted_value > S::zero()) {
        // locally constant gradient: any stationary point will do
        return if oracle.grad(x0)?.norm() <= S::lit(REFERENCE_GRAD_TOL) {
            Ok(x0.clone())
        } else {
            Err(Error::UnverifiedPremise("gradient is constant and nonzero near x0, so there is no minimizer to approach".into()))
        };
    }
    let beta = S::one() / (S::lit(2.0) * l.safety_adjusted_value);
    let tol = S::lit(REFERENCE_GRAD_TOL);
    let mut x = x0.clone();
    let mut best_x = x.clone();
    let mut best_h = oracle.value(&x)?;
    let mut best_g = S::infinity();
    let mut idle = 0;
    for k in 0..REFERENCE_MAX_ITERS {
        let h = oracle.value(&x)?;
        let g = oracle.grad(&x)?;
        let gn = g.norm();
        let mut improved = false;
        if h < best_h || (h == best_h && gn < best_g) {
            best_h = h;
            best_x = x.clone();
            improved = true;
        }
        if gn < best_g {
            best_g = gn;
            improved = true;
        }
        if gn <= tol {
            return Ok(x);
        }
        idle = if improved { 0 } else { idle + 1 };
        if idle >= REFERENCE_PATIENCE {
            return Err(Error::StagnationFailure(idle));
        }
        let next = x.axpy(-beta, &g);
        if !next.is_finite() {
            return Err(Error::NumericalBlowup(k as f64));
        }
        if next == x {
            return Ok(best_x);
        }
        x = next;
    }
    Ok(best_x)
}
