//! Gradient descent and the heavy-ball method, with the per-iterate
//! certificates for their linear rates.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_linear_rate, prefix_above};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::trajectory::{
    CertificateKind, RateCertificate, StopReason, Trajectory, TrajectorySample, RATE_SLACK,
};

pub const DEFAULT_STOP_GRAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Value gaps below this are excluded from envelope checks.
pub const GAP_FLOOR: f64 = 1e-12;
/// Distances below this are excluded from contraction checks.
const DIST_FLOOR: f64 = 1e-10;

/// How `β_k` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum StepRule<S: Scalar> {
    Constant(S),
    /// `β_k = betas[k]`; the last entry repeats once the list runs out.
    Sequence(Vec<S>),
    /// `β* = γ / (2 L₀²)`, the minimizer of the contraction factor.
    OptimalStar { gamma: S, l0: S },
}

impl<S: Scalar> StepRule<S> {
    pub fn beta(&self, k: usize) -> S {
        match self {
            Self::Constant(b) => *b,
            Self::Sequence(bs) => bs[k.min(bs.len() - 1)],
            Self::OptimalStar { gamma, l0 } => optimal_step(*gamma, *l0),
        }
    }

    /// `(β̲, β̄)` over every step the rule can produce.
    pub fn bounds(&self) -> (S, S) {
        match self {
            Self::Sequence(bs) => bs.iter().fold((S::infinity(), S::neg_infinity()), |(lo, hi), &b| {
                (lo.min(b), hi.max(b))
            }),
            _ => (self.beta(0), self.beta(0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match self {
            Self::Sequence(bs) if bs.is_empty() => true,
            _ => {
                let (lo, hi) = self.bounds();
                !(lo > S::zero()) || !hi.is_finite()
            }
        };
        if bad {
            return Err(Error::InvalidParameter(format!("step sizes must be finite and > 0: {self:?}")));
        }
        Ok(())
    }
}

/// `γ / (2 L₀²)`.
pub fn optimal_step<S: Scalar>(gamma: S, l0: S) -> S {
    gamma / (S::lit(2.0) * l0 * l0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GdConfig<S: Scalar> {
    pub x0: Point<S>,
    pub step_rule: StepRule<S>,
    pub max_iters: usize,
    pub stop_grad_tol: S,
}

impl<S: Scalar> GdConfig<S> {
    pub fn new(x0: Point<S>, step_rule: StepRule<S>) -> Self {
        Self { x0, step_rule, max_iters: DEFAULT_MAX_ITERS, stop_grad_tol: S::lit(DEFAULT_STOP_GRAD_TOL) }
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_stop_grad_tol(mut self, tol: S) -> Self {
        self.stop_grad_tol = tol;
        self
    }
}

fn check_start<S: Scalar>(oracle: &FunctionOracle<S>, x: &Point<S>) -> Result<()> {
    if x.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), got: x.dim() });
    }
    if !oracle.domain.contains(x) {
        return Err(Error::DomainViolation(format!("starting point {x} outside the domain")));
    }
    Ok(())
}

fn check_iterate<S: Scalar>(oracle: &FunctionOracle<S>, x: &Point<S>, k: usize) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NumericalBlowup(k as f64));
    }
    if !oracle.domain.contains(x) {
        return Err(Error::DomainExit(k as f64));
    }
    Ok(())
}

fn sample<S: Scalar>(
    k: usize,
    x: &Point<S>,
    value: S,
    grad_norm: S,
    x_bar: Option<&Point<S>>,
    extra: impl IntoIterator<Item = (&'static str, S)>,
) -> TrajectorySample<S> {
    let mut diagnostics: BTreeMap<String, S> = extra.into_iter().map(|(k, v)| (k.to_owned(), v)).collect();
    if let Some(c) = x_bar {
        diagnostics.insert("dist".to_owned(), x.distance(c));
    }
    TrajectorySample {
        time: S::from_usize(k).unwrap(),
        state: x.clone(),
        velocity: None,
        value,
        grad_norm,
        diagnostics,
    }
}

/// `x^{k+1} = x^k - β_k ∇h(x^k)`.
///
/// Stops when `‖∇h(x^k)‖ <= stop_grad_tol`, when `x^{k+1} == x^k` bitwise
/// (the repeated point is not recorded again) or after `max_iters` steps.
/// Every sample except the last carries the step `beta` taken from it.
pub fn gradient_descent<S: Scalar>(oracle: &FunctionOracle<S>, config: &GdConfig<S>) -> Result<Trajectory<S>> {
    config.step_rule.validate()?;
    check_start(oracle, &config.x0)?;
    let x_bar = oracle.known_minimizer().cloned();
    let mut traj = Trajectory::new(x_bar.clone(), oracle.optimal_value().transpose()?);
    let mut x = config.x0.clone();
    let mut k = 0;
    loop {
        let value = oracle.value(&x)?;
        let g = oracle.grad(&x)?;
        let grad_norm = g.norm();
        let stop = if grad_norm <= config.stop_grad_tol {
            Some(StopReason::GradientTolerance)
        } else if k >= config.max_iters {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if stop.is_some() {
            traj.push(sample(k, &x, value, grad_norm, x_bar.as_ref(), []))?;
            traj.stop_reason = stop;
            return Ok(traj);
        }
        let beta = config.step_rule.beta(k);
        traj.push(sample(k, &x, value, grad_norm, x_bar.as_ref(), [("beta", beta)]))?;
        let next = x.axpy(-beta, &g);
        check_iterate(oracle, &next, k + 1)?;
        if next == x {
            traj.stop_reason = Some(StopReason::Stationary);
            return Ok(traj);
        }
        x = next;
        k += 1;
    }
}

fn positive_constants<S: Scalar>(pairs: &[(&str, S)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v > S::zero()) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(())
}

/// Steps recorded on a gradient-descent trajectory.
fn recorded_steps<S: Scalar>(traj: &Trajectory<S>) -> Vec<S> {
    traj.diagnostic_series("beta").into_iter().map_while(|b| b).collect()
}

/// Checks `‖x^{k+1} - x̄‖² <= (1 - β_k(γ - β_k L₀²)) ‖x^k - x̄‖²` at every step
/// and compares the fitted squared-distance factor with
/// `q² = 1 - β̲(γ - β̄ L₀²)`.
///
/// The recorded steps must satisfy `β̄ < min{γ/L₀², 2/L₀}`.
pub fn certify_gd_contraction<S: Scalar>(traj: &Trajectory<S>, gamma: S, l0: S) -> Result<RateCertificate<S>> {
    positive_constants(&[("gamma", gamma), ("L0", l0)])?;
    let x_bar = traj.x_bar.as_ref().ok_or(Error::MissingMinimizer)?;
    let betas = recorded_steps(traj);
    if betas.is_empty() {
        return Err(Error::InsufficientSamples("no steps recorded".into()));
    }
    let lo = betas.iter().copied().fold(S::infinity(), S::min);
    let hi = betas.iter().copied().fold(S::zero(), S::max);
    let window = (gamma / (l0 * l0)).min(S::lit(2.0) / l0);
    if !(hi < window) {
        return Err(Error::ParameterWindowViolation(format!(
            "largest step {hi} is not below min(gamma/L0^2, 2/L0) = {window}"
        )));
    }
    let q2 = S::one() - lo * (gamma - hi * l0 * l0);
    let mut cert = RateCertificate::new(CertificateKind::GdContraction, q2)
        .constant("gamma", gamma)
        .constant("L0", l0)
        .constant("beta_lower", lo)
        .constant("beta_upper", hi)
        .constant("q", q2.sqrt());
    let slack = S::one() + S::lit(RATE_SLACK);
    let d2: Vec<S> = traj.samples.iter().map(|s| s.state.distance(x_bar).powi(2)).collect();
    let floor = S::lit(DIST_FLOOR) * (S::one() + x_bar.norm());
    for (k, &beta) in betas.iter().enumerate() {
        if k + 1 >= d2.len() || d2[k].sqrt() <= floor {
            break;
        }
        let factor = S::one() - beta * (gamma - beta * l0 * l0);
        if d2[k + 1] > factor * d2[k] * slack {
            cert.record_violation(S::from_usize(k).unwrap());
        }
    }
    let keep = prefix_above(&d2, floor * floor);
    if keep >= 3 {
        cert.empirical_rate = fit_linear_rate(&d2[..keep])?;
    }
    Ok(cert.finish())
}

/// Checks the two value envelopes for `k >= 1`:
/// `h(x^k) - h* <= (1 - γ²/(4L₀²))^{k-1} ‖x⁰ - x̄‖²` and
/// `h(x^k) - h* <= (1 - (γ³/4L₀³)(1 - γ/4L₀))^{k-1} (h(x⁰) - h*)`.
///
/// Requires `γ < 2L₀` and every recorded `β_k < γ/L₀²`.
pub fn certify_gd_values<S: Scalar>(traj: &Trajectory<S>, gamma: S, l0: S) -> Result<RateCertificate<S>> {
    positive_constants(&[("gamma", gamma), ("L0", l0)])?;
    let x_bar = traj.x_bar.as_ref().ok_or(Error::MissingMinimizer)?;
    let h_star = traj.h_star.ok_or(Error::MissingMinimizer)?;
    let two = S::lit(2.0);
    let four = S::lit(4.0);
    if !(gamma < two * l0) {
        return Err(Error::ParameterWindowViolation(format!("need gamma < 2 L0, got {gamma} >= {}", two * l0)));
    }
    if let Some(b) = recorded_steps(traj).into_iter().find(|&b| !(b < gamma / (l0 * l0))) {
        return Err(Error::ParameterWindowViolation(format!("step {b} is not below gamma/L0^2")));
    }
    let first = traj.first().ok_or_else(|| Error::InsufficientSamples("empty trajectory".into()))?;
    let d0_sq = first.state.distance(x_bar).powi(2);
    let gap0 = first.value - h_star;
    let f1 = S::one() - gamma * gamma / (four * l0 * l0);
    let f2 = S::one() - gamma.powi(3) / (four * l0.powi(3)) * (S::one() - gamma / (four * l0));
    let mut cert = RateCertificate::new(CertificateKind::GdValue, f1.min(f2))
        .constant("gamma", gamma)
        .constant("L0", l0)
        .constant("distance_factor", f1)
        .constant("value_factor", f2);
    let slack = S::one() + S::lit(RATE_SLACK);
    let floor = S::lit(GAP_FLOOR);
    let gaps: Vec<S> = traj.samples.iter().map(|s| s.value - h_star).collect();
    let (mut distance_misses, mut rescued) = (0usize, 0usize);
    for (k, &gap) in gaps.iter().enumerate().skip(1) {
        if gap < floor {
            continue;
        }
        let e = (k - 1) as i32;
        let distance_bound = f1.powi(e) * d0_sq;
        let distance_ok = gap <= distance_bound * slack;
        if !distance_ok {
            distance_misses += 1;
            rescued += usize::from(gap <= l0 / two * distance_bound * slack);
        }
        if !distance_ok || gap > f2.powi(e) * gap0 * slack {
            cert.record_violation(S::from_usize(k).unwrap());
        }
    }
    if distance_misses > 0 {
        cert.notes.push(format!(
            "{distance_misses} iterates exceed the distance envelope; {rescued} of them are within it once scaled by L0/2"
        ));
    }
    let keep = prefix_above(&gaps, floor);
    if keep >= 3 {
        cert.empirical_rate = fit_linear_rate(&gaps[..keep])?;
    }
    Ok(cert.finish())
}

#[derive(Debug, Clone, Serialize)]
pub struct HbConfig<S: Scalar> {
    pub x0: Point<S>,
    /// `x_{-1}`; equal to `x0` means zero initial momentum.
    pub x_prev: Point<S>,
    pub theta: S,
    pub beta: S,
    pub max_iters: usize,
    pub stop_grad_tol: S,
}

impl<S: Scalar> HbConfig<S> {
    /// Zero initial momentum (`x_prev = x0`).
    pub fn new(x0: Point<S>, theta: S, beta: S) -> Self {
        Self {
            x_prev: x0.clone(),
            x0,
            theta,
            beta,
            max_iters: DEFAULT_MAX_ITERS,
            stop_grad_tol: S::lit(DEFAULT_STOP_GRAD_TOL),
        }
    }

    pub fn with_x_prev(mut self, x_prev: Point<S>) -> Self {
        self.x_prev = x_prev;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_stop_grad_tol(mut self, tol: S) -> Self {
        self.stop_grad_tol = tol;
        self
    }
}

/// `x_{k+1} = x_k + θ(x_k - x_{k-1}) - β∇h(x_k)`.
///
/// Samples carry `step_norm = ‖x_k - x_{k-1}‖` and, with a known minimizer,
/// `energy = h(x_k) - h* + (θ²/2β)‖x_k - x_{k-1}‖²`. `θ = 0` reproduces
/// [`gradient_descent`] bitwise. Stops once `‖∇h(x_k)‖` and `θ‖x_k - x_{k-1}‖`
/// are both within `stop_grad_tol`, when the iteration is bitwise stationary,
/// or after `max_iters` steps.
pub fn heavy_ball<S: Scalar>(oracle: &FunctionOracle<S>, config: &HbConfig<S>) -> Result<Trajectory<S>> {
    let (theta, beta) = (config.theta, config.beta);
    if !(S::zero() <= theta && theta < S::one()) || !(beta > S::zero()) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("need 0 <= theta < 1 and beta > 0, got {theta}, {beta}")));
    }
    check_start(oracle, &config.x0)?;
    check_start(oracle, &config.x_prev)?;
    let x_bar = oracle.known_minimizer().cloned();
    let h_star = oracle.optimal_value().transpose()?;
    let mut traj = Trajectory::new(x_bar.clone(), h_star);
    let (mut prev, mut x) = (config.x_prev.clone(), config.x0.clone());
    let weight = theta * theta / (S::lit(2.0) * beta);
    let mut k = 0;
    loop {
        let value = oracle.value(&x)?;
        let g = oracle.grad(&x)?;
        let grad_norm = g.norm();
        let d = &x - &prev;
        let step_norm = d.norm();
        let mut extra = vec![("step_norm", step_norm)];
        if let Some(h) = h_star {
            extra.push(("energy", value - h + weight * d.norm_sq()));
        }
        traj.push(sample(k, &x, value, grad_norm, x_bar.as_ref(), extra))?;
        if grad_norm <= config.stop_grad_tol && theta * step_norm <= config.stop_grad_tol {
            traj.stop_reason = Some(StopReason::GradientTolerance);
            return Ok(traj);
        }
        if k >= config.max_iters {
            traj.stop_reason = Some(StopReason::MaxIterations);
            return Ok(traj);
        }
        let next = x.axpy(theta, &d).axpy(-beta, &g);
        check_iterate(oracle, &next, k + 1)?;
        if next == x && x == prev {
            traj.stop_reason = Some(StopReason::Stationary);
            return Ok(traj);
        }
        prev = std::mem::replace(&mut x, next);
        k += 1;
    }
}

/// Constants `ρ`, `σ` and the factor `1 - ρ/σ` of the heavy-ball energy
/// recursion. Fails unless `θ ∈ ]0,1[` and `ρ > 0` strictly.
pub fn hb_energy_factor<S: Scalar>(gamma: S, l: S, theta: S, beta: S) -> Result<(S, S, S)> {
    positive_constants(&[("gamma", gamma), ("L", l), ("beta", beta)])?;
    if !(theta > S::zero() && theta < S::one()) {
        return Err(Error::ParameterWindowViolation(format!("theta = {theta} outside ]0, 1[")));
    }
    let two = S::lit(2.0);
    let rho = (beta / two).min((S::one() - beta * l - theta * theta) / (two * beta));
    if !(rho > S::zero()) {
        return Err(Error::ParameterWindowViolation(format!(
            "rho = {rho} is not positive; need beta < (1 - theta^2)/L = {}",
            (S::one() - theta * theta) / l
        )));
    }
    let sigma = (two * l / (gamma * gamma) + beta).max(S::one() / beta);
    Ok((rho, sigma, S::one() - rho / sigma))
}

/// Checks `E_{k+1} <= (1 - ρ/σ) E_k` at every step and the four tail bounds
/// in terms of `E_1 = h(x_0) - h* + (θ²/2β)‖x_1 - x_0‖²`.
pub fn certify_hb_energy<S: Scalar>(
    traj: &Trajectory<S>,
    gamma: S,
    l: S,
    theta: S,
    beta: S,
) -> Result<RateCertificate<S>> {
    let (rho, sigma, factor) = hb_energy_factor(gamma, l, theta, beta)?;
    let x_bar = traj.x_bar.as_ref().ok_or(Error::MissingMinimizer)?;
    let h_star = traj.h_star.ok_or(Error::MissingMinimizer)?;
    if traj.len() < 2 {
        return Err(Error::InsufficientSamples("heavy-ball certificate needs two iterates".into()));
    }
    let energy: Vec<S> = traj
        .diagnostic_series("energy")
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidParameter("trajectory lacks the energy diagnostic".into()))?;
    let s = &traj.samples;
    let two = S::lit(2.0);
    let e1 = s[0].value - h_star + theta * theta / (two * beta) * s[1].state.distance(&s[0].state).powi(2);
    let mut cert = RateCertificate::new(CertificateKind::HbEnergy, factor)
        .constant("gamma", gamma)
        .constant("L", l)
        .constant("theta", theta)
        .constant("beta", beta)
        .constant("rho", rho)
        .constant("sigma", sigma)
        .constant("E1", e1);
    let slack = S::one() + S::lit(RATE_SLACK);
    let floor = S::lit(GAP_FLOOR);
    for k in 0..energy.len() - 1 {
        let bound = factor * energy[k];
        if energy[k] >= floor && energy[k + 1] > bound * slack {
            cert.record_violation(S::from_usize(k).unwrap());
        }
    }
    // tails, indexed as printed: k counts from 0 for the first two, 1 for the last two
    let root = (two / beta).sqrt() * e1.sqrt();
    let mut tail_violations = 0;
    for k in 0..s.len() {
        let kf = S::from_usize(k).unwrap();
        let pow = factor.powf(kf);
        let half_pow = factor.powf((kf - S::one()) / two);
        let mut ok = true;
        if k + 1 < s.len() {
            ok &= s[k + 1].value - h_star <= pow * e1 * slack;
            ok &= s[k + 1].state.distance(&s[k].state).powi(2) <= two * beta / (theta * theta) * pow * e1 * slack;
        }
        ok &= s[k].grad_norm <= (S::one() + theta) / theta * half_pow * root * slack;
        ok &= s[k].state.distance(x_bar) <= two * (S::one() + theta) / (gamma * theta) * half_pow * root * slack;
        if !ok {
            tail_violations += 1;
            cert.record_violation(kf);
        }
    }
    if tail_violations > 0 {
        cert.notes.push(format!("{tail_violations} iterates violate a tail bound"));
    }
    let keep = prefix_above(&energy, floor);
    if keep >= 3 {
        cert.empirical_rate = fit_linear_rate(&energy[..keep])?;
    }
    Ok(cert.finish())
}
