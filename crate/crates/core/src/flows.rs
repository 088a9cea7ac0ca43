//! Gradient flows `ẋ = -∇h(x)` and `ẍ + αẋ + ∇h(x) = 0`, integrated with
//! fixed steps, plus the exponential envelopes that certify their decay.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_decay_exponent, prefix_above};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::scalar::Scalar;
use crate::trajectory::{
    CertificateKind, RateCertificate, StopReason, Trajectory, TrajectorySample, RATE_SLACK,
};

/// Gaps `h(x(t)) - h*` below this are excluded from envelope checks.
pub const ENVELOPE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "order", rename_all = "snake_case")]
pub enum FlowKind<S: Scalar> {
    FirstOrder,
    SecondOrder { alpha: S, v0: Point<S> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    ExplicitEuler,
    Rk4,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowConfig<S: Scalar> {
    pub kind: FlowKind<S>,
    pub x0: Point<S>,
    pub t_end: S,
    pub dt: S,
    pub integrator: Integrator,
    /// Record every n-th step (the first and last states are always kept).
    pub record_every: usize,
    /// Stop once `‖x - x̄‖` drops to this radius (needs a known minimizer).
    pub stop_radius: Option<S>,
}

impl<S: Scalar> FlowConfig<S> {
    pub fn first_order(x0: Point<S>, t_end: S, dt: S) -> Self {
        Self {
            kind: FlowKind::FirstOrder,
            x0,
            t_end,
            dt,
            integrator: Integrator::Rk4,
            record_every: 1,
            stop_radius: None,
        }
    }

    pub fn second_order(x0: Point<S>, v0: Point<S>, alpha: S, t_end: S, dt: S) -> Self {
        Self { kind: FlowKind::SecondOrder { alpha, v0 }, ..Self::first_order(x0, t_end, dt) }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    pub fn with_stop_radius(mut self, radius: S) -> Self {
        self.stop_radius = Some(radius);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end > S::zero()) || !(self.dt > S::zero()) || self.dt > self.t_end {
            return Err(Error::InvalidParameter(format!(
                "need 0 < dt <= t_end, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        if let FlowKind::SecondOrder { alpha, v0 } = &self.kind {
            if !(*alpha > S::zero()) {
                return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
            }
            if v0.dim() != self.x0.dim() {
                return Err(Error::DimensionMismatch { expected: self.x0.dim(), got: v0.dim() });
            }
        }
        Ok(())
    }
}

/// `1e-3 · min{1, 1/L}`.
pub fn default_dt<S: Scalar>(l: Option<S>) -> S {
    S::lit(1e-3) * l.map_or(S::one(), |l| S::one().min(S::one() / l))
}

/// Constants of the second-order Lyapunov function
/// `Σ = h - h* + ½‖λ(x-x̄) + ẋ‖² + (ξ/2)‖x-x̄‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovParams<S: Scalar> {
    pub lambda: S,
    pub xi: S,
    pub kappa: S,
}

impl<S: Scalar> LyapunovParams<S> {
    /// Largest admissible choice `λ = min{√(γ/2κ), 2α/(κ+4)}`, `ξ = λ²`.
    pub fn new(gamma: S, kappa: S, alpha: S) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("kappa", kappa), ("alpha", alpha)] {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let two = S::lit(2.0);
        let lambda = (gamma / (two * kappa)).sqrt().min(two * alpha / (kappa + S::lit(4.0)));
        Ok(Self { lambda, xi: lambda * lambda, kappa })
    }

    /// Decay exponent `λκ/2` of `Σ`.
    pub fn decay_rate(&self) -> S {
        self.lambda * self.kappa / S::lit(2.0)
    }

    fn sigma(&self, h_gap: S, dx: &Point<S>, v: &Point<S>) -> S {
        let half = S::lit(0.5);
        h_gap + half * dx.scale(self.lambda).axpy(S::one(), v).norm_sq() + half * self.xi * dx.norm_sq()
    }
}

/// Number of steps and the time reached after each one.
fn step_times<S: Scalar>(t_end: S, dt: S) -> (usize, impl Fn(usize) -> S) {
    let ratio = (t_end / dt).as_f64();
    let n = (ratio - 1e-9).ceil().max(1.0) as usize;
    (n, move |k: usize| if k >= n { t_end } else { dt * S::from_usize(k).unwrap() })
}

fn rk4_step<S: Scalar>(
    f: &impl Fn(&[Point<S>]) -> Result<Vec<Point<S>>>,
    y: &[Point<S>],
    h: S,
) -> Result<Vec<Point<S>>> {
    let half = S::lit(0.5);
    let shift = |k: &[Point<S>], a: S| -> Vec<Point<S>> { y.iter().zip(k).map(|(yi, ki)| yi.axpy(a, ki)).collect() };
    let k1 = f(y)?;
    let k2 = f(&shift(&k1, half * h))?;
    let k3 = f(&shift(&k2, half * h))?;
    let k4 = f(&shift(&k3, h))?;
    let sixth = h / S::lit(6.0);
    Ok(y
        .iter()
        .enumerate()
        .map(|(i, yi)| {
            let incr = k1[i].axpy(S::lit(2.0), &k2[i]).axpy(S::lit(2.0), &k3[i]).axpy(S::one(), &k4[i]);
            yi.axpy(sixth, &incr)
        })
        .collect())
}

fn euler_step<S: Scalar>(
    f: &impl Fn(&[Point<S>]) -> Result<Vec<Point<S>>>,
    y: &[Point<S>],
    h: S,
) -> Result<Vec<Point<S>>> {
    let k = f(y)?;
    Ok(y.iter().zip(&k).map(|(yi, ki)| yi.axpy(h, ki)).collect())
}

struct Recorder<'a, S: Scalar> {
    oracle: &'a FunctionOracle<S>,
    traj: Trajectory<S>,
    lyap: Option<LyapunovParams<S>>,
}

impl<S: Scalar> Recorder<'_, S> {
    fn record(&mut self, t: S, x: &Point<S>, v: Option<&Point<S>>) -> Result<()> {
        let value = self.oracle.value(x)?;
        let grad_norm = self.oracle.grad(x)?.norm();
        let mut diagnostics = BTreeMap::new();
        if let (Some(x_bar), Some(h_star)) = (&self.traj.x_bar, self.traj.h_star) {
            let dx = x - x_bar;
            diagnostics.insert("dist".to_owned(), dx.norm());
            match (v, &self.lyap) {
                (None, _) => {
                    diagnostics.insert("E".to_owned(), S::lit(0.5) * dx.norm_sq());
                }
                (Some(v), Some(lyap)) => {
                    diagnostics.insert("Sigma".to_owned(), lyap.sigma(value - h_star, &dx, v));
                }
                _ => {}
            }
        }
        if let Some(v) = v {
            diagnostics.insert("v_norm".to_owned(), v.norm());
        }
        self.traj.push(TrajectorySample {
            time: t,
            state: x.clone(),
            velocity: v.cloned(),
            value,
            grad_norm,
            diagnostics,
        })
    }
}

fn integrate<S: Scalar>(
    oracle: &FunctionOracle<S>,
    config: &FlowConfig<S>,
    lyap: Option<LyapunovParams<S>>,
) -> Result<Trajectory<S>> {
    config.validate()?;
    if config.x0.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), got: config.x0.dim() });
    }
    if !oracle.domain.contains(&config.x0) {
        return Err(Error::DomainViolation(format!("x0 = {} outside the domain", config.x0)));
    }
    let x_bar = oracle.known_minimizer().cloned();
    let h_star = oracle.optimal_value().transpose()?;
    if (lyap.is_some() || config.stop_radius.is_some()) && x_bar.is_none() {
        return Err(Error::MissingMinimizer);
    }
    let alpha = match &config.kind {
        FlowKind::FirstOrder => None,
        FlowKind::SecondOrder { alpha, .. } => Some(*alpha),
    };
    let rhs = |y: &[Point<S>]| -> Result<Vec<Point<S>>> {
        let g = oracle.grad(&y[0])?;
        Ok(match alpha {
            None => vec![g.scale(-S::one())],
            Some(a) => vec![y[1].clone(), y[1].scale(-a).axpy(-S::one(), &g)],
        })
    };
    let mut y = match &config.kind {
        FlowKind::FirstOrder => vec![config.x0.clone()],
        FlowKind::SecondOrder { v0, .. } => vec![config.x0.clone(), v0.clone()],
    };
    let mut rec = Recorder { oracle, traj: Trajectory::new(x_bar.clone(), h_star), lyap };
    rec.record(S::zero(), &y[0], y.get(1))?;
    let within_radius = |x: &Point<S>| match (&config.stop_radius, &x_bar) {
        (Some(r), Some(c)) => x.distance(c) <= *r,
        _ => false,
    };
    if within_radius(&y[0]) {
        rec.traj.stop_reason = Some(StopReason::StopRadius);
        return Ok(rec.traj);
    }
    let (n, time) = step_times(config.t_end, config.dt);
    for k in 1..=n {
        let t = time(k);
        let h = t - time(k - 1);
        y = match config.integrator {
            Integrator::Rk4 => rk4_step(&rhs, &y, h)?,
            Integrator::ExplicitEuler => euler_step(&rhs, &y, h)?,
        };
        if !y.iter().all(Point::is_finite) {
            return Err(Error::NumericalBlowup(t.as_f64()));
        }
        if !oracle.domain.contains(&y[0]) {
            return Err(Error::DomainExit(t.as_f64()));
        }
        let stop = within_radius(&y[0]);
        if stop || k == n || k % config.record_every == 0 {
            rec.record(t, &y[0], y.get(1))?;
        }
        if stop {
            rec.traj.stop_reason = Some(StopReason::StopRadius);
            return Ok(rec.traj);
        }
    }
    rec.traj.stop_reason = Some(StopReason::TimeHorizon);
    Ok(rec.traj)
}

/// Integrates `ẋ = -∇h(x)`. With a known minimizer every sample carries
/// `dist = ‖x - x̄‖` and `E = ½‖x - x̄‖²`.
pub fn integrate_first_order<S: Scalar>(
    oracle: &FunctionOracle<S>,
    config: &FlowConfig<S>,
) -> Result<Trajectory<S>> {
    if config.kind != FlowKind::FirstOrder {
        return Err(Error::InvalidParameter("integrate_first_order needs a first-order config".into()));
    }
    integrate(oracle, config, None)
}

/// Integrates `ẍ + αẋ + ∇h(x) = 0` as the system `ẋ = v`, `v̇ = -αv - ∇h(x)`.
/// With `lyap` set (minimizer required) every sample carries `Sigma`.
pub fn integrate_second_order<S: Scalar>(
    oracle: &FunctionOracle<S>,
    config: &FlowConfig<S>,
    lyap: Option<LyapunovParams<S>>,
) -> Result<Trajectory<S>> {
    if config.kind == FlowKind::FirstOrder {
        return Err(Error::InvalidParameter("integrate_second_order needs a second-order config".into()));
    }
    integrate(oracle, config, lyap)
}

fn gap_ok<S: Scalar>(sample: &TrajectorySample<S>, h_star: Option<S>) -> bool {
    h_star.map_or(true, |h| sample.value - h >= S::lit(ENVELOPE_FLOOR))
}

/// Checks `‖x(t) - x̄‖ <= ‖x₀ - x̄‖ e^{-γt/2}` (with [`RATE_SLACK`]) and fits
/// the decay exponent of the distance.
pub fn certify_first_order<S: Scalar>(
    traj: &Trajectory<S>,
    gamma: S,
    x_bar: &Point<S>,
) -> Result<RateCertificate<S>> {
    if !(gamma > S::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let first = traj.first().ok_or_else(|| Error::InsufficientSamples("empty trajectory".into()))?;
    let half = S::lit(0.5);
    let slack = S::one() + S::lit(RATE_SLACK);
    let d0 = first.state.distance(x_bar);
    let mut cert = RateCertificate::new(CertificateKind::FlowFirst, half * gamma)
        .constant("gamma", gamma)
        .constant("initial_distance", d0);
    let mut times = Vec::new();
    let mut dists = Vec::new();
    for s in &traj.samples {
        if !gap_ok(s, traj.h_star) {
            continue;
        }
        let d = s.state.distance(x_bar);
        if d > d0 * (-half * gamma * s.time).exp() * slack {
            cert.record_violation(s.time);
        }
        times.push(s.time);
        dists.push(d);
    }
    let keep = prefix_above(&dists, S::zero());
    if keep >= 3 {
        cert.empirical_rate = fit_decay_exponent(&times[..keep], &dists[..keep])?;
    }
    Ok(cert.finish())
}

/// Where the Lipschitz constant handed to [`certify_first_order_values`] is valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum LipschitzScope<S: Scalar> {
    /// On the whole initial sublevel set: the envelope applies from `t = 0`.
    Sublevel,
    /// Only within `radius` of the minimizer: applies once the flow is inside.
    Local { radius: S },
}

/// Checks `h(x(t)) - h* <= min{(L/2)‖x₀ - x̄‖ e^{-γt/2}, (h(x₀) - h*) e^{-γ²t/(2L)}}`
/// for `t >= T`, with `T` fixed by `scope`.
pub fn certify_first_order_values<S: Scalar>(
    traj: &Trajectory<S>,
    gamma: S,
    l: S,
    x_bar: &Point<S>,
    scope: LipschitzScope<S>,
) -> Result<RateCertificate<S>> {
    if !(gamma > S::zero()) || !(l > S::zero()) {
        return Err(Error::InvalidParameter(format!("need gamma, L > 0, got {gamma}, {l}")));
    }
    let h_star = traj.h_star.ok_or(Error::MissingMinimizer)?;
    let first = traj.first().ok_or_else(|| Error::InsufficientSamples("empty trajectory".into()))?;
    let (half, two) = (S::lit(0.5), S::lit(2.0));
    let slack = S::one() + S::lit(RATE_SLACK);
    let d0 = first.state.distance(x_bar);
    let gap0 = first.value - h_star;
    let fast = half * gamma;
    let slow = gamma * gamma / (two * l);
    let t_start = match scope {
        LipschitzScope::Sublevel => S::zero(),
        LipschitzScope::Local { radius } => traj
            .samples
            .iter()
            .find(|s| s.state.distance(x_bar) <= radius)
            .map_or(S::infinity(), |s| s.time),
    };
    let mut cert = RateCertificate::new(CertificateKind::FlowFirstValues, fast.max(slow))
        .constant("gamma", gamma)
        .constant("L", l)
        .constant("T", t_start);
    let mut times = Vec::new();
    let mut gaps = Vec::new();
    for s in traj.samples.iter().filter(|s| s.time >= t_start && gap_ok(s, Some(h_star))) {
        let gap = s.value - h_star;
        let bound = (half * l * d0 * (-fast * s.time).exp()).min(gap0 * (-slow * s.time).exp());
        if gap > bound * slack {
            cert.record_violation(s.time);
        }
        times.push(s.time);
        gaps.push(gap);
    }
    if gaps.len() >= 3 {
        cert.empirical_rate = fit_decay_exponent(&times, &gaps)?;
    }
    if t_start.is_infinite() {
        cert.notes.push("trajectory never entered the region where L is valid".to_owned());
    }
    Ok(cert.finish())
}

/// Checks `Σ(t) <= Σ(0) e^{-λκt/2}` on a trajectory carrying `Sigma`.
pub fn certify_second_order<S: Scalar>(
    traj: &Trajectory<S>,
    lyap: &LyapunovParams<S>,
) -> Result<RateCertificate<S>> {
    let series: Vec<S> = traj
        .diagnostic_series("Sigma")
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidParameter("trajectory lacks the Sigma diagnostic".into()))?;
    let sigma0 = *series.first().ok_or_else(|| Error::InsufficientSamples("empty trajectory".into()))?;
    let rate = lyap.decay_rate();
    let slack = S::one() + S::lit(RATE_SLACK);
    let mut cert = RateCertificate::new(CertificateKind::FlowSecond, rate)
        .constant("lambda", lyap.lambda)
        .constant("xi", lyap.xi)
        .constant("kappa", lyap.kappa)
        .constant("sigma0", sigma0);
    let floor = S::lit(ENVELOPE_FLOOR);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (s, &sigma) in traj.samples.iter().zip(&series) {
        if sigma < floor {
            continue;
        }
        if sigma > sigma0 * (-rate * s.time).exp() * slack {
            cert.record_violation(s.time);
        }
        times.push(s.time);
        values.push(sigma);
    }
    if values.len() >= 3 {
        cert.empirical_rate = fit_decay_exponent(&times, &values)?;
    }
    Ok(cert.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_abs_diff_eq;

    fn p(v: &[f64]) -> Point<f64> {
        Point::from_f64(v).unwrap()
    }

    #[test]
    fn linear_flow_matches_closed_form() {
        let e = catalog::half_square::<f64>(1).unwrap();
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[1.0]), 5.0, 1e-3)).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(last.time, 5.0);
        assert_abs_diff_eq!(last.state[0], (-5.0f64).exp(), epsilon = 1e-6);
        assert_eq!(traj.len(), 5001);
        assert_eq!(traj.stop_reason, Some(StopReason::TimeHorizon));
    }

    #[test]
    fn fitted_exponent_of_scaled_quadratic() {
        let e = catalog::strongly_convex_quadratic::<f64>(1, 2.0, 2.0).unwrap();
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[1.0]), 5.0, 1e-3)).unwrap();
        let cert = certify_first_order(&traj, 2.0, &p(&[0.0])).unwrap();
        assert_abs_diff_eq!(cert.empirical_rate, 2.0, epsilon = 1e-6);
        assert!(cert.satisfied);
    }

    #[test]
    fn sin_quadratic_values_decrease() {
        let e = catalog::sin_quadratic::<f64>();
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[2.0]), 5.0, 1e-3)).unwrap();
        assert!(traj.values().windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn overdamped_second_order() {
        // x'' + 3x' + x = 0, x(0) = 1, x'(0) = 0: roots r = (-3 ± √5)/2
        let e = catalog::half_square::<f64>(1).unwrap();
        let cfg = FlowConfig::second_order(p(&[1.0]), p(&[0.0]), 3.0, 5.0, 1e-3);
        let lyap = LyapunovParams::new(1.0, 1.0, 3.0).unwrap();
        let traj = integrate_second_order(&e.oracle, &cfg, Some(lyap)).unwrap();
        let (r1, r2) = ((-3.0 + 5f64.sqrt()) / 2.0, (-3.0 - 5f64.sqrt()) / 2.0);
        let (c1, c2) = (r2 / (r2 - r1), -r1 / (r2 - r1));
        let exact = |t: f64| c1 * (r1 * t).exp() + c2 * (r2 * t).exp();
        for s in traj.samples.iter().step_by(500) {
            assert_abs_diff_eq!(s.state[0], exact(s.time), epsilon = 1e-9);
        }
        let sigma: Vec<f64> = traj.diagnostic_series("Sigma").into_iter().map(Option::unwrap).collect();
        assert!(sigma.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn constant_function_second_order() {
        let zero = FunctionOracle::new(1, |_| Ok(0.0), |_| Ok(Point::zeros(1))).unwrap();
        let cfg = FlowConfig::second_order(p(&[0.5]), p(&[1.0]), 1.0, 2.0, 1e-3);
        let traj = integrate_second_order(&zero, &cfg, None).unwrap();
        for s in &traj.samples {
            assert_abs_diff_eq!(s.velocity.as_ref().unwrap()[0], (-s.time).exp(), epsilon = 1e-12);
            assert_abs_diff_eq!(s.state[0], 0.5 + 1.0 - (-s.time).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn lyapunov_constants() {
        let l = LyapunovParams::new(1.0, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(l.lambda, 0.5f64.sqrt());
        assert_eq!(l.xi, l.lambda * l.lambda);
        let l = LyapunovParams::new(1.0, 0.25, 3.0).unwrap();
        assert_abs_diff_eq!(l.lambda, 6.0 / 4.25, epsilon = 1e-15);
        assert!(LyapunovParams::new(1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn second_order_envelope_on_quadratic() {
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let lyap = LyapunovParams::new(1.0, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(lyap.lambda, 0.5f64.sqrt().min(6.0 / 5.0));
        let cfg = FlowConfig::second_order(p(&[1.0, 1.0]), p(&[0.0, 0.0]), 3.0, 10.0, 1e-3);
        let traj = integrate_second_order(&e.oracle, &cfg, Some(lyap)).unwrap();
        let cert = certify_second_order(&traj, &lyap).unwrap();
        assert!(cert.satisfied, "{cert:?}");
    }

    #[test]
    fn value_envelope_examples() {
        let e = catalog::half_square::<f64>(1).unwrap();
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[1.0]), 8.0, 1e-3)).unwrap();
        let x_bar = p(&[0.0]);
        let ok = certify_first_order_values(&traj, 1.0, 1.0, &x_bar, LipschitzScope::Sublevel).unwrap();
        assert!(ok.satisfied);
        let bad = certify_first_order_values(&traj, 10.0, 1.0, &x_bar, LipschitzScope::Sublevel).unwrap();
        assert!(!bad.satisfied);
        assert!(bad.first_violation.unwrap() > 0.0);
    }

    #[test]
    fn local_scope_starts_inside_radius() {
        let e = catalog::half_square::<f64>(1).unwrap();
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[1.0]), 3.0, 1e-2)).unwrap();
        let cert = certify_first_order_values(&traj, 1.0, 1.0, &p(&[0.0]), LipschitzScope::Local { radius: 0.5 })
            .unwrap();
        assert_abs_diff_eq!(cert.constants["T"], 0.7, epsilon = 1e-9);
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let e = catalog::linear(p(&[-1.0])).unwrap();
        let o = e.oracle.with_domain(crate::domain::DomainSpec::from_kind(
            crate::domain::DomainKind::centered_cube(1, 1.0),
        ));
        let err = integrate_first_order(&o, &FlowConfig::first_order(p(&[0.0]), 5.0, 1e-2)).unwrap_err();
        match err {
            Error::DomainExit(t) => assert!((1.0 - 1e-9..=1.01 + 1e-9).contains(&t), "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn euler_is_first_order_rk4_fourth() {
        let e = catalog::half_square::<f64>(1).unwrap();
        let exact = (-1.0f64).exp();
        let end = |dt: f64, integ| {
            let cfg = FlowConfig::first_order(p(&[1.0]), 1.0, dt).with_integrator(integ);
            (integrate_first_order(&e.oracle, &cfg).unwrap().last().unwrap().state[0] - exact).abs()
        };
        let euler = end(1e-2, Integrator::ExplicitEuler) / end(5e-3, Integrator::ExplicitEuler);
        assert!((euler - 2.0).abs() < 0.1, "{euler}");
        let rk4 = end(1e-1, Integrator::Rk4) / end(5e-2, Integrator::Rk4);
        assert!((rk4 - 16.0).abs() < 1.0, "{rk4}");
    }

    #[test]
    fn invalid_configs() {
        let e = catalog::half_square::<f64>(1).unwrap();
        assert!(integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[1.0]), 1.0, 2.0)).is_err());
        let cfg = FlowConfig::second_order(p(&[1.0]), p(&[0.0, 0.0]), 1.0, 1.0, 0.1);
        assert!(integrate_second_order(&e.oracle, &cfg, None).is_err());
        assert_eq!(default_dt::<f64>(Some(4.0)), 2.5e-4);
        assert_eq!(default_dt::<f64>(None), 1e-3);
    }
}
