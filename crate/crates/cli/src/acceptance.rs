//! The ten acceptance criteria, each reduced to a pass/fail line.

use std::path::Path;
use std::time::{Duration, Instant};

use sqcflow_core::catalog;
use sqcflow_core::estimate::{empirical_modulus, estimate_lipschitz_sublevel};
use sqcflow_core::flows::{
    certify_first_order, certify_second_order, integrate_first_order, integrate_second_order,
};
use sqcflow_core::solvers::{
    certify_gd_contraction, certify_gd_values, certify_hb_energy, gradient_descent, hb_energy_factor, heavy_ball,
};
use sqcflow_core::verify::{check_pl, check_property, Property};
use sqcflow_core::{
    ineq_tol, DomainKind, DomainSpec, Entry64, FlowConfig, GdConfig, HbConfig, Integrator, LyapunovParams, Point64,
    SampleBudget, StepRule, Trajectory64,
};

use crate::bench;
use crate::error::CliResult;
use crate::experiment::{run_experiment, ExperimentConfig, Task, MODULUS_SAMPLES};

const SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn p(v: &[f64]) -> Point64 {
    Point64::from_f64(v).expect("finite literal")
}

fn timed<T>(f: impl FnOnce() -> CliResult<T>) -> CliResult<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

fn verdict(id: u32, name: &'static str, r: CliResult<(bool, String)>) -> CriterionResult {
    match r {
        Ok((passed, detail)) => CriterionResult { id, name, passed, detail },
        Err(e) => CriterionResult { id, name, passed: false, detail: format!("error: {e}") },
    }
}

fn sqc_and_characterization(e: &Entry64, gamma: f64, budget: &SampleBudget) -> CliResult<(bool, String)> {
    let sqc = check_property(&e.oracle, Property::StrongQuasiconvexity(gamma), budget)?;
    let chr = check_property(&e.oracle, Property::GradientCharacterization(gamma), budget)?;
    let ok = sqc.holds_on_samples && chr.holds_on_samples;
    Ok((ok, format!("{} (gamma={gamma:.4}): {}+{} violations", e.name, sqc.violations_found, chr.violations_found)))
}

/// Sampled strong quasiconvexity and its gradient characterization on the modulus catalog.
pub fn criterion_1() -> CriterionResult {
    verdict(1, "sampled class membership", (|| {
        let budget = SampleBudget::pairs(10_000, SEED);
        let sin_q = catalog::sin_quadratic();
        let region = DomainSpec::from_kind(DomainKind::centered_cube(1, 3.0));
        let sin_gamma = empirical_modulus(&sin_q.oracle, &region, MODULUS_SAMPLES, SEED)?.safety_adjusted_value;
        let sqrt = catalog::sqrt_norm(2, 1.0)?;
        let sqrt_gamma = sqrt.gamma().expect("catalog modulus");
        let entries: Vec<(Entry64, f64)> = vec![
            (catalog::strongly_convex_quadratic(2, 1.0, 4.0)?, 1.0),
            (sqrt, sqrt_gamma),
            (sin_q, sin_gamma),
            (catalog::quadratic_fraction_example(2.0)?, 1.0 / 3.0),
            (
                catalog::max_combine(
                    &catalog::strongly_convex_quadratic(2, 1.0, 4.0)?,
                    &catalog::shifted_half_square(p(&[1.0, 0.0]))?,
                )?,
                1.0,
            ),
        ];
        let (results, elapsed) = timed(|| {
            entries.iter().map(|(e, g)| sqc_and_characterization(e, *g, &budget)).collect::<CliResult<Vec<_>>>()
        })?;
        let ok = results.iter().all(|r| r.0) && elapsed < Duration::from_secs(10);
        let mut detail: Vec<String> = results.into_iter().map(|r| r.1).collect();
        detail.push(format!("{:.2}s", elapsed.as_secs_f64()));
        Ok((ok, detail.join("; ")))
    })())
}

/// PL holds on both entries; the non-unique-minimizer one is refuted as strongly quasiconvex,
/// reproducibly.
pub fn criterion_2() -> CriterionResult {
    verdict(2, "PL without strong quasiconvexity", (|| {
        let budget = SampleBudget::pairs(10_000, SEED);
        let hs = catalog::half_square::<f64>(1)?;
        let pl_hs = check_pl(&hs.oracle, 0.5, &budget)?;
        let e = catalog::pl_without_uniqueness();
        let pl_e = check_pl(&e.oracle, 1.0, &budget)?;
        let prop = Property::StrongQuasiconvexity(0.1);
        let sqc = check_property(&e.oracle, prop, &budget)?;
        let again = check_property(&e.oracle, prop, &budget)?;
        let same = serde_json::to_string(&sqc)? == serde_json::to_string(&again)?;
        let mut revalidated = !sqc.violations.is_empty();
        for w in &sqc.violations {
            revalidated &= prop.evaluate(&e.oracle, &w.x, &w.y, w.lambda)?.is_some_and(|q| q.violated());
        }
        let ok = pl_hs.holds_on_samples && pl_e.holds_on_samples && !sqc.holds_on_samples && same && revalidated;
        Ok((
            ok,
            format!(
                "PL(0.5) on half_square: {}; PL(1) on {}: {}; SQC(0.1) violations: {}; reproducible: {same}; witnesses re-evaluate: {revalidated}",
                pl_hs.holds_on_samples, e.name, pl_e.holds_on_samples, sqc.violations_found
            ),
        ))
    })())
}

/// First-order flow distance envelope and fitted exponent.
pub fn criterion_3() -> CriterionResult {
    verdict(3, "first-order flow rate", (|| {
        let e = catalog::strongly_convex_quadratic(2, 1.0, 4.0)?;
        let cfg = FlowConfig::first_order(p(&[1.0, 1.0]), 10.0, 1e-3).with_integrator(Integrator::Rk4);
        let (traj, elapsed) = timed(|| Ok(integrate_first_order(&e.oracle, &cfg)?))?;
        let cert = certify_first_order(&traj, 1.0, &p(&[0.0, 0.0]))?;
        let ok = cert.satisfied && cert.empirical_rate >= 0.95 && elapsed < Duration::from_secs(5);
        Ok((
            ok,
            format!(
                "violations {}, exponent {:.4} (>= 0.95), {:.2}s",
                cert.violations,
                cert.empirical_rate,
                elapsed.as_secs_f64()
            ),
        ))
    })())
}

fn c4_runs() -> CliResult<(Trajectory64, f64, Trajectory64, Duration)> {
    let start = Instant::now();
    let e = catalog::strongly_convex_quadratic(3, 1.0, 4.0)?;
    let x0 = p(&[1.0, 1.0, 1.0]);
    let l0 = estimate_lipschitz_sublevel(&e.oracle, &x0, 2000, SEED)?.safety_adjusted_value;
    let quad = gradient_descent(&e.oracle, &GdConfig::new(x0, StepRule::OptimalStar { gamma: 1.0, l0 }))?;
    let hs = catalog::half_square::<f64>(1)?;
    let half = gradient_descent(&hs.oracle, &GdConfig::new(p(&[1.0]), StepRule::Constant(0.5)).with_max_iters(40))?;
    Ok((quad, l0, half, start.elapsed()))
}

/// GD contraction with the optimal step, and the exact factor on ½x².
pub fn criterion_4() -> CriterionResult {
    verdict(4, "gradient descent contraction", (|| {
        let (quad, l0, half, elapsed) = c4_runs()?;
        let cert = certify_gd_contraction(&quad, 1.0, l0)?;
        let bound = 1.0 - 1.0 / (4.0 * l0 * l0) + 0.05;
        let quad_ok = cert.violations == 0 && cert.empirical_rate <= bound;
        let half_cert = certify_gd_contraction(&half, 1.0, 1.0)?;
        let d2: Vec<f64> = half.samples.iter().map(|s| s.state[0] * s.state[0]).collect();
        let ratios_exact = d2.windows(2).filter(|w| w[0] > 0.0).all(|w| w[1] / w[0] == 0.25);
        let half_ok = ratios_exact && half_cert.theoretical_rate == 0.75 && half_cert.satisfied;
        let ok = quad_ok && half_ok && elapsed < Duration::from_secs(2);
        Ok((
            ok,
            format!(
                "L0_hat {l0:.4}: empirical {:.4} <= {bound:.4}, violations {}; half_square ratios all 0.25: {ratios_exact}, bound {}; {:.2}s",
                cert.empirical_rate,
                cert.violations,
                half_cert.theoretical_rate,
                elapsed.as_secs_f64()
            ),
        ))
    })())
}

/// Value envelopes on the criterion 4 runs.
pub fn criterion_5() -> CriterionResult {
    verdict(5, "gradient descent value envelopes", (|| {
        let (quad, l0, half, _) = c4_runs()?;
        let a = certify_gd_values(&quad, 1.0, l0)?;
        let b = certify_gd_values(&half, 1.0, 1.0)?;
        Ok((
            a.satisfied && b.satisfied,
            format!("quadratic violations {}, half_square violations {}", a.violations, b.violations),
        ))
    })())
}

/// Heavy-ball energy decrease with the closed-form constants.
pub fn criterion_6() -> CriterionResult {
    verdict(6, "heavy-ball energy", (|| {
        let e = catalog::half_square::<f64>(1)?;
        let (theta, beta) = (0.5, 0.5);
        let (rho, sigma, factor) = hb_energy_factor(1.0, 1.0, theta, beta)?;
        let consts_ok = (rho, sigma, factor) == (0.25, 2.5, 0.9);
        let cfg = HbConfig::new(p(&[1.0]), theta, beta)
            .with_x_prev(p(&[1.0]))
            .with_max_iters(200)
            .with_stop_grad_tol(0.0);
        let (traj, elapsed) = timed(|| Ok(heavy_ball(&e.oracle, &cfg)?))?;
        let energy: Vec<f64> = traj.diagnostic_series("energy").into_iter().flatten().collect();
        let direct = energy.len() == traj.len()
            && energy.windows(2).all(|w| w[1] <= factor * w[0] + ineq_tol(w[1], factor * w[0]));
        let cert = certify_hb_energy(&traj, 1.0, 1.0, theta, beta)?;
        Ok((
            consts_ok && direct && cert.satisfied && elapsed < Duration::from_secs(1),
            format!(
                "(rho, sigma, factor) = ({rho}, {sigma}, {factor}); direct decrease over {} steps: {direct}; certificate violations {}; {:.2}s",
                energy.len().saturating_sub(1),
                cert.violations,
                elapsed.as_secs_f64()
            ),
        ))
    })())
}

/// Second-order flow Lyapunov decay.
pub fn criterion_7() -> CriterionResult {
    verdict(7, "second-order flow Lyapunov decay", (|| {
        let e = catalog::strongly_convex_quadratic(2, 1.0, 4.0)?;
        let (gamma, kappa, alpha): (f64, f64, f64) = (1.0, 0.25, 3.0);
        let lyap = LyapunovParams::new(gamma, kappa, alpha)?;
        let expected = (gamma / (2.0 * kappa)).sqrt().min(2.0 * alpha / (kappa + 4.0));
        let lambda_ok = (lyap.lambda - expected).abs() <= 1e-12;
        let cfg = FlowConfig::second_order(p(&[1.0, 1.0]), p(&[0.0, 0.0]), alpha, 20.0, 1e-3)
            .with_integrator(Integrator::Rk4);
        let (traj, elapsed) = timed(|| Ok(integrate_second_order(&e.oracle, &cfg, Some(lyap))?))?;
        let cert = certify_second_order(&traj, &lyap)?;
        Ok((
            lambda_ok && cert.satisfied && elapsed < Duration::from_secs(5),
            format!(
                "lambda {:.5} (expected {expected:.5}); violations {}; empirical {:.4} vs {:.4}; {:.2}s",
                lyap.lambda,
                cert.violations,
                cert.empirical_rate,
                cert.theoretical_rate,
                elapsed.as_secs_f64()
            ),
        ))
    })())
}

/// Largest distance between heavy-ball iterates and the damped flow at `t = kη`.
fn hb_flow_gap(eta: f64) -> CliResult<f64> {
    let e = catalog::half_square::<f64>(2)?;
    let x0 = p(&[1.0, 1.0]);
    let steps = (1.0 / eta).round() as usize;
    let cfg = HbConfig::new(x0.clone(), 1.0 - 3.0 * eta, eta * eta)
        .with_x_prev(x0.clone())
        .with_max_iters(steps)
        .with_stop_grad_tol(0.0);
    let hb = heavy_ball(&e.oracle, &cfg)?;
    let dt = 1e-4;
    let every = (eta / dt).round() as usize;
    let flow_cfg = FlowConfig::second_order(x0, Point64::zeros(2), 3.0, 1.0, dt)
        .with_integrator(Integrator::Rk4)
        .with_record_every(every);
    let flow = integrate_second_order(&e.oracle, &flow_cfg, None)?;
    let mut gap: f64 = 0.0;
    let mut matched = 0;
    for (k, s) in hb.samples.iter().enumerate() {
        let t = k as f64 * eta;
        if let Some(f) = flow.samples.iter().find(|f| (f.time - t).abs() < dt / 2.0) {
            gap = gap.max(s.state.axpy(-1.0, &f.state).max_abs());
            matched += 1;
        }
    }
    if matched != hb.len() {
        return Err(crate::error::CliError::usage(format!("matched {matched} of {} heavy-ball iterates", hb.len())));
    }
    Ok(gap)
}

/// Heavy-ball as a discretization of the damped flow: first-order convergence in η.
pub fn criterion_8() -> CriterionResult {
    verdict(8, "heavy-ball tracks the damped flow", (|| {
        let coarse = hb_flow_gap(0.01)?;
        let fine = hb_flow_gap(0.005)?;
        let ratio = coarse / fine;
        Ok((
            coarse <= 0.05 && (1.5..=3.0).contains(&ratio),
            format!("gap(0.01) {coarse:.5} (<= 0.05), gap(0.005) {fine:.5}, ratio {ratio:.3} (in [1.5, 3])"),
        ))
    })())
}

/// The implication ladder suite over the catalog.
pub fn criterion_9() -> CriterionResult {
    verdict(9, "implication ladder suite", (|| {
        let summary = bench::run_suite("ladder", &std::env::temp_dir(), SEED)?;
        let failed: Vec<&str> = summary.rows.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
        let has_refutation = summary.rows.iter().any(|r| r.id.contains("strong_monotonicity refuted"));
        Ok((
            failed.is_empty() && has_refutation,
            if failed.is_empty() {
                format!("{} rows pass, sqrt_norm monotonicity refutation present: {has_refutation}", summary.rows.len())
            } else {
                format!("failing rows: {}", failed.join(", "))
            },
        ))
    })())
}

fn determinism_configs() -> Vec<(&'static str, ExperimentConfig)> {
    vec![
        ("verify", ExperimentConfig::new("sqrt_norm(dim=2)", Task::Verify).param("pairs", 2000)),
        ("flow1", ExperimentConfig::new("quadratic(dim=2,gamma=1,L=4)", Task::Flow).param("t_end", 2.0).param("record_every", 10)),
        (
            "flow2",
            ExperimentConfig::new("quadratic(dim=2,gamma=1,L=4)", Task::Flow)
                .param("order", 2)
                .param("t_end", 2.0)
                .param("record_every", 10),
        ),
        ("gd", ExperimentConfig::new("sin_quadratic", Task::Gd).param("max_iters", 200)),
        ("hb", ExperimentConfig::new("half_square(dim=1)", Task::Hb).param("theta", 0.5).param("beta", 0.5)),
        ("estimate", ExperimentConfig::new("sqrt_norm(dim=2)", Task::Estimate).param("constant", "L0")),
    ]
}

/// Two runs per config with the same seed produce byte-identical artifacts.
pub fn criterion_10(scratch: &Path) -> CriterionResult {
    verdict(10, "byte-identical reruns", (|| {
        let mut differing = Vec::new();
        for (name, cfg) in determinism_configs() {
            for run in ["a", "b"] {
                run_experiment(&cfg.clone().with_seed(SEED).with_output_dir(scratch.join(run).join(name)))?;
            }
            for file in ["trace.csv", "certificate.json"] {
                let a = std::fs::read(scratch.join("a").join(name).join(file))?;
                let b = std::fs::read(scratch.join("b").join(name).join(file))?;
                if a != b {
                    differing.push(format!("{name}/{file}"));
                }
            }
        }
        let n = determinism_configs().len();
        Ok((
            differing.is_empty(),
            if differing.is_empty() { format!("{n} configs identical") } else { format!("differ: {}", differing.join(", ")) },
        ))
    })())
}

/// Runs all criteria; `scratch` holds the reruns of criterion 10.
pub fn run_all(scratch: &Path) -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(scratch),
    ]
}
