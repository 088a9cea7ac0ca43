mod common;

use common::p;
use proptest::prelude::*;
use sqcflow_core::catalog;
use sqcflow_core::estimate::estimate_lipschitz_sublevel;
use sqcflow_core::solvers::{
    certify_gd_contraction, gradient_descent, heavy_ball, optimal_step,
};
use sqcflow_core::{GdConfig, HbConfig, StepRule, StopReason, Trajectory};

/// Checks descent, the iterate form of the gradient characterization and
/// sublevel membership along a GD run.
fn check_run(traj: &Trajectory<f64>, oracle: &sqcflow_core::Oracle64, gamma: f64, l: f64) -> Result<(), TestCaseError> {
    let x_bar = oracle.known_minimizer().unwrap();
    let h0 = traj.samples[0].value;
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let beta = a.diagnostic("beta").unwrap();
        let decrease = a.value - b.value;
        let bound = beta * (1.0 - beta * l / 2.0) * a.grad_norm * a.grad_norm;
        prop_assert!(decrease >= bound - 1e-12 * (1.0 + a.value.abs()), "descent at t={}", a.time);
    }
    for s in &traj.samples {
        prop_assert!(s.value <= h0 + 1e-12 * (1.0 + h0.abs()));
        let g = oracle.grad(&s.state).unwrap();
        let d = x_bar - &s.state;
        let lhs = g.dot(&d);
        let rhs = -0.5 * gamma * d.norm_sq();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gd_on_quadratic(x in -3.0f64..3.0, y in -3.0f64..3.0, frac in 0.05f64..0.99) {
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let beta = frac * 2.0 / 4.0;
        let cfg = GdConfig::new(p(&[x, y]), StepRule::Constant(beta)).with_max_iters(300);
        let traj = gradient_descent(&e.oracle, &cfg).unwrap();
        check_run(&traj, &e.oracle, 1.0, 4.0)?;
    }

    #[test]
    fn gd_on_sin_quadratic(x in -3.0f64..3.0, frac in 0.05f64..0.99) {
        // h'' = 2 + 6 cos 2x <= 8; the characterization holds with any modulus below ~0.69
        let e = catalog::sin_quadratic::<f64>();
        let beta = frac * 2.0 / 8.0;
        let cfg = GdConfig::new(p(&[x]), StepRule::Constant(beta)).with_max_iters(300);
        let traj = gradient_descent(&e.oracle, &cfg).unwrap();
        check_run(&traj, &e.oracle, 0.6, 8.0)?;
    }

    #[test]
    fn heavy_ball_without_momentum_is_gd(x in -3.0f64..3.0, y in -3.0f64..3.0, beta in 0.01f64..0.45) {
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let gd = gradient_descent(&e.oracle, &GdConfig::new(p(&[x, y]), StepRule::Constant(beta)).with_max_iters(100)).unwrap();
        let hb = heavy_ball(&e.oracle, &HbConfig::new(p(&[x, y]), 0.0, beta).with_max_iters(100)).unwrap();
        prop_assert_eq!(gd.len(), hb.len());
        for (a, b) in gd.samples.iter().zip(&hb.samples) {
            prop_assert_eq!(&a.state, &b.state);
        }
    }
}

#[test]
fn fixed_point_stop_means_vanishing_step() {
    let e = catalog::half_square::<f64>(1).unwrap();
    let cfg = GdConfig::new(p(&[1e-100]), StepRule::Constant(1e-20)).with_stop_grad_tol(0.0);
    let traj = gradient_descent(&e.oracle, &cfg).unwrap();
    assert_eq!(traj.stop_reason, Some(StopReason::Stationary));
    let last = traj.last().unwrap();
    assert!(1e-20 * last.grad_norm <= f64::EPSILON * last.state.norm());
}

#[test]
fn sqrt_norm_with_estimated_constant() {
    let e = catalog::sqrt_norm::<f64>(2, 1.0).unwrap();
    let x0 = p(&[0.5, 0.5]);
    let gamma = e.gamma().unwrap();
    let l0 = estimate_lipschitz_sublevel(&e.oracle, &x0, 2000, 42).unwrap().safety_adjusted_value;
    let cfg = GdConfig::new(x0.clone(), StepRule::OptimalStar { gamma, l0 }).with_max_iters(5000);
    let traj = gradient_descent(&e.oracle, &cfg).unwrap();
    assert_eq!(cfg.step_rule.beta(0), optimal_step(gamma, l0));
    let last = traj.last().unwrap();
    assert!(last.state.norm() < x0.norm());
    let cert = certify_gd_contraction(&traj, gamma, l0).unwrap();
    assert!(cert.satisfied, "{cert:?}");
}
