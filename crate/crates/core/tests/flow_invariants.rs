mod common;

use common::p;
use proptest::prelude::*;
use sqcflow_core::catalog;
use sqcflow_core::flows::{integrate_first_order, integrate_second_order};
use sqcflow_core::{FlowConfig, LyapunovParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_order_dissipates_energy(x in -3.0f64..3.0) {
        let e = catalog::sin_quadratic::<f64>();
        let dt = 1e-3;
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(p(&[x]), 2.0, dt)).unwrap();
        for w in traj.samples.windows(2) {
            prop_assert!(w[1].value <= w[0].value + 1e-9);
            // dh/dt = -‖∇h‖², compared at the interval midpoint
            let slope = (w[1].value - w[0].value) / (w[1].time - w[0].time);
            let g2 = 0.5 * (w[0].grad_norm.powi(2) + w[1].grad_norm.powi(2));
            prop_assert!((slope + g2).abs() <= 100.0 * dt * (1.0 + g2), "t = {}", w[0].time);
        }
    }

    #[test]
    fn second_order_lyapunov_is_nonincreasing(x in -2.0f64..2.0, y in -2.0f64..2.0, alpha in 1.0f64..4.0) {
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let lyap = LyapunovParams::new(1.0, 0.25, alpha).unwrap();
        let cfg = FlowConfig::second_order(p(&[x, y]), p(&[0.0, 0.0]), alpha, 5.0, 1e-3);
        let traj = integrate_second_order(&e.oracle, &cfg, Some(lyap)).unwrap();
        let sigma: Vec<f64> = traj.diagnostic_series("Sigma").into_iter().map(Option::unwrap).collect();
        for w in sigma.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }
}

#[test]
fn quadratic_flow_samples_stay_finite_and_in_domain() {
    for e in catalog::modulus_entries::<f64>().unwrap() {
        if e.oracle.known_minimizer().is_none() || e.name.contains("sqrt_norm") {
            continue;
        }
        let x0 = e.oracle.sampling_region().bounding_box().unwrap().1.scale(0.5);
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(x0, 3.0, 1e-3)).unwrap();
        for s in &traj.samples {
            assert!(s.state.is_finite() && e.oracle.domain.contains(&s.state), "{}", e.name);
        }
        assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
    }
}
