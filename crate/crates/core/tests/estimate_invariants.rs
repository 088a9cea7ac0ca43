mod common;

use common::p;
use proptest::prelude::*;
use sqcflow_core::catalog;
use sqcflow_core::estimate::{empirical_modulus, estimate_kappa, estimate_lipschitz_sublevel};
use sqcflow_core::flows::integrate_first_order;
use sqcflow_core::{DomainSpec, FlowConfig};

#[test]
fn modulus_never_exceeds_lipschitz_by_much() {
    for e in catalog::modulus_entries::<f64>().unwrap() {
        let region = DomainSpec::from_kind(e.oracle.sampling_region().clone());
        let g = empirical_modulus(&e.oracle, &region, 5000, 42).unwrap();
        let x0 = e.oracle.sampling_region().bounding_box().unwrap().1.scale(0.5);
        let l = estimate_lipschitz_sublevel(&e.oracle, &x0, 2000, 42).unwrap();
        assert!(g.value <= 1.2 * l.value, "{}: gamma {} vs L {}", e.name, g.value, l.value);
        // the step window of the contraction estimate is nonempty
        let (gs, ls) = (g.safety_adjusted_value, l.safety_adjusted_value);
        if gs > 0.0 {
            assert!((gs / (ls * ls)).min(2.0 / ls) > 0.0);
        }
    }
}

#[test]
fn kappa_of_convex_and_known_entries() {
    for e in [
        catalog::half_square::<f64>(2).unwrap(),
        catalog::strongly_convex_quadratic(2, 1.0, 4.0).unwrap(),
        catalog::strongly_convex_quadratic(3, 1.0, 4.0).unwrap(),
    ] {
        let x0 = p(&vec![1.0; e.oracle.dim()]);
        let traj = integrate_first_order(&e.oracle, &FlowConfig::first_order(x0, 5.0, 1e-2)).unwrap();
        let k = estimate_kappa(&e.oracle, &traj, e.oracle.known_minimizer().unwrap()).unwrap();
        assert!(k.safety_adjusted_value >= 0.95, "{}: {k:?}", e.name);
        let bound = e.gamma().unwrap() / e.lipschitz().unwrap();
        assert!(k.safety_adjusted_value >= 0.95 * bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn doubling_samples_refines_monotonically(seed in 0u64..10_000, n in 20usize..400) {
        let e = catalog::sin_quadratic::<f64>();
        let region = DomainSpec::from_kind(e.oracle.sampling_region().clone());
        let g1 = empirical_modulus(&e.oracle, &region, n, seed).unwrap();
        let g2 = empirical_modulus(&e.oracle, &region, 2 * n, seed).unwrap();
        prop_assert!(g2.value <= g1.value);
        let x0 = p(&[2.0]);
        let l1 = estimate_lipschitz_sublevel(&e.oracle, &x0, n, seed).unwrap();
        let l2 = estimate_lipschitz_sublevel(&e.oracle, &x0, 2 * n, seed).unwrap();
        prop_assert!(l2.value >= l1.value);
    }

    #[test]
    fn lipschitz_estimate_brackets_quadratic_curvature(seed in 0u64..10_000, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x.abs() + y.abs() > 0.1);
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let l = estimate_lipschitz_sublevel(&e.oracle, &p(&[x, y]), 500, seed).unwrap();
        prop_assert!(l.value <= 4.0 + 1e-12);
        prop_assert!(l.value >= 1.0 - 1e-12);
        prop_assert!((l.safety_adjusted_value - 1.1 * l.value).abs() < 1e-12);
    }
}
