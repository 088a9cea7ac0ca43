mod common;

use common::{all_entries, p};
use proptest::prelude::*;
use sqcflow_core::catalog::{self, max_combine, scale_combine};
use sqcflow_core::numerics::{finite_difference_gradient, fit_linear_rate};
use sqcflow_core::sampling::Sampler;
use sqcflow_core::verify::check_strong_quasiconvexity;
use sqcflow_core::{Error, SampleBudget};

#[test]
fn gradients_match_central_differences() {
    for e in all_entries() {
        let mut s = Sampler::new(11);
        let mut checked = 0;
        while checked < 100 {
            let x = s.domain_point(&e.oracle, true).unwrap();
            let fd = match finite_difference_gradient(&e.oracle, &x, 1e-6) {
                Ok(g) => g,
                // too close to the boundary for the stencil
                Err(Error::DomainViolation(_)) => continue,
                Err(err) => panic!("{}: {err}", e.name),
            };
            let g = e.oracle.grad(&x).unwrap();
            let err = (&g - &fd).norm();
            assert!(err <= 1e-4 * (1.0 + g.norm()), "{} at {x}: |grad - fd| = {err}", e.name);
            checked += 1;
        }
    }
}

#[test]
fn known_lipschitz_constants_hold() {
    for e in all_entries() {
        let Some(l) = e.lipschitz() else { continue };
        let mut s = Sampler::new(12);
        for _ in 0..10_000 {
            let x = s.domain_point(&e.oracle, true).unwrap();
            let y = s.domain_point(&e.oracle, true).unwrap();
            let lhs = (&e.oracle.grad(&x).unwrap() - &e.oracle.grad(&y).unwrap()).norm();
            assert!(lhs <= l * x.distance(&y) * (1.0 + 1e-10), "{}: {x} {y}", e.name);
        }
    }
}

#[test]
fn known_moduli_hold_at_full_budget() {
    for e in catalog::modulus_entries::<f64>().unwrap() {
        let r = check_strong_quasiconvexity(&e.oracle, e.gamma().unwrap(), &SampleBudget::pairs(10_000, 42)).unwrap();
        assert!(r.holds_on_samples, "{}: {:?}", e.name, r.violations.first());
        assert_eq!(r.violations_found, 0);
    }
}

#[test]
fn scale_then_max_matches_direct_evaluation() {
    let a = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
    let b = catalog::shifted_half_square(p(&[1.0, 0.0])).unwrap();
    let (alpha, beta) = (2.5, 0.7);
    let combined = max_combine(&scale_combine(&a, alpha).unwrap(), &scale_combine(&b, beta).unwrap()).unwrap();
    assert_eq!(combined.gamma(), Some(0.7));
    let mut s = Sampler::new(13);
    for _ in 0..1000 {
        let x = s.domain_point(&combined.oracle, false).unwrap();
        let direct = (alpha * a.oracle.value(&x).unwrap()).max(beta * b.oracle.value(&x).unwrap());
        assert!((combined.oracle.value(&x).unwrap() - direct).abs() <= 1e-12);
    }
}

#[test]
fn max_of_entry_with_itself_keeps_modulus() {
    let e = catalog::sqrt_norm::<f64>(2, 1.0).unwrap();
    let m = max_combine(&e, &e).unwrap();
    assert_eq!(m.gamma(), e.gamma());
    let x = p(&[0.3, -0.4]);
    assert_eq!(m.oracle.value(&x).unwrap(), e.oracle.value(&x).unwrap());
}

#[test]
fn metadata_serializes() {
    for e in all_entries() {
        let json = serde_json::to_value(e.metadata()).unwrap();
        assert_eq!(json["name"], e.name.as_str());
        assert_eq!(json["dim"], e.oracle.dim());
    }
}

proptest! {
    #[test]
    fn rate_fit_is_scale_invariant(
        values in prop::collection::vec(1e-3f64..1e3, 3..40),
        c in 1e-6f64..1e6,
    ) {
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let a = fit_linear_rate(&values).unwrap();
        let b = fit_linear_rate(&scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn gradients_are_deterministic(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let e = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
        let pt = p(&[x, y]);
        prop_assert_eq!(e.oracle.grad(&pt).unwrap(), e.oracle.grad(&pt).unwrap());
        prop_assert_eq!(e.oracle.value(&pt).unwrap().to_bits(), e.oracle.value(&pt).unwrap().to_bits());
    }
}
