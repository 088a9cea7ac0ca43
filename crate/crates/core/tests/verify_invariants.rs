mod common;

use common::{all_entries, p};
use proptest::prelude::*;
use sqcflow_core::catalog;
use sqcflow_core::estimate::empirical_modulus;
use sqcflow_core::verify::{
    check_gradient_characterization, check_implication_ladder, check_new_monotonicity, check_pl, check_property,
    check_quasi_strong_convexity, check_sharp_quasiconvexity, check_strong_monotonicity,
    check_strong_pseudomonotonicity, check_strong_quasiconvexity, derive_pl_modulus, Property,
};
use sqcflow_core::{DomainKind, DomainSpec, SampleBudget};

fn budget(pairs: usize) -> SampleBudget {
    SampleBudget::pairs(pairs, 42)
}

#[test]
fn identical_seeds_give_identical_reports() {
    let e = catalog::pl_without_uniqueness::<f64>();
    let a = check_strong_quasiconvexity(&e.oracle, 0.5, &budget(2000)).unwrap();
    let b = check_strong_quasiconvexity(&e.oracle, 0.5, &budget(2000)).unwrap();
    assert!(!a.holds_on_samples);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = check_strong_quasiconvexity(&e.oracle, 0.5, &SampleBudget::pairs(2000, 43)).unwrap();
    assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn witnesses_reproduce_from_scratch() {
    let cases = [
        (catalog::pl_without_uniqueness::<f64>(), Property::StrongQuasiconvexity(0.1)),
        (catalog::cubic(), Property::GradientCharacterization(1.0)),
        (catalog::cubic(), Property::StrongPseudomonotonicity(0.5)),
        (catalog::sqrt_norm(1, 1.0).unwrap(), Property::StrongMonotonicity(0.1)),
        (catalog::sqrt_norm(1, 1.0).unwrap(), Property::QuasiStrongConvexity(0.5)),
        (catalog::linear(p(&[1.0])).unwrap(), Property::NewMonotonicity(4.0)),
    ];
    for (e, prop) in cases {
        let r = check_property(&e.oracle, prop, &budget(2000)).unwrap();
        assert!(!r.violations.is_empty(), "{} {}", e.name, prop.name());
        for w in &r.violations {
            let ineq = prop.evaluate(&e.oracle, &w.x, &w.y, w.lambda).unwrap().expect("premise held");
            assert!(ineq.violated());
            assert_eq!(ineq.margin(), w.margin);
            assert!(w.margin < -sqcflow_core::ineq_tol(w.lhs, w.rhs));
        }
    }
}

#[test]
fn degenerate_quadratic_has_flat_direction_witness() {
    let e = catalog::pl_without_uniqueness::<f64>();
    let r = check_strong_quasiconvexity(&e.oracle, 0.1, &budget(2000)).unwrap();
    assert!(!r.holds_on_samples);
    // the hand witness: x = (0,0), y = (0,1), λ = ½
    let ineq = Property::StrongQuasiconvexity(0.1).evaluate(&e.oracle, &p(&[0.0, 0.0]), &p(&[0.0, 1.0]), Some(0.5));
    assert!(ineq.unwrap().unwrap().violated());
    assert!(check_pl(&e.oracle, 1.0, &budget(10_000)).unwrap().holds_on_samples);
}

#[test]
fn characterizations_of_known_entries() {
    let quad = catalog::strongly_convex_quadratic::<f64>(2, 1.0, 4.0).unwrap();
    assert!(check_gradient_characterization(&quad.oracle, 1.0, &budget(5000)).unwrap().holds_on_samples);
    assert!(check_strong_pseudomonotonicity(&quad.oracle, 0.5, &budget(5000)).unwrap().holds_on_samples);
    let one = catalog::strongly_convex_quadratic::<f64>(1, 1.0, 1.0).unwrap();
    assert!(check_new_monotonicity(&one.oracle, 1.0, &budget(5000)).unwrap().all_hold());
    let sinq = catalog::sin_quadratic::<f64>();
    assert!(check_new_monotonicity(&sinq.oracle, 0.0, &budget(5000)).unwrap().all_hold());
    let cubic = catalog::cubic::<f64>();
    assert!(!check_gradient_characterization(&cubic.oracle, 1.0, &budget(5000)).unwrap().holds_on_samples);
    assert!(check_strong_quasiconvexity(&cubic.oracle, 0.0, &budget(5000)).unwrap().holds_on_samples);
    let half = catalog::half_square::<f64>(2).unwrap();
    assert!(check_quasi_strong_convexity(&half.oracle, 1.0, &budget(5000)).unwrap().holds_on_samples);
    assert!(check_pl(&half.oracle, derive_pl_modulus(1.0, 1.0), &budget(5000)).unwrap().holds_on_samples);
}

#[test]
fn sin_quadratic_with_empirical_modulus() {
    let e = catalog::sin_quadratic::<f64>();
    let region = DomainSpec::from_kind(DomainKind::centered_cube(1, 3.0));
    // fewer triples miss the symmetric pairs x ≈ -y that attain the infimum
    let g = empirical_modulus(&e.oracle, &region, 100_000, 42).unwrap();
    assert!(g.value > 0.0);
    let gamma = g.safety_adjusted_value;
    assert!(check_strong_quasiconvexity(&e.oracle, gamma, &budget(10_000)).unwrap().holds_on_samples);
    assert!(check_gradient_characterization(&e.oracle, gamma, &budget(10_000)).unwrap().holds_on_samples);
    let ladder = check_implication_ladder(&e.oracle, gamma, &budget(3000)).unwrap();
    assert!(ladder.sound());
    assert!(!ladder.report("convexity").unwrap().holds_on_samples);
}

#[test]
fn ladder_is_sound_on_every_entry() {
    for e in all_entries() {
        let gamma = e.gamma().unwrap_or(0.1);
        let ladder = check_implication_ladder(&e.oracle, gamma, &budget(2000)).unwrap();
        let broken: Vec<_> = ladder.implications.iter().filter(|i| !i.consistent).collect();
        assert!(broken.is_empty(), "{}: {broken:?}", e.name);
    }
}

#[test]
fn sqrt_norm_is_not_monotone() {
    let e = catalog::sqrt_norm::<f64>(1, 1.0).unwrap();
    let ladder = check_implication_ladder(&e.oracle, e.gamma().unwrap(), &budget(3000)).unwrap();
    assert!(ladder.report("strong_quasiconvexity").unwrap().holds_on_samples);
    assert!(ladder.report("sharp_quasiconvexity").unwrap().holds_on_samples);
    assert!(!ladder.report("strong_monotonicity").unwrap().holds_on_samples);
    assert!(check_strong_monotonicity(&e.oracle, e.gamma().unwrap(), &budget(3000)).unwrap().violations_found > 0);
}

#[test]
fn sharp_and_pseudomonotone_agree_on_entries() {
    for e in all_entries().into_iter().filter(|e| e.gamma().is_some()).take(10) {
        let g = e.gamma().unwrap();
        let sharp = check_sharp_quasiconvexity(&e.oracle, g, &budget(2000)).unwrap();
        let pseudo = check_strong_pseudomonotonicity(&e.oracle, 0.5 * g, &budget(2000)).unwrap();
        assert!(sharp.holds_on_samples && pseudo.holds_on_samples, "{}", e.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn passing_modulus_passes_below(frac in 0.0f64..=1.0, seed in 0u64..1000) {
        let e = catalog::sqrt_norm::<f64>(2, 1.0).unwrap();
        let gamma = e.gamma().unwrap();
        let b = SampleBudget::pairs(300, seed);
        prop_assert!(check_strong_quasiconvexity(&e.oracle, gamma, &b).unwrap().holds_on_samples);
        prop_assert!(check_strong_quasiconvexity(&e.oracle, frac * gamma, &b).unwrap().holds_on_samples);
    }

    #[test]
    fn violations_shrink_with_modulus(g1 in 0.0f64..2.0, g2 in 0.0f64..2.0, seed in 0u64..1000) {
        // a smaller modulus sees the same samples with a weaker right-hand side
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let e = catalog::pl_without_uniqueness::<f64>();
        let b = SampleBudget::pairs(200, seed);
        let a = check_strong_quasiconvexity(&e.oracle, lo, &b).unwrap();
        let c = check_strong_quasiconvexity(&e.oracle, hi, &b).unwrap();
        prop_assert!(a.violations_found <= c.violations_found);
        prop_assert_eq!(a.samples_tested, c.samples_tested);
    }

    #[test]
    fn holds_iff_no_witness(gamma in 0.0f64..3.0, seed in 0u64..1000) {
        let e = catalog::sin_quadratic::<f64>();
        let r = check_strong_quasiconvexity(&e.oracle, gamma, &SampleBudget::pairs(200, seed)).unwrap();
        prop_assert_eq!(r.holds_on_samples, r.violations.is_empty());
        prop_assert_eq!(r.holds_on_samples, r.violations_found == 0);
        for w in &r.violations {
            prop_assert_eq!(w.margin, w.lhs - w.rhs);
        }
    }
}
