//! Gradient validation and empirical rate extraction.

use crate::error::{Error, Result};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::scalar::Scalar;

/// Central-difference approximation of `∇h(x)`.
///
/// Every perturbed point `x ± step·e_i` must lie in the oracle's domain.
pub fn finite_difference_gradient<S: Scalar>(
    oracle: &FunctionOracle<S>,
    x: &Point<S>,
    step: S,
) -> Result<Point<S>> {
    if !(step > S::zero()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    if x.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), got: x.dim() });
    }
    let two = S::lit(2.0);
    let mut g = Vec::with_capacity(x.dim());
    for i in 0..x.dim() {
        let fwd = x.with_coord(i, x[i] + step);
        let bwd = x.with_coord(i, x[i] - step);
        for p in [&fwd, &bwd] {
            if !oracle.domain.contains(p) {
                return Err(Error::DomainViolation(p.to_string()));
            }
        }
        g.push((oracle.value(&fwd)? - oracle.value(&bwd)?) / (two * step));
    }
    Point::new(g)
}

/// Least-squares slope of `y` against `x`.
fn ls_slope<S: Scalar>(x: &[S], y: &[S]) -> S {
    let n = S::from_usize(x.len()).unwrap();
    let mx = x.iter().copied().sum::<S>() / n;
    let my = y.iter().copied().sum::<S>() / n;
    let (mut sxy, mut sxx) = (S::zero(), S::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
    }
    sxy / sxx
}

fn logs<S: Scalar>(values: &[S]) -> Result<Vec<S>> {
    if values.len() < 3 {
        return Err(Error::InsufficientSamples(format!(
            "rate fit needs at least 3 values, got {}",
            values.len()
        )));
    }
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v > S::zero() && v.is_finite() {
                Ok(v.ln())
            } else {
                Err(Error::NonPositiveSequence { index, value: v.as_f64() })
            }
        })
        .collect()
}

/// Per-step linear rate of a positive sequence: `exp` of the least-squares
/// slope of `ln values[k]` against `k`.
///
/// Shift by the optimal value before calling; zeros are rejected.
pub fn fit_linear_rate<S: Scalar>(values: &[S]) -> Result<S> {
    let y = logs(values)?;
    let k: Vec<S> = (0..y.len()).map(|i| S::from_usize(i).unwrap()).collect();
    Ok(ls_slope(&k, &y).exp())
}

/// Continuous analogue of [`fit_linear_rate`]: the exponent `c` of the best
/// fit `values ≈ C e^{-c t}`.
pub fn fit_decay_exponent<S: Scalar>(times: &[S], values: &[S]) -> Result<S> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
    }
    let y = logs(values)?;
    Ok(-ls_slope(times, &y))
}

/// Longest prefix whose entries all exceed `floor`. Rate fits use it to
/// drop the roundoff-dominated tail of a converged sequence.
pub(crate) fn prefix_above<S: Scalar>(values: &[S], floor: S) -> usize {
    values.iter().position(|&v| !(v > floor)).unwrap_or(values.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle_1d(
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> FunctionOracle<f64> {
        FunctionOracle::new(1, move |x| Ok(h(x[0])), move |x| Point::new(vec![g(x[0])])).unwrap()
    }

    #[test]
    fn central_difference_on_quadratic() {
        let o = FunctionOracle::new(2, |x| Ok(0.5 * x.norm_sq()), |x| Ok(x.clone())).unwrap();
        let g = finite_difference_gradient(&o, &Point::from_f64(&[1.0, 0.0]).unwrap(), 1e-5).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn central_difference_at_stationary_point() {
        let o = oracle_1d(|x| x * x + 3.0 * x.sin().powi(2), |x| 2.0 * x + 3.0 * (2.0 * x).sin());
        let g = finite_difference_gradient(&o, &Point::zeros(1), 1e-6).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn central_difference_sqrt() {
        // d/dx sqrt(x) = 1 / (2 sqrt(x)) = 1 at x = 0.25
        let o = oracle_1d(|x| x.abs().sqrt(), |x| 0.5 / x.abs().sqrt() * x.signum());
        let x = Point::from_f64(&[0.25]).unwrap();
        let g = finite_difference_gradient(&o, &x, 1e-6).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(g[0], o.grad(&x).unwrap()[0], epsilon = 1e-6);
    }

    #[test]
    fn central_difference_leaving_domain() {
        use crate::domain::{DomainKind, DomainSpec};
        let o = oracle_1d(|x| x * x, |x| 2.0 * x).with_domain(DomainSpec::from_kind(
            DomainKind::cube(Point::from_f64(&[-1.0]).unwrap(), Point::from_f64(&[1.0]).unwrap()).unwrap(),
        ));
        let err = finite_difference_gradient(&o, &Point::from_f64(&[1.0]).unwrap(), 1e-3);
        assert!(matches!(err, Err(Error::DomainViolation(_))));
    }

    #[test]
    fn geometric_and_constant_sequences() {
        assert_abs_diff_eq!(fit_linear_rate(&[1.0, 0.5, 0.25, 0.125]).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(fit_linear_rate(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn noisy_geometric_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..50)
            .map(|k| 0.9f64.powi(k) * (1.0 + rng.random_range(-0.01..0.01)))
            .collect();
        let rate = fit_linear_rate(&values).unwrap();
        assert!((rate - 0.9).abs() <= 0.01, "rate {rate}");
    }

    #[test]
    fn rejects_non_positive_and_short() {
        assert!(matches!(
            fit_linear_rate(&[1.0, 0.0, 0.5]),
            Err(Error::NonPositiveSequence { index: 1, .. })
        ));
        assert!(matches!(fit_linear_rate(&[1.0, 0.5]), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn decay_exponent_of_exponential() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|&s| 3.0 * (-2.0 * s).exp()).collect();
        assert_abs_diff_eq!(fit_decay_exponent(&t, &v).unwrap(), 2.0, epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn rate_fit_is_scale_invariant(
            values in proptest::collection::vec(1e-3f64..1e3, 3..40),
            c in 1e-6f64..1e6,
        ) {
            let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
            let a = fit_linear_rate(&values).unwrap();
            let b = fit_linear_rate(&scaled).unwrap();
            proptest::prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }
}
