//! Sampling checks for the convexity-type classes, their gradient
//! characterizations and the implications between them.
//!
//! Each inequality is written as `lhs >= rhs`; a sample violates it when
//! `lhs - rhs < -ineq_tol(lhs, rhs)`. Checks can only refute a property, so
//! a passing report means "holds on samples", nothing more.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::FunctionOracle;
use crate::point::Point;
use crate::sampling::{SampleBudget, Sampler};
use crate::scalar::{ineq_tol, Scalar};

/// Witnesses stored per report; `violations_found` keeps the full count.
pub const MAX_WITNESSES: usize = 32;

/// `λ` values tried for every sampled pair before the random ones.
const FIXED_LAMBDAS: [f64; 3] = [0.0, 0.5, 1.0];

/// Property tested by a check together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "property", content = "parameter", rename_all = "snake_case")]
pub enum Property<S: Scalar> {
    /// `h(λy+(1-λ)x) <= max{h(x),h(y)} - λ(1-λ)(γ/2)‖x-y‖²`.
    StrongQuasiconvexity(S),
    /// `h(x) <= h(y) ⇒ ⟨∇h(y), x-y⟩ <= -(γ/2)‖y-x‖²`.
    GradientCharacterization(S),
    /// Strict premise: `⟨∇h(x), y-x⟩ > -(γ/2)‖y-x‖² ⇒ ⟨∇h(y), x-y⟩ <= -(γ/2)‖y-x‖²`.
    NewMonotonicity(S),
    /// Same conclusion under the non-strict premise `>=`.
    NewMonotonicityNonStrict(S),
    /// `⟨∇h(y), x-y⟩ >= 0 ⇒ ⟨∇h(x), y-x⟩ <= -γ'‖y-x‖²`.
    StrongPseudomonotonicity(S),
    /// `‖∇h(x)‖² >= μ (h(x) - h(x̄))`.
    Pl(S),
    /// `⟨∇h(x), x-x̄⟩ >= h(x) - h(x̄) + (μ/2)‖x-x̄‖²`.
    QuasiStrongConvexity(S),
    /// `⟨∇h(y), x-y⟩ >= 0 ⇒` the strong quasiconvexity inequality.
    SharpQuasiconvexity(S),
    /// `h(λy+(1-λ)x) <= λh(y) + (1-λ)h(x) - λ(1-λ)(γ/2)‖x-y‖²`.
    StrongConvexity(S),
    /// `⟨∇h(y) - ∇h(x), y-x⟩ >= γ‖y-x‖²`.
    StrongMonotonicity(S),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arity {
    /// One point against the known minimizer.
    Point,
    Pair,
    /// Pair plus interpolation parameter.
    Triple,
}

/// One evaluated inequality `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality<S> {
    pub lhs: S,
    pub rhs: S,
}

impl<S: Scalar> Inequality<S> {
    pub fn margin(&self) -> S {
        self.lhs - self.rhs
    }

    pub fn violated(&self) -> bool {
        self.margin() < -ineq_tol(self.lhs, self.rhs)
    }
}

impl<S: Scalar> Property<S> {
    pub fn name(&self) -> &'static str {
        let zero = self.parameter() == S::zero();
        match self {
            Self::StrongQuasiconvexity(_) if zero => "quasiconvexity",
            Self::StrongQuasiconvexity(_) => "strong_quasiconvexity",
            Self::GradientCharacterization(_) => "gradient_characterization",
            Self::NewMonotonicity(_) if zero => "quasimonotonicity",
            Self::NewMonotonicity(_) => "new_monotonicity",
            Self::NewMonotonicityNonStrict(_) => "new_monotonicity_non_strict",
            Self::StrongPseudomonotonicity(_) if zero => "pseudomonotonicity",
            Self::StrongPseudomonotonicity(_) => "strong_pseudomonotonicity",
            Self::Pl(_) => "pl",
            Self::QuasiStrongConvexity(_) => "quasi_strong_convexity",
            Self::SharpQuasiconvexity(_) => "sharp_quasiconvexity",
            Self::StrongConvexity(_) if zero => "convexity",
            Self::StrongConvexity(_) => "strong_convexity",
            Self::StrongMonotonicity(_) if zero => "monotonicity",
            Self::StrongMonotonicity(_) => "strong_monotonicity",
        }
    }

    pub fn parameter(&self) -> S {
        match *self {
            Self::StrongQuasiconvexity(p)
            | Self::GradientCharacterization(p)
            | Self::NewMonotonicity(p)
            | Self::NewMonotonicityNonStrict(p)
            | Self::StrongPseudomonotonicity(p)
            | Self::Pl(p)
            | Self::QuasiStrongConvexity(p)
            | Self::SharpQuasiconvexity(p)
            | Self::StrongConvexity(p)
            | Self::StrongMonotonicity(p) => p,
        }
    }

    fn arity(&self) -> Arity {
        match self {
            Self::Pl(_) | Self::QuasiStrongConvexity(_) => Arity::Point,
            Self::StrongQuasiconvexity(_) | Self::SharpQuasiconvexity(_) | Self::StrongConvexity(_) => {
                Arity::Triple
            }
            _ => Arity::Pair,
        }
    }

    fn uses_gradient(&self) -> bool {
        !matches!(self, Self::StrongQuasiconvexity(_) | Self::StrongConvexity(_))
    }

    fn validate(&self) -> Result<()> {
        let p = self.parameter();
        let ok = match self {
            Self::Pl(_) | Self::QuasiStrongConvexity(_) => p > S::zero(),
            _ => p >= S::zero(),
        };
        if ok && p.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{} modulus out of range: {p}", self.name())))
        }
    }

    /// Evaluates the inequality at one sample. `None` when the premise of an
    /// implication does not hold. For point properties `y` is the minimizer.
    pub fn evaluate(
        &self,
        oracle: &FunctionOracle<S>,
        x: &Point<S>,
        y: &Point<S>,
        lambda: Option<S>,
    ) -> Result<Option<Inequality<S>>> {
        let half = S::lit(0.5);
        let p = self.parameter();
        let d2 = x.distance(y).powi(2);
        let ineq = |lhs, rhs| Some(Inequality { lhs, rhs });
        Ok(match *self {
            Self::StrongQuasiconvexity(g) | Self::SharpQuasiconvexity(g) | Self::StrongConvexity(g) => {
                if let Self::SharpQuasiconvexity(_) = self {
                    let premise = oracle.grad(y)?.dot(&(x - y));
                    if premise < -S::ineq_rel_tol() * (S::one() + premise.abs()) {
                        return Ok(None);
                    }
                }
                let l = lambda.ok_or_else(|| Error::InvalidParameter("lambda required".into()))?;
                let (hx, hy) = (oracle.value(x)?, oracle.value(y)?);
                let hm = oracle.value(&x.lerp(y, l))?;
                let penalty = l * (S::one() - l) * half * g * d2;
                let bound = match self {
                    Self::StrongConvexity(_) => l * hy + (S::one() - l) * hx,
                    _ => hx.max(hy),
                };
                ineq(bound - penalty, hm)
            }
            Self::GradientCharacterization(g) => {
                // callers order the pair so that h(x) <= h(y)
                if oracle.value(x)? > oracle.value(y)? {
                    return Ok(None);
                }
                ineq(-half * g * d2, oracle.grad(y)?.dot(&(x - y)))
            }
            Self::NewMonotonicity(g) | Self::NewMonotonicityNonStrict(g) => {
                let target = -half * g * d2;
                let premise = oracle.grad(x)?.dot(&(y - x));
                let tol = ineq_tol(premise, target);
                let holds = match self {
                    Self::NewMonotonicity(_) => premise > target + tol,
                    _ => premise >= target - tol,
                };
                if !holds {
                    return Ok(None);
                }
                ineq(target, oracle.grad(y)?.dot(&(x - y)))
            }
            Self::StrongPseudomonotonicity(g) => {
                let premise = oracle.grad(y)?.dot(&(x - y));
                if premise < -S::ineq_rel_tol() * (S::one() + premise.abs()) {
                    return Ok(None);
                }
                ineq(-g * d2, oracle.grad(x)?.dot(&(y - x)))
            }
            Self::Pl(mu) => {
                let gap = oracle.value(x)? - oracle.value(y)?;
                ineq(oracle.grad(x)?.norm_sq(), mu * gap)
            }
            Self::QuasiStrongConvexity(mu) => {
                let gap = oracle.value(x)? - oracle.value(y)?;
                ineq(oracle.grad(x)?.dot(&(x - y)), gap + half * mu * d2)
            }
            Self::StrongMonotonicity(_) => {
                let diff = &oracle.grad(y)? - &oracle.grad(x)?;
                ineq(diff.dot(&(y - x)), p * d2)
            }
        })
    }
}

/// A sample at which an inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<S: Scalar> {
    pub x: Point<S>,
    pub y: Point<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<S>,
    pub lhs: S,
    pub rhs: S,
    pub margin: S,
}

/// Outcome of one sampled check.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport<S: Scalar> {
    pub property_name: String,
    pub parameter: S,
    pub holds_on_samples: bool,
    /// First [`MAX_WITNESSES`] violations in sample order.
    pub violations: Vec<Witness<S>>,
    pub violations_found: usize,
    /// Inequalities evaluated (premise satisfied).
    pub samples_tested: usize,
    /// Points or pairs drawn.
    pub samples_drawn: usize,
    /// Companion reports, e.g. the non-strict variant of new monotonicity.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<ClassReport<S>>,
}

impl<S: Scalar> ClassReport<S> {
    fn new(property: &Property<S>) -> Self {
        Self {
            property_name: property.name().to_owned(),
            parameter: property.parameter(),
            holds_on_samples: true,
            violations: Vec::new(),
            violations_found: 0,
            samples_tested: 0,
            samples_drawn: 0,
            related: Vec::new(),
        }
    }

    fn record(&mut self, x: &Point<S>, y: &Point<S>, lambda: Option<S>, ineq: Inequality<S>) {
        self.samples_tested += 1;
        if ineq.violated() {
            self.violations_found += 1;
            self.holds_on_samples = false;
            if self.violations.len() < MAX_WITNESSES {
                self.violations.push(Witness {
                    x: x.clone(),
                    y: y.clone(),
                    lambda,
                    lhs: ineq.lhs,
                    rhs: ineq.rhs,
                    margin: ineq.margin(),
                });
            }
        }
    }

    /// This report and every related one pass.
    pub fn all_hold(&self) -> bool {
        self.holds_on_samples && self.related.iter().all(ClassReport::all_hold)
    }
}

/// Runs one property over the sample budget.
///
/// The sample stream depends only on the seed and the oracle, never on the
/// modulus, so a smaller modulus sees exactly the same points.
pub fn check_property<S: Scalar>(
    oracle: &FunctionOracle<S>,
    property: Property<S>,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    property.validate()?;
    let mut report = ClassReport::new(&property);
    let mut sampler = Sampler::new(budget.seed);
    let smooth = property.uses_gradient();
    let x_bar = match property.arity() {
        Arity::Point => Some(oracle.known_minimizer().cloned().ok_or(Error::MissingMinimizer)?),
        _ => None,
    };
    for _ in 0..budget.pairs {
        report.samples_drawn += 1;
        let x = sampler.domain_point(oracle, smooth)?;
        match property.arity() {
            Arity::Point => {
                let y = x_bar.as_ref().unwrap();
                if let Some(ineq) = property.evaluate(oracle, &x, y, None)? {
                    report.record(&x, y, None, ineq);
                }
            }
            Arity::Pair => {
                let mut x = x;
                let mut y = sampler.domain_point(oracle, smooth)?;
                if let Property::GradientCharacterization(_) = property {
                    if oracle.value(&x)? > oracle.value(&y)? {
                        std::mem::swap(&mut x, &mut y);
                    }
                }
                if let Some(ineq) = property.evaluate(oracle, &x, &y, None)? {
                    report.record(&x, &y, None, ineq);
                }
            }
            Arity::Triple => {
                let y = sampler.domain_point(oracle, smooth)?;
                let random: Vec<S> = (0..budget.lambdas_per_pair).map(|_| sampler.unit::<S>()).collect();
                for l in FIXED_LAMBDAS.iter().map(|&l| S::lit(l)).chain(random) {
                    if !oracle.domain.contains(&x.lerp(&y, l)) {
                        continue;
                    }
                    if let Some(ineq) = property.evaluate(oracle, &x, &y, Some(l))? {
                        report.record(&x, &y, Some(l), ineq);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Strong quasiconvexity with modulus `gamma`; `gamma = 0` tests quasiconvexity.
pub fn check_strong_quasiconvexity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::StrongQuasiconvexity(gamma), budget)
}

/// First-order characterization of strong quasiconvexity.
pub fn check_gradient_characterization<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::GradientCharacterization(gamma), budget)
}

/// New monotonicity of `∇h` (strict premise). The non-strict premise variant
/// is attached as the single entry of `related`.
pub fn check_new_monotonicity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    let mut report = check_property(oracle, Property::NewMonotonicity(gamma), budget)?;
    report.related.push(check_property(oracle, Property::NewMonotonicityNonStrict(gamma), budget)?);
    Ok(report)
}

pub fn check_strong_pseudomonotonicity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma_half: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::StrongPseudomonotonicity(gamma_half), budget)
}

/// PL inequality against the oracle's known minimizer.
pub fn check_pl<S: Scalar>(oracle: &FunctionOracle<S>, mu: S, budget: &SampleBudget) -> Result<ClassReport<S>> {
    check_property(oracle, Property::Pl(mu), budget)
}

pub fn check_quasi_strong_convexity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    mu: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::QuasiStrongConvexity(mu), budget)
}

pub fn check_sharp_quasiconvexity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::SharpQuasiconvexity(gamma), budget)
}

/// Strong convexity; `gamma = 0` tests convexity.
pub fn check_strong_convexity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::StrongConvexity(gamma), budget)
}

/// Strong monotonicity of `∇h`; `gamma = 0` tests monotonicity.
pub fn check_strong_monotonicity<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<ClassReport<S>> {
    check_property(oracle, Property::StrongMonotonicity(gamma), budget)
}

/// PL modulus implied by strong quasiconvexity and an `L`-Lipschitz gradient.
pub fn derive_pl_modulus<S: Scalar>(gamma: S, l: S) -> S {
    gamma * gamma / (S::lit(2.0) * l)
}

/// One forward implication evaluated on the sampled reports.
#[derive(Debug, Clone, Serialize)]
pub struct ImplicationCheck {
    pub premise: String,
    pub conclusion: String,
    pub premise_holds: bool,
    pub conclusion_holds: bool,
    /// False only when the premise passed and the conclusion failed.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderReport<S: Scalar> {
    pub gamma: S,
    pub reports: Vec<ClassReport<S>>,
    pub implications: Vec<ImplicationCheck>,
}

impl<S: Scalar> LadderReport<S> {
    pub fn report(&self, property_name: &str) -> Option<&ClassReport<S>> {
        self.reports.iter().find(|r| r.property_name == property_name)
    }

    /// No forward implication is contradicted by the samples.
    pub fn sound(&self) -> bool {
        self.implications.iter().all(|i| i.consistent)
    }
}

/// Runs every check at modulus `gamma` and evaluates the forward
/// implications between them:
///
/// ```text
/// strongly convex   ⇒ strongly quasiconvex ⇒ sharply quasiconvex
///       ⇕                    ⇓                       ⇕
/// strongly monotone ⇒ new monotonicity     ⇒ strongly pseudomonotone (γ/2)
/// ```
///
/// plus quasi-strong convexity ⇒ strong quasiconvexity and, when `L` and the
/// minimizer are known, strong quasiconvexity ⇒ PL with `γ²/(2L)`. Reverse
/// directions are reported but never asserted.
pub fn check_implication_ladder<S: Scalar>(
    oracle: &FunctionOracle<S>,
    gamma: S,
    budget: &SampleBudget,
) -> Result<LadderReport<S>> {
    if !(gamma > S::zero()) {
        return Err(Error::InvalidParameter(format!("ladder modulus must be > 0, got {gamma}")));
    }
    let half = S::lit(0.5);
    let mut reports = vec![
        check_strong_convexity(oracle, S::zero(), budget)?,
        check_strong_convexity(oracle, gamma, budget)?,
        check_strong_quasiconvexity(oracle, gamma, budget)?,
        check_sharp_quasiconvexity(oracle, gamma, budget)?,
        check_gradient_characterization(oracle, gamma, budget)?,
        check_strong_monotonicity(oracle, S::zero(), budget)?,
        check_strong_monotonicity(oracle, gamma, budget)?,
    ];
    let mut new_mon = check_new_monotonicity(oracle, gamma, budget)?;
    let non_strict = new_mon.related.remove(0);
    reports.push(new_mon);
    reports.push(non_strict);
    reports.push(check_strong_pseudomonotonicity(oracle, half * gamma, budget)?);
    if oracle.known_minimizer().is_some() {
        reports.push(check_quasi_strong_convexity(oracle, gamma, budget)?);
        if let Some(l) = oracle.known_lipschitz {
            reports.push(check_pl(oracle, derive_pl_modulus(gamma, l), budget)?);
        }
    }

    let edges = [
        ("strong_convexity", "strong_quasiconvexity"),
        ("strong_quasiconvexity", "sharp_quasiconvexity"),
        ("strong_convexity", "strong_monotonicity"),
        ("strong_monotonicity", "strong_convexity"),
        ("strong_quasiconvexity", "new_monotonicity"),
        ("strong_quasiconvexity", "new_monotonicity_non_strict"),
        ("new_monotonicity_non_strict", "new_monotonicity"),
        ("strong_monotonicity", "new_monotonicity"),
        ("new_monotonicity", "strong_pseudomonotonicity"),
        ("sharp_quasiconvexity", "strong_pseudomonotonicity"),
        ("strong_pseudomonotonicity", "sharp_quasiconvexity"),
        ("convexity", "monotonicity"),
        ("monotonicity", "convexity"),
        ("quasi_strong_convexity", "strong_quasiconvexity"),
        ("strong_quasiconvexity", "pl"),
    ];
    let find = |name: &str| reports.iter().find(|r| r.property_name == name);
    let implications = edges
        .iter()
        .filter_map(|(p, c)| {
            let (pr, cr) = (find(p)?, find(c)?);
            Some(ImplicationCheck {
                premise: (*p).to_owned(),
                conclusion: (*c).to_owned(),
                premise_holds: pr.holds_on_samples,
                conclusion_holds: cr.holds_on_samples,
                consistent: !pr.holds_on_samples || cr.holds_on_samples,
            })
        })
        .collect();
    Ok(LadderReport { gamma, reports, implications })
}
