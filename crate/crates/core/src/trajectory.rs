//! Iterate/time traces and the rate certificates computed from them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::scalar::Scalar;

/// One record of a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySample<S: Scalar> {
    /// Iteration index (as a real) or integration time.
    pub time: S,
    pub state: Point<S>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Point<S>>,
    pub value: S,
    pub grad_norm: S,
    pub diagnostics: BTreeMap<String, S>,
}

impl<S: Scalar> TrajectorySample<S> {
    pub fn diagnostic(&self, name: &str) -> Option<S> {
        self.diagnostics.get(name).copied()
    }
}

/// Time- or iteration-indexed sequence of states with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<S: Scalar> {
    pub samples: Vec<TrajectorySample<S>>,
    /// Minimizer the diagnostics were computed against, if any.
    pub x_bar: Option<Point<S>>,
    /// `h(x̄)` when `x_bar` is set.
    pub h_star: Option<S>,
    /// Why the producing run ended, when it ended early or by a rule.
    pub stop_reason: Option<StopReason>,
}

/// Termination cause of a solver run or integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `‖∇h‖` fell below the tolerance.
    GradientTolerance,
    /// The next iterate equalled the current one bitwise.
    Stationary,
    MaxIterations,
    TimeHorizon,
    /// The state came within the requested radius of the minimizer.
    StopRadius,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(x_bar: Option<Point<S>>, h_star: Option<S>) -> Self {
        Self { samples: Vec::new(), x_bar, h_star, stop_reason: None }
    }

    /// Appends a record; times must be strictly increasing.
    pub fn push(&mut self, sample: TrajectorySample<S>) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.time > last.time) {
                return Err(Error::InvalidParameter(format!(
                    "trajectory times must increase ({} after {})",
                    sample.time, last.time
                )));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&TrajectorySample<S>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&TrajectorySample<S>> {
        self.samples.last()
    }

    pub fn times(&self) -> Vec<S> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn values(&self) -> Vec<S> {
        self.samples.iter().map(|s| s.value).collect()
    }

    /// Values of one diagnostic, `None` where a sample lacks it.
    pub fn diagnostic_series(&self, name: &str) -> Vec<Option<S>> {
        self.samples.iter().map(|s| s.diagnostic(name)).collect()
    }

    /// Union of diagnostic names, sorted.
    pub fn diagnostic_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.samples.iter().flat_map(|s| s.diagnostics.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Which guarantee a certificate checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    GdContraction,
    GdValue,
    HbEnergy,
    FlowFirst,
    FlowFirstValues,
    FlowSecond,
}

impl CertificateKind {
    /// Continuous flows report decay exponents, discrete methods per-step factors.
    pub fn is_continuous(self) -> bool {
        matches!(self, Self::FlowFirst | Self::FlowFirstValues | Self::FlowSecond)
    }
}

/// Relative slack when comparing empirical behaviour against a bound.
pub const RATE_SLACK: f64 = 0.05;

/// Closed-form constants of a convergence guarantee together with the
/// empirical behaviour of one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct RateCertificate<S: Scalar> {
    pub kind: CertificateKind,
    pub constants: BTreeMap<String, S>,
    /// Per-step factor in `]0, 1[` for discrete methods, decay exponent for flows.
    pub theoretical_rate: S,
    pub empirical_rate: S,
    pub satisfied: bool,
    /// Number of samples at which an envelope or recursion failed.
    pub violations: usize,
    /// Index (discrete) or time (continuous) of the first failure.
    pub first_violation: Option<S>,
    pub notes: Vec<String>,
}

impl<S: Scalar> RateCertificate<S> {
    pub(crate) fn new(kind: CertificateKind, theoretical_rate: S) -> Self {
        Self {
            kind,
            constants: BTreeMap::new(),
            theoretical_rate,
            empirical_rate: S::nan(),
            satisfied: false,
            violations: 0,
            first_violation: None,
            notes: Vec::new(),
        }
    }

    pub(crate) fn constant(mut self, name: &str, value: S) -> Self {
        self.constants.insert(name.to_owned(), value);
        self
    }

    pub(crate) fn record_violation(&mut self, at: S) {
        self.violations += 1;
        if self.first_violation.is_none() {
            self.first_violation = Some(at);
        }
    }

    /// Whether the empirical rate respects the theoretical one within
    /// [`RATE_SLACK`]. A NaN empirical rate (nothing to fit) counts as respected.
    pub fn rate_within_bound(&self) -> bool {
        let slack = S::lit(RATE_SLACK);
        if self.empirical_rate.is_nan() {
            return true;
        }
        if self.kind.is_continuous() {
            self.empirical_rate >= self.theoretical_rate * (S::one() - slack)
        } else {
            self.empirical_rate <= self.theoretical_rate * (S::one() + slack)
        }
    }

    /// Sets `satisfied` from the violation count and the rate comparison.
    pub(crate) fn finish(mut self) -> Self {
        self.satisfied = self.violations == 0 && self.rate_within_bound();
        self
    }
}
