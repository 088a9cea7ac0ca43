//! Strongly quasiconvex functions: oracles, sampled class checks, gradient
//! flows, gradient descent and heavy-ball solvers with rate certificates,
//! and estimators for the constants those certificates need.
//!
//! Everything is generic over the [`Scalar`] type (`f32` or `f64`); the
//! `*64` aliases below fix it to `f64`.

pub mod catalog;
pub mod domain;
pub mod error;
pub mod estimate;
pub mod flows;
pub mod numerics;
pub mod oracle;
pub mod point;
pub mod sampling;
pub mod scalar;
pub mod solvers;
pub mod trajectory;
pub mod verify;

pub use catalog::CatalogEntry;
pub use domain::{DomainKind, DomainSpec};
pub use error::{Error, Result};
pub use flows::{FlowConfig, FlowKind, Integrator, LipschitzScope, LyapunovParams};
pub use oracle::FunctionOracle;
pub use point::Point;
pub use sampling::SampleBudget;
pub use scalar::{ineq_tol, Scalar};
pub use solvers::{GdConfig, HbConfig, StepRule};
pub use trajectory::{CertificateKind, RateCertificate, StopReason, Trajectory, TrajectorySample};
pub use verify::{ClassReport, Property, Witness};

pub type Point64 = Point<f64>;
pub type Oracle64 = FunctionOracle<f64>;
pub type Entry64 = CatalogEntry<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Certificate64 = RateCertificate<f64>;
pub type Report64 = ClassReport<f64>;

pub type Point32 = Point<f32>;
pub type Oracle32 = FunctionOracle<f32>;
pub type Entry32 = CatalogEntry<f32>;
pub type Trajectory32 = Trajectory<f32>;
