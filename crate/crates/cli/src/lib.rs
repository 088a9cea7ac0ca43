//! Experiment harness behind the `sqcflow` binary: function specs, task
//! runners, artifact writing, benchmark suites and the acceptance criteria.

pub mod acceptance;
pub mod bench;
pub mod error;
pub mod experiment;
pub mod functions;
pub mod table;

pub use error::{CliError, CliResult, ExitStatus};
pub use experiment::{run_experiment, ExperimentConfig, Outcome, Task};
pub use table::Table;
