//! Experiment harness around `aiep-core`: declarative experiment files,
//! multi-seed runs and CSV/JSON artifacts.

pub mod error;
pub mod experiment;
pub mod output;
pub mod reports;
pub mod spec;

pub use error::{CliError, CliResult};
pub use experiment::{execute, run_experiment, RunSummary};
pub use spec::{load_spec, parse_spec, ExperimentSpec, ProblemKind};
