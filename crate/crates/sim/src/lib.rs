//! Scenario runners and command-line plumbing on top of `irs-core`.

pub mod error;
pub mod experiments;
pub mod parallel;
pub mod scenes;
pub mod table;

pub use error::SimError;
pub use experiments::{ExperimentConfig, RunOutput, Scenario};
pub use parallel::Runner;
pub use table::ResultTable;
