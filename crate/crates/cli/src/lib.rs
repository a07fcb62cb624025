//! Scenario files, route reports, the command implementations and the HTTP
//! service behind the `pylon` binary.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario_file;
pub mod service;

pub use error::{CliError, CliResult};
pub use scenario_file::{LoadedScenario, ScenarioFile};
