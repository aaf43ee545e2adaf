//! Scenario runner: TOML scenarios in, CSV tables out.

pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use run::{run_file, run_table, RunOptions};
pub use scenario::Scenario;
