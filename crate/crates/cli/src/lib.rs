//! Scenario runner for `collapse-core`: reads TOML scenarios, runs the named
//! experiments and writes deterministic CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{Config, Scenario};
pub use error::CliError;
