//! Command-line harness: reference reproduction, random search, single-state
//! evaluation and condition checks, each emitting one JSON (or CSV) report.

pub mod cli;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod report;

pub use commands::{SearchSpec, Settings};
pub use error::CliError;
pub use report::{Expectation, ReportDocument, Rule, Summary};
