//! Command-line front end: curve parsing, trace-table caching and report
//! emission.

pub mod cache;
pub mod error;
pub mod job;
pub mod parse;

pub use error::CliError;
pub use job::{run_job, Command, Format, JobSpec};
pub use parse::{parse_curve, parse_cutoffs, parse_interval};
