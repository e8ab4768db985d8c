//! Batch front end for the `bent-core` certification pipeline: TOML
//! configuration, JSON reports, binary matrix dumps and parameter sweeps.

pub mod certify;
pub mod config;
pub mod dump;
pub mod error;
pub mod report;
pub mod sweep;
pub mod verdict;

pub use certify::run_certify;
pub use config::Config;
pub use error::{CliError, EXIT_CODES};
pub use report::CertificationReport;
pub use sweep::{bisect_omega, run_sweep, Grid};
pub use verdict::Verdict;
