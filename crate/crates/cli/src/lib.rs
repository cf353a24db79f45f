//! Experiment runner for `scarchain`.
//!
//! A run is described by one JSON document ([`config::ExperimentConfig`]).
//! [`pipeline::execute`] computes the named experiment, writes CSV/JSON
//! result files plus a `manifest.json`, and in check mode evaluates the
//! acceptance criteria into `check.json`.

pub mod check;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{Experiment, ExperimentConfig, ResolvedConfig};
pub use error::{CliError, CliResult};
pub use pipeline::{execute, Mode, RunOutcome};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "SCARCHAIN_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] if it is set.
pub fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
