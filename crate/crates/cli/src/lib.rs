//! Experiment driver: configuration, the five experiments, and the artifact
//! files they write.
//!
//! ```no_run
//! use inertial_cli::{config::{ExperimentConfig, ExperimentKind}, run};
//!
//! let cfg = ExperimentConfig::resolve(ExperimentKind::OracleCheck, None, &[]).unwrap();
//! let outcome = run(&cfg).unwrap();
//! for c in outcome.checks() {
//!     println!("{c}");
//! }
//! ```

pub mod config;
pub mod error;
pub mod experiments;
pub mod field;
pub mod output;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::RunError;
pub use output::{Check, RunOutcome, Status};

/// Runs `f` on a pool of `cfg.threads()` workers when that is set and the
/// run is parallel, and on the global pool (or the current thread) otherwise.
fn with_threads<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    #[cfg(feature = "parallel")]
    if cfg.threads() > 0 && cfg.exec() == inertial_core::Exec::Parallel {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads())
            .build()
            .map_err(|e| RunError::ThreadPool(e.to_string()))?;
        return Ok(pool.install(f));
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cfg;
    Ok(f())
}

/// Runs the experiment and writes its artifacts to the output directory.
///
/// A solver failure part-way through still writes what was computed, marked
/// partial, and then returns [`RunError::Partial`].
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let mut output = with_threads(cfg, || experiments::run_experiment(cfg))??;
    let files = output::write_all(cfg, &output)?;
    if let Some(err) = output.failure.take() {
        return Err(RunError::Partial(err));
    }
    Ok(RunOutcome { config_hash: cfg.hash(), output, files })
}
