use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] inertial_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A solver failed part-way; the artifacts computed so far were written.
    #[error("run aborted after writing partial results: {0}")]
    Partial(inertial_core::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}
