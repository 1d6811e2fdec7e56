use thiserror::Error;

/// Errors raised by model construction, simulation and ODE integration.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (bad lengths, missing fields,
    /// step sizes outside their admissible range).
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical integrator left its admissible region.
    #[error("solver error: {0}")]
    Solver(String),
    /// A model produced a non-finite or otherwise unusable value.
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::config(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}
