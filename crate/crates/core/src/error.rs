use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series is not Hermitian (max asymmetry {max_asymmetry:.3e}); cannot produce a real signal")]
    SymmetryViolation { max_asymmetry: f64 },

    #[error("level {level} does not fit a grid of size {n}; max usable level is {max_level}")]
    LevelOverflow { level: u32, n: usize, max_level: u32 },

    #[error("circulant embedding has eigenvalue {min_eigenvalue:.3e} below tolerance")]
    SynthesisFailure { min_eigenvalue: f64 },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad inputs or configuration, as opposed to
    /// failures during estimation itself.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Config(_) | Error::LevelOverflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
