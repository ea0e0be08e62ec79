use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: malformed or inconsistent experiment file, flags or
    /// matrix files.
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(aiep_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<aiep_core::Error> for CliError {
    fn from(e: aiep_core::Error) -> Self {
        use aiep_core::Error as E;
        match e {
            E::NotPositiveDefinite { .. }
            | E::DegenerateDenominator(_)
            | E::ObjectiveNonFinite { .. }
            | E::NoConvergence => CliError::Numerical(e),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
