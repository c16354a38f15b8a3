use lorentz_decay::DecayError;
use thiserror::Error;

/// Failure of a CLI command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or unreadable input (exit 2).
    #[error("input error: {0}")]
    Input(String),
    /// A numerical routine failed (exit 3).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The request falls in the excluded `gamma = 1` regime (exit 4).
    #[error("excluded regime: {0}")]
    Excluded(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Excluded(_) => 4,
        }
    }
}

impl From<DecayError> for CliError {
    fn from(e: DecayError) -> Self {
        match e {
            DecayError::Domain(_)
            | DecayError::Parse(_)
            | DecayError::Io(_)
            | DecayError::InvalidModel(_)
            | DecayError::InsufficientSamples { .. } => CliError::Input(e.to_string()),
            DecayError::ExcludedRegime(_) => CliError::Excluded(e.to_string()),
            DecayError::Singularity(_)
            | DecayError::NoSolution(_)
            | DecayError::OutOfWindow { .. }
            | DecayError::FitFailed { .. }
            | DecayError::Precision { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
