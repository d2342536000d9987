use std::process::ExitCode;

use opuc::OpucError;

/// Failures of a command, each tied to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("reconstruction failed at {step}: {source}")]
    Reconstruction {
        step: &'static str,
        #[source]
        source: OpucError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::InvalidInput(_) => 2,
            CliError::Reconstruction { .. } => 3,
            CliError::Io { .. } => 4,
        })
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Names the reconstruction stage an inverse-spectral error came from.
    pub fn reconstruction(source: OpucError) -> Self {
        let step = match source {
            OpucError::InvalidSpectrum(_) | OpucError::DegenerateNodes { .. } => "spectrum validation",
            OpucError::NotPersymmetricSpectrum(_) => "monicity gate",
            OpucError::NotSzegoClass { .. } | OpucError::Inconsistency { .. } | OpucError::Shape(_) => {
                "inverse Szegő descent"
            }
            OpucError::ReconstructionMismatch(_) | OpucError::PersymmetryViolation(_) => "forward validation",
            _ => "reconstruction",
        };
        CliError::Reconstruction { step, source }
    }
}

impl From<OpucError> for CliError {
    fn from(e: OpucError) -> Self {
        CliError::InvalidInput(e.to_string())
    }
}
