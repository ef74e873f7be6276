//! Command-level errors with stable exit codes.
//!
//! Exit codes: 2 = config problem, 3 = missing file, 4 = divergence,
//! 1 = anything else. Errors print as one JSON line on stderr so scripts
//! can parse failures.

use eprune_core::trainer::TrainError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unparseable or invalid configuration (bad schema, bad values,
    /// missing required section).
    #[error("{0}")]
    Config(String),
    /// A referenced file does not exist or cannot be opened.
    #[error("{0}")]
    MissingFile(String),
    /// Training produced non-finite values.
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::MissingFile(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::MissingFile(_) => "missing_file",
            CliError::Divergence(_) => "divergence",
            CliError::Other(_) => "error",
        }
    }

    /// One-line machine-readable rendering for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string() }
        })
        .to_string()
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile(format!("{context}: {err}"))
        } else {
            CliError::Other(format!("{context}: {err}"))
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { .. } => CliError::Divergence(e.to_string()),
            TrainError::InvalidConfig(_) | TrainError::ClassMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}
