use serde::Serialize;
use thiserror::Error;

use fdiv_core::Error as CoreError;

/// Failure of one invocation, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadArguments(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    ReproFailed(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadArguments(_) => 2,
            CliError::Domain(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::ReproFailed(_) | CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::BadArguments(_) => "bad_arguments",
            CliError::Domain(_) => "domain_violation",
            CliError::NonConvergence(_) => "non_convergence",
            CliError::ReproFailed(_) => "reproduction_failed",
            CliError::Io(_) => "io",
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        let message = self.to_string().lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ");
        serde_json::to_string(&Line { error: self.kind(), exit_code: self.exit_code(), message })
            .expect("error line serializes")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::DomainViolation(_)
            | CoreError::OutsideDerivativeDomain { .. }
            | CoreError::NonFiniteSummand(_) => CliError::Domain(message),
            _ => CliError::BadArguments(message),
        }
    }
}
