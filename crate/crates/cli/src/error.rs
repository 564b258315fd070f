use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] jbk_core::Error),
    #[error("{} check(s) failed: {}", .0.len(), .0.join("; "))]
    Assertion(Vec<String>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e.root() {
                jbk_core::Error::Domain(_)
                | jbk_core::Error::Threshold { .. }
                | jbk_core::Error::Integrability { .. }
                | jbk_core::Error::UnboundedFunction(_) => 3,
                jbk_core::Error::InvalidFunction { .. } => 2,
                _ => 3,
            },
            CliError::Assertion(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e.root() {
                jbk_core::Error::Domain(_) => "domain",
                jbk_core::Error::Threshold { .. } => "threshold",
                jbk_core::Error::Integrability { .. } => "integrability",
                jbk_core::Error::UnboundedFunction(_) => "unbounded-function",
                jbk_core::Error::InvalidFunction { .. } => "invalid-function",
                jbk_core::Error::Convergence { .. } => "convergence",
                jbk_core::Error::AtPoint { .. } => "domain",
            },
            CliError::Assertion(_) => "assertion",
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Report {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("plain struct serializes")
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
