use thiserror::Error;

/// Errors raised by operator evaluation, moment formulas and the analysis harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula needs `n > order * c` and the parameters do not satisfy it.
    #[error("{what} requires n > {factor}c, got n = {n}, c = {c}")]
    Threshold {
        what: &'static str,
        factor: u32,
        n: f64,
        c: f64,
    },

    #[error(
        "function `{function}` with growth degree {degree} is not integrable against the kernel: \
         need n > {}c, got n = {n}, c = {c}",
        degree + 1
    )]
    Integrability {
        function: String,
        degree: u32,
        n: f64,
        c: f64,
    },

    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("function `{0}` is not declared bounded")]
    UnboundedFunction(String),

    #[error("invalid test function `{name}`: {detail}")]
    InvalidFunction { name: String, detail: String },

    /// Failure at a specific grid index.
    #[error("point {index} (x = {x}): {source}")]
    AtPoint {
        index: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Strips any `AtPoint` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
