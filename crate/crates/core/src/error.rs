use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are coarse on purpose: callers (the CLI in particular) map
/// them onto exit-code classes, so each variant belongs to exactly one class.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested object or enumeration exceeds a configured size limit.
    #[error("size limit exceeded: {what} ({actual} > {limit})")]
    Size {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    /// An argument is outside the domain of the operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Every spin has zero conditional weight at this vertex.
    #[error("frozen site: vertex {vertex} has no admissible spin")]
    FrozenSite { vertex: usize },

    /// The model admits no configuration of positive weight on this graph.
    #[error("no legal configuration exists")]
    EmptyStateSpace,

    /// Single-site moves do not connect the legal configurations.
    #[error("dynamics is not ergodic: {components} communicating classes")]
    NonErgodic { components: usize },

    /// An iterative numerical method failed to reach its tolerance.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
