use thiserror::Error;

/// Errors raised by the library.
///
/// The variants fall into three families that the CLI maps onto exit codes:
/// malformed or invalid input ([`Error::Parse`], [`Error::Validation`],
/// [`Error::Config`], [`Error::Lookup`]), refusals of the brute-force oracles
/// ([`Error::BudgetExceeded`]), and internal invariant failures that indicate
/// a defect ([`Error::Invariant`], [`Error::Numeric`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("allocation lookup failed: {0}")]
    Lookup(String),

    #[error("allocation error: {0}")]
    Allocation(String),

    #[error("graph is not series-parallel: {0}")]
    NotSeriesParallel(String),

    #[error("oracle refused: {0}")]
    BudgetExceeded(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than a defect.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Validation(_)
                | Error::Config(_)
                | Error::Lookup(_)
                | Error::NotSeriesParallel(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
