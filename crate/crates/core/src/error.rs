//! Error type shared across the crate.
//!
//! User-facing messages always name sources by their 1-based index, matching
//! the pattern text format and the CLI config schema.

use std::fmt;

/// Everything that can go wrong when validating inputs or running an
/// analysis. `Internal` is reserved for violated invariants of the
/// implementation itself (never for bad user input) so callers can map it to
/// a distinct exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A system needs at least one source.
    EmptySystem,
    /// A per-source parameter is out of range; `index` is 0-based internally,
    /// rendered 1-based.
    InvalidSource { index: usize, reason: String },
    /// A pattern referenced a source outside `1..=n_sources`.
    SourceOutOfRange { entry: usize, n_sources: usize },
    /// A pattern must contain every source at least once to be feasible.
    InfeasiblePattern { missing_source: usize },
    /// Patterns cannot be empty.
    EmptyPattern,
    /// A pattern string token did not parse as a positive integer.
    BadPatternToken { token: String },
    /// A scalar argument (epsilon, resolution, utilization, ...) was rejected.
    BadParameter { name: &'static str, reason: String },
    /// An internal consistency check failed; the message carries a
    /// diagnostics dump. Indicates a bug, not bad input.
    Internal { context: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySystem => write!(f, "system must contain at least one source"),
            Error::InvalidSource { index, reason } => {
                write!(f, "source {}: {}", index + 1, reason)
            }
            Error::SourceOutOfRange { entry, n_sources } => write!(
                f,
                "pattern entry {} exceeds the number of sources ({})",
                entry, n_sources
            ),
            Error::InfeasiblePattern { missing_source } => {
                write!(f, "infeasible: source {} absent", missing_source + 1)
            }
            Error::EmptyPattern => write!(f, "pattern must contain at least one entry"),
            Error::BadPatternToken { token } => {
                write!(f, "pattern token {:?} is not a positive source index", token)
            }
            Error::BadParameter { name, reason } => write!(f, "{}: {}", name, reason),
            Error::Internal { context } => write!(f, "internal invariant violated: {}", context),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
