//! Error type shared by every module of the crate.

use std::error;
use std::fmt;

/// Everything that can go wrong while validating inputs or running the
/// numerical pipeline. Variants carry enough context to name the violated
/// requirement in the message.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix or vector had the wrong dimension for the operation.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix that must be (strictly) positive definite is not.
    NotPositiveDefinite { what: &'static str },
    /// A general square matrix could not be inverted.
    SingularMatrix { what: &'static str },
    /// A principal submatrix required by a subset operation is singular.
    SingularSubmatrix { what: &'static str },
    /// A Loewner ordering required between two matrices does not hold.
    OrderingViolation { what: &'static str },
    /// A weight vector entry is zero or negative.
    NonPositiveWeight { index: usize },
    /// Two lists that must agree in length do not.
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A distortion constraint coincides with the source covariance, so the
    /// corresponding noise covariance is unbounded.
    DegenerateDistortion { index: usize },
    /// A rate that must be nonnegative came out negative.
    NegativeRate { index: usize, value: f64 },
    /// The operation is not defined for this number of weight groups.
    UnsupportedGroupCount { found: usize, what: &'static str },
    /// A root-finding bracket could not be established or did not shrink.
    BracketingFailure { what: String },
    /// The channel-enhancement step produced an inconsistent noise update.
    EnhancementFailure { what: String },
    /// An objective was evaluated outside its domain.
    DomainError { what: String },
    /// An instance file violated a documented invariant.
    InvalidInstance { what: String },
    /// An instance file could not be parsed at all.
    Parse { what: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected dimension {expected}, found {found}"),
            Error::NotPositiveDefinite { what } => {
                write!(f, "{what} is not positive definite")
            }
            Error::SingularMatrix { what } => write!(f, "{what} is singular"),
            Error::SingularSubmatrix { what } => {
                write!(f, "principal submatrix for {what} is singular")
            }
            Error::OrderingViolation { what } => {
                write!(f, "ordering violation: {what}")
            }
            Error::NonPositiveWeight { index } => {
                write!(f, "weight {index} is not strictly positive")
            }
            Error::LengthMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected {expected} entries, found {found}"),
            Error::DegenerateDistortion { index } => write!(
                f,
                "distortion constraint {index} coincides with the source covariance"
            ),
            Error::NegativeRate { index, value } => {
                write!(f, "vertex rate {index} is negative ({value:.3e})")
            }
            Error::UnsupportedGroupCount { found, what } => {
                write!(f, "{what} is not defined for {found} weight group(s)")
            }
            Error::BracketingFailure { what } => write!(f, "bracketing failure: {what}"),
            Error::EnhancementFailure { what } => write!(f, "enhancement failure: {what}"),
            Error::DomainError { what } => write!(f, "domain error: {what}"),
            Error::InvalidInstance { what } => write!(f, "invalid instance: {what}"),
            Error::Parse { what } => write!(f, "parse error: {what}"),
        }
    }
}

impl error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
