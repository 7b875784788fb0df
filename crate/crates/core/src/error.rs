//! Crate-wide error type.

use std::fmt;
use std::io;

/// Errors reported by the library.
#[derive(Debug)]
pub enum Error {
    /// Dimension must be at least 1.
    InvalidDimension {
        dim: u32,
    },
    /// A 1-based index or shift fell outside `[1, dim]`.
    IndexOutOfRange {
        what: &'static str,
        value: u32,
        dim: u32,
    },
    /// A vector violated its construction invariants.
    InvalidVector {
        reason: String,
    },
    /// Hashing an empty vector is undefined (no minimum exists).
    EmptyVector,
    /// Two objects that must share a dimension do not.
    DimensionMismatch {
        left: u32,
        right: u32,
    },
    /// Circulant schemes require `1 <= K <= D`.
    KOutOfRange {
        k: usize,
        dim: u32,
    },
    /// Sketches disagree on scheme, K, dimension, or permutation lineage.
    IncompatibleSketches {
        reason: String,
    },
    /// Jaccard similarity is undefined when both vectors are empty (f = 0).
    UndefinedSimilarity,
    /// A synthetic-pair or run specification is inconsistent.
    InvalidSpec {
        reason: String,
    },
    /// A dataset file failed to parse. `line` is 1-based.
    Parse {
        line: usize,
        reason: String,
    },
    Io(io::Error),
    /// The exact evaluator refused an instance whose term count exceeds the budget.
    BudgetExceeded {
        terms: u128,
        budget: u128,
    },
    /// The brute-force oracle enumerates all D! permutations and is capped.
    OracleDimension {
        dim: u32,
        max: u32,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension { dim } => write!(f, "invalid dimension {dim}: must be >= 1"),
            Error::IndexOutOfRange { what, value, dim } => {
                write!(f, "{what} {value} out of range [1, {dim}]")
            }
            Error::InvalidVector { reason } => write!(f, "invalid vector: {reason}"),
            Error::EmptyVector => write!(
                f,
                "empty vector: minimum over an empty support is undefined"
            ),
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::KOutOfRange { k, dim } => {
                write!(
                    f,
                    "K = {k} out of range: circulant schemes require 1 <= K <= D = {dim}"
                )
            }
            Error::IncompatibleSketches { reason } => write!(f, "incompatible sketches: {reason}"),
            Error::UndefinedSimilarity => {
                write!(f, "similarity undefined: both vectors are empty (f = 0)")
            }
            Error::InvalidSpec { reason } => write!(f, "invalid spec: {reason}"),
            Error::Parse { line, reason } => write!(f, "parse error at line {line}: {reason}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::BudgetExceeded { terms, budget } => {
                write!(
                    f,
                    "refusing evaluation: {terms} terms exceed budget {budget}"
                )
            }
            Error::OracleDimension { dim, max } => {
                write!(
                    f,
                    "oracle refused: D = {dim} exceeds the D! enumeration cap {max}"
                )
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
