//! Error type shared by every module of the crate.
//!
//! The variants split into three rough families: malformed input (parsing,
//! schema, shape mismatches), mathematical precondition failures (a matrix
//! that is not regular, a series whose log-norm cannot be certified, a chain
//! that is not a cycle), and internal certification failures, which indicate a
//! bug and are never expected to surface.

use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error)]
pub enum Error {
    // ---- parsing and shapes -------------------------------------------------
    #[error("cannot parse `{text}` as an exact rational")]
    BadRational { text: String },

    #[error("cannot parse word `{text}`: {reason}")]
    BadWord { text: String, reason: String },

    #[error("unknown generator `{name}`")]
    UnknownGenerator { name: String },

    #[error("invalid group description: {reason}")]
    BadGroupSpec { reason: String },

    #[error("operands belong to different groups")]
    SpecMismatch,

    #[error("operands carry different weightings")]
    WeightingMismatch,

    #[error("dimension mismatch: {context}")]
    ShapeMismatch { context: String },

    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operation requires an abelian group")]
    NotAbelian,

    #[error("coefficient {value} is not an integer but integer coefficients were required")]
    NonIntegerCoefficient { value: String },

    #[error("malformed input: {reason}")]
    Schema { reason: String },

    // ---- mathematical preconditions -----------------------------------------
    #[error("log-norm is not certified: the series has no terms above its cutoff {cutoff}")]
    UncertifiedLogNorm { cutoff: String },

    #[error("series is not contracting: log-norm {log_norm} is not strictly negative")]
    NotContracting { log_norm: String },

    #[error("requested level {requested} lies below the certified cutoff {cutoff}")]
    CutoffTooCoarse { cutoff: String, requested: String },

    #[error("operation requires exact series (cutoff -inf), found cutoff {cutoff}")]
    NotExact { cutoff: String },

    #[error("series command requires a strictly negative cutoff, got {requested}")]
    CutoffNotNegative { requested: String },

    #[error("matrix is not regular: cycle {cycle:?} of the support digraph has mean weight {mean}")]
    NotRegular {
        /// Vertices of a maximum-mean cycle, numbered from one.
        cycle: Vec<usize>,
        mean: Rational,
    },

    #[error("requested depth {requested} is below the certified depth {certified}")]
    DepthTooSmall { requested: u64, certified: u64 },

    #[error("chain is not a cycle: its boundary has {terms} terms above cutoff {cutoff}")]
    NotACycle { terms: usize, cutoff: String },

    #[error("matrices are not mutually inverse above level {level}")]
    NotInverse { level: String },

    #[error("support violation: {reason}")]
    SupportViolation { reason: String },

    #[error("leading term {term} is not a unit of the form ±h, cannot canonicalize")]
    LeadingTermNotUnit { term: String },

    #[error("boundary composition is nonzero in {defects} entries, first at dimension {dim}, entry ({row}, {col})")]
    NotAComplex {
        dim: usize,
        row: usize,
        col: usize,
        defects: usize,
    },

    #[error("map is not a chain map: first failure at dimension {dim}, entry ({row}, {col})")]
    NotAChainMap { dim: usize, row: usize, col: usize },

    #[error("inclusion is not the standard split inclusion at dimension {dim}")]
    InclusionNotStandard { dim: usize },

    // ---- internal certification ---------------------------------------------
    #[error("internal certification failed: {what}")]
    CertificationFailed { what: String },
}

impl Error {
    /// True for errors that report a violated mathematical precondition, as
    /// opposed to malformed input. The command-line tool maps these to a
    /// distinct exit status.
    pub fn is_mathematical(&self) -> bool {
        !matches!(
            self,
            Error::BadRational { .. }
                | Error::BadWord { .. }
                | Error::UnknownGenerator { .. }
                | Error::BadGroupSpec { .. }
                | Error::SpecMismatch
                | Error::WeightingMismatch
                | Error::ShapeMismatch { .. }
                | Error::NotSquare { .. }
                | Error::NotAbelian
                | Error::NonIntegerCoefficient { .. }
                | Error::Schema { .. }
        )
    }
}
