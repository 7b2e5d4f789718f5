use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ambient dimensions n={n}, k={k}: need 1 <= k < n")]
    InvalidAmbient { n: usize, k: usize },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("ambient mismatch: ({n1}, {k1}) vs ({n2}, {k2})")]
    AmbientMismatch {
        n1: usize,
        k1: usize,
        n2: usize,
        k2: usize,
    },

    #[error("point {index} does not lie on the reference slice H_{index}: {detail}")]
    NotOnReferenceSlice { index: usize, detail: String },

    #[error("parameter {name} = {value} violates {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("slopes coincide (slope gap is zero); use the single-tube volume bound instead")]
    ParallelPlanes,

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("scale {eps} is below the generation scale {gen_scale} of the cloud")]
    BelowGenerationScale { eps: f64, gen_scale: f64 },

    #[error("need at least {needed} usable scale entries, got {got}")]
    InsufficientScales { needed: usize, got: usize },

    #[error("weights must be nonnegative and sum to {expected}, got {got}")]
    BadWeights { expected: f64, got: f64 },

    #[error("plane {index} does not meet the reference slices inside the window")]
    PlaneOutsideWindow { index: usize },

    #[error("spatial indexing supports ambient dimension up to {max}, got {got}")]
    UnsupportedDimension { max: usize, got: usize },

    #[error("no dyadic level of the cover carries enough content (content hypothesis met: {hypothesis_met})")]
    NoScale { hypothesis_met: bool },

    #[error("cell index overflow at scale {0}")]
    CellOverflow(f64),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
