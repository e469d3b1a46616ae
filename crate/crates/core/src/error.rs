use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("signature mismatch: Cl({0},{1}) vs Cl({2},{3})")]
    SignatureMismatch(u8, u8, u8, u8),

    #[error("base space mismatch: R^({0},{1}) vs R^({2},{3})")]
    BaseMismatch(u8, u8, u8, u8),

    #[error("{0} generators exceed the configured cap of {1}")]
    DimensionCap(u32, u32),

    #[error("grade {0} out of range for n = {1}")]
    GradeOutOfRange(u32, u32),

    #[error("coordinate index {0} out of range for an {1}-dimensional base")]
    CoordOutOfRange(usize, usize),

    #[error("element is not invertible (left-multiplication matrix is singular{})",
            .cond.map(|c| format!(", condition estimate {c:.3e}")).unwrap_or_default())]
    Singular { cond: Option<f64> },

    #[error("power series did not converge within {0} terms")]
    SeriesDiverged(usize),

    #[error("{0} is not available in exact-rational mode")]
    ExactModeUnsupported(&'static str),

    #[error("scalar function applied to an operand with non-scalar components")]
    NonScalarOperand,

    #[error("expression requires derivatives beyond the stored jet order")]
    JetOrderExceeded,

    #[error("single-grade frame projection is unavailable for odd n; use the paired projection")]
    OddPairedOnly,

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid fixture: {0}")]
    InvalidFixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
