use thiserror::Error;

/// Errors raised by chain, geometry and pipeline operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GmtError {
    #[error("coefficient groups differ: {0} vs {1}")]
    GroupMismatch(String, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("general position violated: {0}")]
    GeneralPosition(String),

    #[error("inconsistent base multiplicity: {0}")]
    InconsistentBase(String),

    #[error("base coefficient g0 is zero")]
    ZeroBaseCoefficient,

    #[error("ambiguous plane: eigen-gap {gap:e} below {tol:e}")]
    AmbiguousPlane { gap: f64, tol: f64 },

    #[error("hypothesis `{check}` failed: {detail}")]
    Hypothesis { check: String, detail: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<GmtError>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl GmtError {
    pub fn hypothesis(check: impl Into<String>, detail: impl Into<String>) -> Self {
        GmtError::Hypothesis {
            check: check.into(),
            detail: detail.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        GmtError::InvalidParameter(msg.into())
    }

    /// Tag an error with the pipeline stage it came from.
    pub fn at(self, stage: &'static str) -> Self {
        GmtError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the error is a failed precondition gate rather than a malfunction.
    pub fn is_gate_failure(&self) -> bool {
        match self {
            GmtError::Hypothesis { .. }
            | GmtError::GeneralPosition(_)
            | GmtError::InconsistentBase(_)
            | GmtError::ZeroBaseCoefficient
            | GmtError::AmbiguousPlane { .. } => true,
            GmtError::Stage { source, .. } => source.is_gate_failure(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for GmtError {
    fn from(e: std::io::Error) -> Self {
        GmtError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GmtError {
    fn from(e: serde_json::Error) -> Self {
        GmtError::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GmtError>;
