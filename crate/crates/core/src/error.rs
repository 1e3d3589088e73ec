use thiserror::Error;

use crate::dyadic::FamilyKind;

#[derive(Debug, Error)]
pub enum DslError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{family:?} rectangles are not defined in dimension {dim}")]
    BadFamilyDimension { family: FamilyKind, dim: usize },

    #[error("rectangle violates the {family:?} family constraint: {reason}")]
    FamilyConstraint { family: FamilyKind, reason: String },

    #[error("empty scale window: coarse level {coarse} is finer than fine level {fine}")]
    EmptyWindow { coarse: i32, fine: i32 },

    #[error("scale window too narrow: supremum attained on the window boundary ({0})")]
    WindowTooNarrow(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("Z construction kept {kept} points, below the required {required}")]
    InsufficientZ { kept: usize, required: usize },

    #[error("collection mixes rectangle families")]
    MixedFamilies,

    #[error("maximal function diverges at {z}: support point {p} has dyadic distance 0")]
    Divergent { z: String, p: String },

    #[error("degenerate supports: {0}")]
    Degenerate(String),

    #[error("support points {0} and {1} share a level-{2} cell")]
    CellCollision(String, String, i32),

    #[error("undefined value at support point {0}")]
    MissingValue(String),

    #[error("configuration is not certified: clause {0} failed")]
    Uncertified(String),

    #[error("divergent tail: 1/r + 1/s must exceed 1")]
    DivergentTail,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = DslError> = std::result::Result<T, E>;
