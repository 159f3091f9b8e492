use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid structure exponent b={0}: must be odd and at least 5")]
    InvalidExponent(u32),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query point ({x1}, {x2}) lies on the curve")]
    PointOnCurve { x1: f64, x2: f64 },

    #[error("integration failed at t={t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("root finding failed: {0}")]
    NoBracket(String),

    #[error("level {zeta} admits the straight chord (chord P̃-level {chord_level}); the segment is the minimizer")]
    ChordAdmissible { zeta: f64, chord_level: f64 },

    #[error("level {zeta} outside the bound regime: must be at most {limit}")]
    Regime { zeta: f64, limit: f64 },

    #[error("segments {first} and {second} overlap collinearly")]
    CollinearOverlap { first: usize, second: usize },

    #[error("cusp at vertex {index}: turning angle is ±π")]
    Cusp { index: usize },

    #[error("loop statistics undefined: maximiser sits at the origin")]
    UndefinedDelta,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
