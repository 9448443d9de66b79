use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid curvature function: {0}")]
    InvalidCurvature(String),

    #[error("curvature must be nonpositive, but equals {value} at t = {t}")]
    NotNonpositive { t: f64, value: f64 },

    #[error("warping function vanishes at t = {t} (conjugate point); the model metric degenerates there")]
    ConjugatePoint { t: f64 },

    #[error("t = {t} lies beyond the solved horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("moment integral diverges; quantity is unbounded")]
    Unbounded,

    #[error("integration failed at {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("model ball volume stays bounded; condition (B-1) fails")]
    ConditionB1Violated,

    #[error("degenerate triangle: sides {0:?} violate the strict triangle inequality")]
    DegenerateTriangle([f64; 3]),

    #[error("comparison triangle needs pole angle {theta} outside the admissible sector")]
    SectorExceeded { theta: f64 },

    #[error("root not bracketed on [{a}, {b}]")]
    RootNotBracketed { a: f64, b: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cannot classify: {0}")]
    Unresolved(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
