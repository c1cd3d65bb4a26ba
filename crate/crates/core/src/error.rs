use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("unsupported dimension {0}, expected 2 or 4")]
    Dimension(usize),

    #[error("{field} = {value} is out of range: {reason}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The measured antibunching probability cannot be produced by any singlet
    /// fraction in [0, 1] at the given visibility. `clamped` is the nearest
    /// in-model singlet fraction.
    #[error("antibunching probability {probability} outside model band [{low}, {high}] (clamped p = {clamped})")]
    OutOfModel {
        probability: f64,
        low: f64,
        high: f64,
        clamped: f64,
    },

    #[error("measurement records do not cover projector {0}")]
    MissingProjector(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
