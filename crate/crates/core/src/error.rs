use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequency vector {index} has length {found}, expected dimension {expected}")]
    FrequencyLength {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} coefficients for {right} polynomials")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("grid resolution {res} is below the floor {floor}")]
    ResolutionTooLow { res: usize, floor: usize },

    #[error("point coordinate {index} has modulus {modulus} > 1")]
    OutsidePolydisk { index: usize, modulus: f64 },

    #[error("the zero polynomial has no weak-type ratio")]
    ZeroPolynomial,

    #[error("polynomial is not real-valued")]
    NotReal,

    #[error("Brownian path (seed {seed:#018x}) did not exit the disk before t_cap = {t_cap}")]
    CapHit { seed: u64, t_cap: f64 },

    #[error("functional reads {referenced} which is later than checkpoint {checkpoint}")]
    NotPastMeasurable {
        referenced: String,
        checkpoint: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
