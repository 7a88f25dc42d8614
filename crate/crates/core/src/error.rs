use thiserror::Error;

use crate::root_datum::WeightVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weight {0} is not dominant")]
    NotDominant(WeightVec),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(i64, i64),
    #[error("Weyl group exceeds the cap of {0} elements")]
    WeylCapExceeded(usize),
    #[error("invalid root datum: {0}")]
    InvalidDatum(String),
    #[error("representation failed validation: {0}")]
    Validation(String),
    #[error("window: {0}")]
    Window(String),
    #[error("negative multiplicity {mult} for {lambda} in decomposition")]
    NegativeMultiplicity { lambda: WeightVec, mult: i64 },
    #[error("character is not Weyl-invariant at {0}")]
    NotInvariant(WeightVec),
    #[error("inexact division: {0}")]
    InexactDivision(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
