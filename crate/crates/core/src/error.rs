use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live over different rings: {0}")]
    SpecMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a unit: {0}")]
    NotAUnit(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("element is not integral: {0}")]
    NotIntegral(String),
    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
    #[error("matrix is not in the parabolic subgroup: {0}")]
    NotInParabolic(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("wrong Cartan cell: expected {expected:?}, found {found:?}")]
    WrongCell { expected: Vec<i32>, found: Vec<i32> },
    #[error("order convention violated: {0}")]
    ConventionError(String),
    #[error("not a minimal coset representative: {0}")]
    NotMinimalRep(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
}

pub type Result<T> = std::result::Result<T, Error>;
