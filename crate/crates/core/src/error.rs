use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a unit: valuation is {valuation}, expected 0")]
    NotAUnit { valuation: u32 },

    #[error("budget exceeded: operation needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("invalid fiber: residue cokernel type is {found}, target requires {expected}")]
    InvalidFiber { expected: String, found: String },

    #[error("no witness: {0}")]
    NoWitness(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("element has {found} coefficients, ring degree is {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid ring parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
