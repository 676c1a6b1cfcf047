use thiserror::Error;

/// Errors raised by the walk, dilation and circuit routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OqwError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("columns are not orthonormal (max |V^dag V - I| = {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator norm {norm} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("Kraus completeness violated (max |sum K^dag K - I| = {deviation:e})")]
    Incomplete { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("walk specification violates completeness at {} node(s)", .0.len())]
    InvalidSpec(Vec<crate::walk::Violation>),

    #[error("node {node} has zero mass ({mass:e}); cannot post-select")]
    ZeroMass { node: usize, mass: f64 },

    #[error("did not converge within {steps} steps (last delta {last_delta:e})")]
    NotConverged { steps: usize, last_delta: f64 },

    #[error("generalized dilation condition {condition} violated: {detail}")]
    DilationCondition { condition: u8, detail: String },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, OqwError>;
