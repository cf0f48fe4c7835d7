use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid channel parameters: {0}")]
    InvalidParams(&'static str),
    #[error("deformation factor undefined: 1 + y*n = {value} < 0 at n = {n}")]
    Domain { n: usize, value: f64 },
    #[error("dimension {requested} exceeds the finite bound {max}")]
    DimensionExceeded { requested: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("environment truncation at {env_dim} leaves tail {tail:e} above tolerance {tol:e}")]
    Truncation { env_dim: usize, tail: f64, tol: f64 },
    #[error("input state loses {tail:e} of its norm outside {dim} Fock levels")]
    InputTruncation { dim: usize, tail: f64 },
    #[error("no convergence up to environment dimension {dim_e}: last change {change:e}")]
    NonConvergence { dim_e: usize, change: f64 },
    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("series diverges: |x*y| = {modulus} >= 1")]
    Divergence { modulus: f64 },
    #[error("decomposition singular: argument {argument} reaches pi/2")]
    Singularity { argument: f64 },
    #[error(
        "invalid density matrix: hermiticity {hermiticity:e}, trace error {trace:e}, min eigenvalue {min_eigenvalue:e}"
    )]
    InvalidState {
        hermiticity: f64,
        trace: f64,
        min_eigenvalue: f64,
    },
    #[error("invalid probability vector: {0}")]
    InvalidProbability(&'static str),
    #[error("energy bound {energy} below the smallest level energy {min_energy}")]
    Infeasible { energy: f64, min_energy: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
}
