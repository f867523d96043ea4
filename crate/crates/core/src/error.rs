use thiserror::Error;

/// Errors raised by mesh construction, assembly, solvers and the analysis layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("matrix is singular to working precision (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("matrix is not positive definite (column {index})")]
    NotPositiveDefinite { index: usize },

    #[error("BiCGSTAB breakdown at iteration {iteration} (rho = {rho:e})")]
    Breakdown { iteration: usize, rho: f64 },

    #[error("iterative solver stagnated: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("degenerate patch {patch}: normal-gradient scale {value:e}")]
    DegeneratePatch { patch: usize, value: f64 },

    #[error("dimension {dim} exceeds the cap of {cap} for {what}")]
    TooLarge { what: &'static str, dim: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
