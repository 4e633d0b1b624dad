use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock truncation must keep at least 2 levels, got {0}")]
    InvalidDim(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("Fock index {index} outside truncated space of {n_cut} levels")]
    FockIndexOutOfRange { index: usize, n_cut: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("trace deviates from 1 by {deviation:e} (tolerance {tolerance:e})")]
    TraceDeviation { deviation: f64, tolerance: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),

    #[error("tabulated kernel covers [0, {covered}] but integration needs [0, {needed}]")]
    GridCoverage { covered: f64, needed: f64 },

    #[error("state drifted during integration: hermiticity {hermiticity:e}, trace {trace:e} at t = {time}")]
    Drift { hermiticity: f64, trace: f64, time: f64 },

    #[error("phase-space point outside truncation guard: |z|^2 = {modulus_sq} > {limit}")]
    TruncationGuard { modulus_sq: f64, limit: f64 },

    #[error("phase-space grid insufficient: {0}")]
    InsufficientGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis incomplete: {0}")]
    IncompleteBasis(String),

    #[error("finite-difference stencil too coarse (error estimate {estimate:e})")]
    StencilTooCoarse { estimate: f64 },

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
