//! Memory-kernel master equation: Liouvillian, kernels, integrators and the
//! phase-space residual check.

pub mod integrate;
pub mod kernel;
pub mod liouvillian;
pub mod residual;

pub use integrate::{
    effective_frequency, evolve_exponential, evolve_exponential_strided, evolve_general,
    evolve_general_strided, propagate_operator, support_block, uniform_steps, EmbeddingStepper,
    EvolutionTrace, IntegratorSettings, Method, HERMITIAN_DRIFT_TOL, TRACE_DRIFT_TOL,
};
pub use kernel::{ExponentialKernel, MemoryKernel, TabulatedKernel};
pub use liouvillian::{liouvillian_apply, unvectorize, vectorize, Liouvillian, SuperOperator};
pub use residual::{chi_equation_residual, chi_equation_residual_with, ResidualSettings};
