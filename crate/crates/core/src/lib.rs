//! Numerical laboratory for a damped harmonic oscillator under a
//! memory-kernel master equation in truncated Fock space.
//!
//! The crate integrates the generalized master equation, evaluates the
//! characteristic and Wigner functions of the resulting states, and audits
//! where the density matrix stops being positive (or the map completely
//! positive) while the symmetric characteristic function keeps |χ| ≤ 1.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod oracle;
pub mod phase_space;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockDim, OperatorMatrix};
