use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockDim;

/// Successive differences below this count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n_cut: usize,
    pub value: f64,
    /// |value − previous value|; absent on the first row.
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub converged: bool,
}

impl ConvergenceTable {
    pub fn last_difference(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.difference)
    }
}

/// Re-evaluates `extract` for each truncation in an increasing sequence.
pub fn truncation_convergence(
    mut extract: impl FnMut(FockDim) -> Result<f64>,
    n_cuts: &[usize],
) -> Result<ConvergenceTable> {
    if n_cuts.len() < 2 {
        return Err(Error::InvalidSettings("convergence needs at least two truncations".into()));
    }
    if n_cuts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSettings(format!("truncations must increase: {n_cuts:?}")));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_cuts.len());
    for &n in n_cuts {
        let value = extract(FockDim::new(n)?)?;
        let difference = rows.last().map(|r| (value - r.value).abs());
        rows.push(ConvergenceRow { n_cut: n, value, difference });
    }
    let converged = rows.last().and_then(|r| r.difference).is_some_and(|d| d < CONVERGENCE_TOL);
    Ok(ConvergenceTable { rows, converged })
}
