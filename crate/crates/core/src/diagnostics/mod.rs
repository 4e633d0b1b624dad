//! Physicality audits: density positivity, complete positivity through the
//! Choi matrix, bounds on χ and W, first-violation scans and truncation
//! convergence.

mod audit;
mod choi;
mod convergence;
mod scan;

pub use audit::{
    audit_chi_field, audit_density, audit_wigner_field, ChiAudit, DensityAudit, WignerAudit,
    EIGEN_ZERO_TOL,
};
pub use choi::{choi_matrix, evolve_basis_images, BasisImages, ChoiAudit};
pub use convergence::{
    truncation_convergence, ConvergenceRow, ConvergenceTable, CONVERGENCE_TOL,
};
pub use scan::{
    scan_first_violations, AuditRecord, AuditReport, AuditSummary, Criterion, FirstViolation,
    RadialGridSpec, ScanSettings, Thresholds, NEVER_WITHIN_HORIZON,
};
