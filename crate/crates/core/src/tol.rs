//! Numerical tolerances shared across the crate.

use serde::{Deserialize, Serialize};

/// Floor applied before dividing by or taking logs of expectation values.
pub const NUM_FLOOR: f64 = 1e-300;

/// Relative degeneracy tolerance used when none is given explicitly.
pub const DEFAULT_DEGENERACY_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max entrywise |A - A^dagger| accepted for Hermitian inputs.
    pub herm: f64,
    /// Max |tr(rho) - 1| accepted for density matrices.
    pub trace: f64,
    /// Most negative eigenvalue accepted for density matrices.
    pub psd: f64,
    /// Eigensolver convergence threshold.
    pub eig: f64,
    /// Top-level Fock population allowed in truncated oscillators.
    pub trunc: f64,
    /// Negative eigenvalues of propagated states in (-psd_dyn, 0) are clipped.
    pub psd_dyn: f64,
    /// Max (g / nu0) accepted by the perturbative machinery.
    pub weak_ratio: f64,
    /// Relative grouping window for KMS consistency checks on bath models.
    pub kms: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
            eig: 1e-8,
            trunc: 1e-6,
            psd_dyn: 1e-7,
            weak_ratio: 0.1,
            kms: 1e-10,
        }
    }
}
