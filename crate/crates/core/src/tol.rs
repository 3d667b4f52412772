//! Numerical tolerances shared across the crate.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Frobenius tolerance on `‖M − M†‖`.
    pub herm: f64,
    /// Absolute tolerance on negative eigenvalues.
    pub psd: f64,
    /// Relative Frobenius tolerance for reconstruction identities.
    pub spec: f64,
    /// Eigenvalues at or below `rank · λ_max` are treated as zero.
    pub rank: f64,
    /// Frobenius tolerance on no-signaling and normalization.
    pub ns: f64,
    /// Per-operator Frobenius tolerance when certifying SEO equivalence.
    pub equiv: f64,
    /// Duality-gap tolerance of the SDP layer.
    pub solver: f64,
    /// Robustness below this counts as membership (LHS / jointly measurable).
    pub membership: f64,
    /// Maximum number of deterministic strategies `k^m`.
    pub strategy_cap: usize,
    /// Alignment attempts before an equivalence test gives up.
    pub retry_max: usize,
    /// Success probabilities at or below this mean the filter annihilates.
    pub p_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-9,
            spec: 1e-9,
            rank: 1e-8,
            ns: 1e-8,
            equiv: 1e-7,
            solver: 1e-7,
            membership: 1e-6,
            strategy_cap: 4096,
            retry_max: 8,
            p_floor: 1e-12,
        }
    }
}
