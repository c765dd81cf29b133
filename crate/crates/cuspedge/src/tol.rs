//! Numerical tolerances, configurable from the CLI.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Regularity threshold: |f_u × f_v| below this (relative) means singular.
    pub reg: f64,
    /// Threshold for treating the area density λ as exactly zero.
    pub sing: f64,
    /// Allowed residual for quantities that must vanish on the singular axis.
    pub axis: f64,
    /// Threshold on normalized criterion values (ηλ, non-degeneracy witnesses).
    pub crit: f64,
    /// Bound below which a sampled invariant is treated as identically zero.
    pub bound: f64,
    /// Agreement tolerance for the limiting Gaussian curvature cross-check.
    pub k_limit: f64,
    /// Relative agreement tolerance for the two cuspidal-curvature routes.
    pub mu: f64,
    /// Diameter threshold for the image of the normal locus to be a point.
    pub point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            reg: 1e-8,
            sing: 1e-10,
            axis: 1e-9,
            crit: 1e-6,
            bound: 1e-7,
            k_limit: 1e-6,
            mu: 1e-4,
            point: 1e-8,
        }
    }
}
