//! Central tolerance settings.
//!
//! All residual thresholds used by solvers and verification routines live
//! here so a job can override them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual bound for matrix-equation solves.
    pub lin: f64,
    /// Residual bound for the Omega structure identities (15) and (21).
    pub omega: f64,
    /// Allowed orthonormality drift of an integrated frame.
    pub frame: f64,
    /// Multiplier on `k * eps * sigma_max` for numerical rank decisions.
    pub rank_factor: f64,
    /// Absolute tolerance on eigenvalue sums when testing sigma(P) against -sigma(P).
    pub spectrum_gap: f64,
    /// Omega is treated as invertible where sigma_min >= invert_ratio * sigma_max.
    pub invert_ratio: f64,
    /// |v_i| below this counts as a degenerate metric coefficient.
    pub v_min: f64,
    /// Clustering width (relative to the spectral scale) when grouping eigenvalues.
    pub eig_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lin: 1e-10,
            omega: 1e-8,
            frame: 1e-7,
            rank_factor: 1e3,
            spectrum_gap: 1e-9,
            invert_ratio: 1e-8,
            v_min: 1e-6,
            eig_cluster: 1e-6,
        }
    }
}

impl Tolerances {
    /// Singular-value threshold for rank decisions on a k x k problem.
    pub fn rank_threshold(&self, k: usize, sigma_max: f64) -> f64 {
        k as f64 * f64::EPSILON * sigma_max.max(1.0) * self.rank_factor
    }

    /// Set a named tolerance; used by the CLI `--tol name=value` overrides.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match name {
            "lin" => self.lin = value,
            "omega" => self.omega = value,
            "frame" => self.frame = value,
            "rank_factor" => self.rank_factor = value,
            "spectrum_gap" => self.spectrum_gap = value,
            "invert_ratio" => self.invert_ratio = value,
            "v_min" => self.v_min = value,
            "eig_cluster" => self.eig_cluster = value,
            _ => return false,
        }
        true
    }
}
