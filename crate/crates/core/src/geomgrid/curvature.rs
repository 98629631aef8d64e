//! Numeric sectional curvature of the diagonal metric ds^2 = sum v_i^2 du_i^2.
//!
//! For a coordinate 2-plane (i, j) the classical orthogonal-metric formula is
//!
//! ```text
//! K_ij = -1/(v_i v_j) [ d_i((d_i v_j)/v_i) + d_j((d_j v_i)/v_j)
//!                       + sum_{k != i,j} (d_k v_i)(d_k v_j)/v_k^2 ]
//! ```
//!
//! evaluated with central differences. Nodes whose stencil leaves the grid or
//! touches a metric coefficient below the cutoff are skipped (NaN).

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::principal::PrincipalData;
use super::stencil::diff;

#[derive(Debug, Clone)]
pub struct PlaneCurvature {
    pub i: usize,
    pub j: usize,
    /// K over the grid, NaN at skipped nodes.
    pub k: ScalarField,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub planes: Vec<PlaneCurvature>,
    pub v_cutoff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub evaluated: usize,
    pub skipped: usize,
    pub max_deviation: f64,
}

impl CurvatureReport {
    /// Max |K - c| over all evaluated nodes of all planes.
    pub fn max_deviation(&self, c: f64) -> f64 {
        let mut worst = 0.0_f64;
        for p in &self.planes {
            for k in &p.k.0 {
                if !k.is_nan() {
                    worst = worst.max((k - c).abs());
                }
            }
        }
        worst
    }

    pub fn evaluated(&self) -> usize {
        self.planes.iter().map(|p| p.evaluated).sum()
    }

    pub fn summary(&self, c: f64) -> CurvatureSummary {
        CurvatureSummary {
            evaluated: self.evaluated(),
            skipped: self.planes.iter().map(|p| p.skipped).sum(),
            max_deviation: self.max_deviation(c),
        }
    }
}

/// Sectional curvature of every coordinate 2-plane.
pub fn numeric_sectional_curvature(data: &PrincipalData, v_cutoff: f64) -> CurvatureReport {
    let g = &data.grid;
    let n = data.n;
    let len = g.len();

    // mask: node usable only where every |v_k| >= cutoff
    let mut mask = vec![true; len];
    for f in &data.v {
        for (m, x) in mask.iter_mut().zip(&f.0) {
            if x.abs() < v_cutoff {
                *m = false;
            }
        }
    }

    let dv: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..n).map(|a| diff(g, &data.v[i].0, a)).collect())
        .collect();

    let mut planes = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            // w = (d_i v_j)/v_i masked, then d_i w
            let mut w_ij = vec![f64::NAN; len];
            let mut w_ji = vec![f64::NAN; len];
            for idx in 0..len {
                if mask[idx] {
                    w_ij[idx] = dv[j][i][idx] / data.v[i].0[idx];
                    w_ji[idx] = dv[i][j][idx] / data.v[j].0[idx];
                }
            }
            let t1 = diff(g, &w_ij, i);
            let t2 = diff(g, &w_ji, j);

            let mut k = vec![f64::NAN; len];
            let mut evaluated = 0usize;
            for idx in 0..len {
                if !mask[idx] {
                    continue;
                }
                let mut s = t1[idx] + t2[idx];
                for l in 0..n {
                    if l != i && l != j {
                        s += dv[i][l][idx] * dv[j][l][idx]
                            / (data.v[l].0[idx] * data.v[l].0[idx]);
                    }
                }
                let val = -s / (data.v[i].0[idx] * data.v[j].0[idx]);
                if !val.is_nan() {
                    k[idx] = val;
                    evaluated += 1;
                }
            }
            planes.push(PlaneCurvature {
                i,
                j,
                skipped: len - evaluated,
                evaluated,
                k: ScalarField(k),
            });
        }
    }
    CurvatureReport { planes, v_cutoff }
}
