//! The Omega field: RK4 integration of d(Omega) = omega Phi, the structure
//! identities (symmetrized Gram identity and the operator identity), and
//! invertibility monitoring.

use crate::dense;
use crate::geomgrid::field::MatField;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::sweep::{eval_field, sweep_integrate, CoefficientProvider};
use crate::ribaucour::comb::{CombSystem, CombescureData};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Grid field of k x k matrices Omega.
#[derive(Debug, Clone)]
pub struct OmegaField {
    pub grid: Grid,
    pub k: usize,
    pub omega: MatField,
    pub base_value: Vec<f64>,
    /// Worst sigma_min/sigma_max over the grid.
    pub min_sv_ratio: f64,
}

impl OmegaField {
    pub fn restrict(&self, lo: &[usize], hi: &[usize]) -> Result<OmegaField> {
        let (sub, map) = self.grid.restriction_map(lo, hi)?;
        let mut omega = MatField::zeros(self.k, map.len());
        let mut ratio = f64::INFINITY;
        for (new, &old) in map.iter().enumerate() {
            omega.at_mut(new).copy_from_slice(self.omega.at(old));
            ratio = ratio.min(dense::sv_ratio(self.omega.at(old), self.k));
        }
        Ok(OmegaField {
            grid: sub,
            k: self.k,
            omega,
            base_value: self.base_value.clone(),
            min_sv_ratio: ratio,
        })
    }

    /// Nodes where Omega counts as invertible.
    pub fn invertible_mask(&self, tol: &Tolerances) -> Vec<bool> {
        (0..self.grid.len())
            .map(|node| dense::sv_ratio(self.omega.at(node), self.k) >= tol.invert_ratio)
            .collect()
    }
}

/// d(Omega)/du_a = -gamma_a (B^a + (c - c~) v_a phi)^t L^{-1}, where B^a is
/// beta^a for the c = c~ systems and sum_r V_ar beta^r for R*.
pub fn integrate_omega<S: CoefficientProvider + ?Sized>(
    comb: &CombescureData,
    seed: &S,
    omega0: &[f64],
    base: &[usize],
    axis_order: &[usize],
) -> Result<OmegaField> {
    let k = comb.k;
    let kk = k * k;
    if omega0.len() != kk {
        return Err(Error::Dimension("Omega_0 must be k x k".into()));
    }
    let grid = &comb.grid;
    let l = comb.l_matrix()?;
    let l_inv = l
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;
    let li: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| l_inv[(i, j)])
        .collect();
    let dc = comb.c - comb.c_tilde;

    // component planes of the comb fields, for interpolation along lines
    let planes = |f: &crate::geomgrid::field::VecField| -> Vec<Vec<f64>> {
        (0..k)
            .map(|comp| (0..grid.len()).map(|node| f.at(node)[comp]).collect())
            .collect()
    };
    let phi_planes = planes(&comb.phi);
    let gamma_planes: Vec<Vec<Vec<f64>>> = comb.gamma.iter().map(&planes).collect();
    let beta_planes: Vec<Vec<Vec<f64>>> = comb.beta.iter().map(&planes).collect();

    let mut ga = vec![0.0; k];
    let mut w = vec![0.0; k];
    let mut wl = vec![0.0; k];
    let state = sweep_integrate(grid, base, axis_order, kk, omega0, &mut |a, x, _y, dy| {
        w.iter_mut().for_each(|v| *v = 0.0);
        for comp in 0..k {
            ga[comp] = eval_field(grid, &gamma_planes[a][comp], x);
        }
        match comb.system {
            CombSystem::RStar => {
                for (r, bp) in beta_planes.iter().enumerate() {
                    let var = seed.v_big(x, a, r);
                    if var != 0.0 {
                        for comp in 0..k {
                            w[comp] += var * eval_field(grid, &bp[comp], x);
                        }
                    }
                }
            }
            _ => {
                for comp in 0..k {
                    w[comp] = eval_field(grid, &beta_planes[a][comp], x);
                }
            }
        }
        if dc != 0.0 {
            let va = seed.v(x, a);
            for comp in 0..k {
                w[comp] += dc * va * eval_field(grid, &phi_planes[comp], x);
            }
        }
        // dy = -ga (L^{-t} w)^t  <=>  dy_ij = -ga_i * (w^t L^{-1})_j
        for j in 0..k {
            let mut s = 0.0;
            for i in 0..k {
                s += w[i] * li[i * k + j];
            }
            wl[j] = s;
        }
        for i in 0..k {
            for j in 0..k {
                dy[i * k + j] = -ga[i] * wl[j];
            }
        }
    })?;

    let len = grid.len();
    let mut omega = MatField::zeros(k, len);
    let mut ratio = f64::INFINITY;
    for node in 0..len {
        omega.at_mut(node).copy_from_slice(state.at(node));
        ratio = ratio.min(dense::sv_ratio(omega.at(node), k));
    }
    Ok(OmegaField {
        grid: grid.clone(),
        k,
        omega,
        base_value: omega0.to_vec(),
        min_sv_ratio: ratio,
    })
}

/// Residuals of the two structure identities over the grid:
/// Omega + Omega^t = G^t G and Omega L + L^t Omega^t = rho.
pub fn omega_invariants(omega: &OmegaField, comb: &CombescureData) -> Result<(f64, f64)> {
    let k = comb.k;
    let kk = k * k;
    let l = comb.l_matrix()?;
    let lf: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| l[(i, j)])
        .collect();
    let mut gram = vec![0.0; kk];
    let mut rho = vec![0.0; kk];
    let mut t1 = vec![0.0; kk];
    let mut t2 = vec![0.0; kk];
    let mut res_sym = 0.0_f64;
    let mut res_op = 0.0_f64;
    for node in 0..omega.grid.len() {
        let om = omega.omega.at(node);
        comb.gram_at(node, &mut gram);
        comb.rho_at(node, &mut rho);
        for i in 0..k {
            for j in 0..k {
                res_sym = res_sym.max((om[i * k + j] + om[j * k + i] - gram[i * k + j]).abs());
            }
        }
        dense::matmul(om, &lf, &mut t1, k);
        // t2 = L^t Omega^t: t2_ij = sum_m L_mi Omega_jm
        for i in 0..k {
            for j in 0..k {
                let mut s = 0.0;
                for m in 0..k {
                    s += lf[m * k + i] * om[j * k + m];
                }
                t2[i * k + j] = s;
            }
        }
        for idx in 0..kk {
            res_op = res_op.max((t1[idx] + t2[idx] - rho[idx]).abs());
        }
    }
    Ok((res_sym, res_op))
}
