//! The admissibility system
//!
//! ```text
//! X + X^t   = nu^t nu + beta^t beta + c~ psi^t psi
//! X A + A^t X^t = beta^t beta - (c - c~) psi^t psi
//! ```
//!
//! The symmetric part of X is forced by the first equation; the antisymmetric
//! part satisfies `Xa A - A^t Xa = Bs`, a linear system on the antisymmetric
//! matrices that is injective exactly when A is nonderogatory. Existence and
//! uniqueness are decided by a rank/consistency test of that dense system
//! rather than by Jordan-chain conditions.

use nalgebra::{DMatrix, DVector};

use crate::matrixeq::Operator;
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SylvesterSpec {
    pub a: Operator,
    /// Intrinsic curvature c.
    pub c: f64,
    /// Ambient curvature c~.
    pub c_tilde: f64,
    /// psi in V*, stored as a k-vector.
    pub psi: DVector<f64>,
    /// nu: w1 x k.
    pub nu: DMatrix<f64>,
    /// beta: w2 x k.
    pub beta0: DMatrix<f64>,
}

impl SylvesterSpec {
    fn validate(&self) -> Result<()> {
        let k = self.a.dim;
        if self.psi.len() != k {
            return Err(Error::Dimension(format!(
                "psi must have length {k}, got {}",
                self.psi.len()
            )));
        }
        if self.nu.ncols() != k || self.beta0.ncols() != k {
            return Err(Error::Dimension(format!(
                "nu and beta must have {k} columns, got {} and {}",
                self.nu.ncols(),
                self.beta0.ncols()
            )));
        }
        let finite = self.psi.iter().all(|x| x.is_finite())
            && self.nu.iter().all(|x| x.is_finite())
            && self.beta0.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Schema("sylvester data must be finite".into()));
        }
        Ok(())
    }

    /// Gram data nu^t nu + beta^t beta + c~ psi^t psi.
    pub fn gram(&self) -> DMatrix<f64> {
        self.nu.transpose() * &self.nu
            + self.beta0.transpose() * &self.beta0
            + self.c_tilde * &self.psi * self.psi.transpose()
    }

    /// Right-hand side beta^t beta - (c - c~) psi^t psi of the operator equation.
    pub fn rho(&self) -> DMatrix<f64> {
        self.beta0.transpose() * &self.beta0
            - (self.c - self.c_tilde) * &self.psi * self.psi.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AdmissibilityStatus {
    UniqueInvertible,
    UniqueSingular,
    NoSolution,
    NonUnique,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityVerdict {
    pub status: AdmissibilityStatus,
    /// Present exactly for the Unique* statuses.
    pub solution: Option<DMatrix<f64>>,
    /// dim ker X for a unique solution; the ambiguity dimension of the
    /// antisymmetric system for NonUnique; k when no solution exists.
    pub kernel_dim: usize,
    /// max-norm residuals of the two system equations (unique solutions only).
    pub residual_sym: f64,
    pub residual_op: f64,
    /// Entrywise gap to the explicit symmetric-A solution, when A is
    /// symmetric with distinct eigenvalues.
    pub closed_form_residual: Option<f64>,
}

/// Index map for the symmetric coordinates (i <= j).
fn sym_index(k: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            v.push((i, j));
        }
    }
    v
}

/// Index map for the antisymmetric coordinates (i < j).
fn asym_index(k: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            v.push((i, j));
        }
    }
    v
}

pub fn solve_sylvester_system(spec: &SylvesterSpec) -> Result<AdmissibilityVerdict> {
    solve_sylvester_system_with(spec, &Tolerances::default())
}

pub fn solve_sylvester_system_with(
    spec: &SylvesterSpec,
    tol: &Tolerances,
) -> Result<AdmissibilityVerdict> {
    spec.validate()?;
    let k = spec.a.dim;
    let a = &spec.a.entries;

    let q = spec.gram();
    let rho = spec.rho();
    let xs = 0.5 * &q;
    let bs = &rho - (&xs * a + a.transpose() * &xs);

    let sym = sym_index(k);
    let asym = asym_index(k);

    let verdict = if asym.is_empty() {
        // k = 1: X = Xs, the operator equation is a pure consistency check.
        let x = xs.clone();
        let res_op = (&x * a + a.transpose() * x.transpose() - &rho).amax();
        if res_op <= tol.lin * (1.0 + rho.amax()) {
            classify_unique(spec, x, tol)
        } else {
            AdmissibilityVerdict {
                status: AdmissibilityStatus::NoSolution,
                solution: None,
                kernel_dim: k,
                residual_sym: f64::NAN,
                residual_op: res_op,
                closed_form_residual: None,
            }
        }
    } else {
        // Psi(E) = E A - A^t E on the antisymmetric space, row per symmetric coord.
        let mut m = DMatrix::zeros(sym.len(), asym.len());
        for (col, &(p, qj)) in asym.iter().enumerate() {
            let mut e = DMatrix::zeros(k, k);
            e[(p, qj)] = 1.0;
            e[(qj, p)] = -1.0;
            let img = &e * a - a.transpose() * &e;
            for (row, &(i, j)) in sym.iter().enumerate() {
                m[(row, col)] = img[(i, j)];
            }
        }
        let b = DVector::from_iterator(sym.len(), sym.iter().map(|&(i, j)| bs[(i, j)]));

        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.amax();
        let thr = tol.rank_threshold(asym.len().max(sym.len()), smax);
        let rank = svd.singular_values.iter().filter(|s| **s > thr).count();
        let sol = svd
            .solve(&b, thr)
            .map_err(|e| Error::EigenFailure(e.to_string()))?;
        let residual = (&m * &sol - &b).amax();
        let consistent = residual <= tol.lin.max(thr) * (1.0 + b.amax());

        if !consistent {
            AdmissibilityVerdict {
                status: AdmissibilityStatus::NoSolution,
                solution: None,
                kernel_dim: k,
                residual_sym: f64::NAN,
                residual_op: residual,
                closed_form_residual: None,
            }
        } else if rank < asym.len() {
            AdmissibilityVerdict {
                status: AdmissibilityStatus::NonUnique,
                solution: None,
                kernel_dim: asym.len() - rank,
                residual_sym: f64::NAN,
                residual_op: residual,
                closed_form_residual: None,
            }
        } else {
            let mut xa = DMatrix::zeros(k, k);
            for (col, &(p, qj)) in asym.iter().enumerate() {
                xa[(p, qj)] = sol[col];
                xa[(qj, p)] = -sol[col];
            }
            classify_unique(spec, &xs + xa, tol)
        }
    };
    Ok(verdict)
}

fn classify_unique(
    spec: &SylvesterSpec,
    x: DMatrix<f64>,
    tol: &Tolerances,
) -> AdmissibilityVerdict {
    let a = &spec.a.entries;
    let q = spec.gram();
    let rho = spec.rho();
    let residual_sym = (&x + x.transpose() - &q).amax();
    let residual_op = (&x * a + a.transpose() * x.transpose() - &rho).amax();

    let sv = x.singular_values();
    let smax = sv.amax();
    let kernel_dim = if smax == 0.0 {
        spec.a.dim
    } else {
        sv.iter().filter(|s| **s < tol.invert_ratio * smax).count()
    };
    let status = if kernel_dim == 0 {
        AdmissibilityStatus::UniqueInvertible
    } else {
        AdmissibilityStatus::UniqueSingular
    };

    let closed_form_residual = if spec.a.is_symmetric_distinct(tol.rank_threshold(spec.a.dim, 1.0))
    {
        Some(closed_form_gap(spec, &x))
    } else {
        None
    };

    AdmissibilityVerdict {
        status,
        solution: Some(x),
        kernel_dim,
        residual_sym,
        residual_op,
        closed_form_residual,
    }
}

/// Explicit solution for symmetric A with distinct eigenvalues:
/// <X a_i, a_i> = G_ii / 2 and <X a_i, a_j> = (rho_ij - alpha_j G_ij) / (alpha_i - alpha_j).
fn closed_form_gap(spec: &SylvesterSpec, x: &DMatrix<f64>) -> f64 {
    let k = spec.a.dim;
    let se = spec.a.entries.clone().symmetric_eigen();
    let alphas = &se.eigenvalues;
    let basis = &se.eigenvectors;

    let beta_on = &spec.beta0 * basis; // w2 x k, column i = beta(a_i)
    let nu_on = &spec.nu * basis;
    let psi_on = basis.transpose() * &spec.psi; // psi(a_i)

    let mut y = DMatrix::zeros(k, k); // y[(j, i)] = <X a_i, a_j>
    for i in 0..k {
        for j in 0..k {
            let rho_ij = beta_on.column(i).dot(&beta_on.column(j))
                - (spec.c - spec.c_tilde) * psi_on[i] * psi_on[j];
            let g_ij = nu_on.column(i).dot(&nu_on.column(j))
                + beta_on.column(i).dot(&beta_on.column(j))
                + spec.c_tilde * psi_on[i] * psi_on[j];
            if i == j {
                y[(i, i)] = 0.5 * g_ij;
            } else {
                y[(j, i)] = (rho_ij - alphas[j] * g_ij) / (alphas[i] - alphas[j]);
            }
        }
    }
    let x_cf = basis * y * basis.transpose();
    (x - x_cf).amax()
}
