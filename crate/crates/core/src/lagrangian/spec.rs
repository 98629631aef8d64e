//! Configuration of a P-transform.

use nalgebra::DMatrix;

use crate::matrixeq::Operator;
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PVariant {
    /// Flat Lagrangian submanifolds of C^n.
    FlatLagrangian,
    /// Flat Lagrangian contained in the unit sphere; the initial data must
    /// satisfy phi + sum_i v_i P^t gamma_i = 0.
    PStar,
    /// Horizontal submanifolds of the curvature-c sphere.
    Horizontal,
}

#[derive(Debug, Clone)]
pub struct PTransformSpec {
    pub p: Operator,
    pub variant: PVariant,
    /// Curvature: 0 for the flat variants, > 0 for the horizontal one.
    pub c: f64,
    pub init_phi: Vec<f64>,
    pub init_gamma: Vec<Vec<f64>>,
}

impl PTransformSpec {
    pub fn k(&self) -> usize {
        self.p.dim
    }

    /// T = -P^t - (P^t)^{-1}.
    pub fn t_matrix(&self) -> Result<DMatrix<f64>> {
        let pt = self.p.entries.transpose();
        let pt_inv = pt
            .clone()
            .try_inverse()
            .ok_or(Error::SingularOperator { ratio: 0.0 })?;
        Ok(-pt - pt_inv)
    }

    /// The associated L = (P^2 + I)^{-1} P^2.
    pub fn l_matrix(&self) -> Result<DMatrix<f64>> {
        let k = self.k();
        let p2 = &self.p.entries * &self.p.entries;
        let inv = (&p2 + DMatrix::identity(k, k))
            .try_inverse()
            .ok_or(Error::SingularOperator { ratio: 0.0 })?;
        Ok(inv * p2)
    }

    /// P + P^{-1} (= -T^t), the matrix appearing in the data update.
    pub fn p_plus_pinv(&self) -> Result<DMatrix<f64>> {
        let p_inv = self
            .p
            .entries
            .clone()
            .try_inverse()
            .ok_or(Error::SingularOperator { ratio: 0.0 })?;
        Ok(&self.p.entries + p_inv)
    }

    pub fn validate(&self, n: usize, tol: &Tolerances) -> Result<()> {
        let gap = self.p.spectrum_pairing_gap();
        if gap <= tol.spectrum_gap {
            return Err(Error::SpectrumClash { gap });
        }
        match self.variant {
            PVariant::Horizontal => {
                if self.c <= 0.0 {
                    return Err(Error::Schema("horizontal variant needs c > 0".into()));
                }
            }
            _ => {
                if self.c != 0.0 {
                    return Err(Error::Schema("flat variants have c = 0".into()));
                }
            }
        }
        let k = self.k();
        if self.init_phi.len() != k || self.init_gamma.len() != n {
            return Err(Error::Dimension(format!(
                "initial data needs phi in R^{k} and {n} gammas"
            )));
        }
        if self.init_gamma.iter().any(|g| g.len() != k) {
            return Err(Error::Dimension("every gamma_0 must have length k".into()));
        }
        Ok(())
    }
}
