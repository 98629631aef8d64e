//! Operator analysis: eigenvalues with multiplicities and the nonderogatory
//! test (geometric multiplicity one for every eigenvalue of the
//! complexification).

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::tol::Tolerances;
use crate::{Error, Result};

/// A k x k real operator with cached eigenstructure.
#[derive(Debug, Clone)]
pub struct Operator {
    pub dim: usize,
    pub entries: DMatrix<f64>,
    /// Real eigenvalues as (value, algebraic multiplicity).
    pub real_eigs: Vec<(f64, usize)>,
    /// Complex eigenvalues with positive imaginary part, as (value, multiplicity);
    /// the conjugate is implied.
    pub complex_eigs: Vec<(Complex64, usize)>,
    pub nonderogatory: bool,
}

impl Operator {
    /// All eigenvalues of the complexification, with multiplicity.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dim);
        for &(a, m) in &self.real_eigs {
            for _ in 0..m {
                out.push(Complex64::new(a, 0.0));
            }
        }
        for &(g, m) in &self.complex_eigs {
            for _ in 0..m {
                out.push(g);
                out.push(g.conj());
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let a = &self.entries;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                if (a[(i, j)] - a[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Symmetric with `dim` distinct real eigenvalues (the hypothesis under
    /// which the explicit admissibility solution applies).
    pub fn is_symmetric_distinct(&self, tol: f64) -> bool {
        self.is_symmetric(tol)
            && self.complex_eigs.is_empty()
            && self.real_eigs.iter().all(|&(_, m)| m == 1)
            && self.real_eigs.len() == self.dim
    }

    /// Minimum of |lambda_i + lambda_j| over all eigenvalue pairs; zero means
    /// sigma(A) meets -sigma(A).
    pub fn spectrum_pairing_gap(&self) -> f64 {
        let spec = self.spectrum();
        let mut gap = f64::INFINITY;
        for a in &spec {
            for b in &spec {
                gap = gap.min((a + b).norm());
            }
        }
        gap
    }

    /// Smallest |lambda|.
    pub fn min_abs_eig(&self) -> f64 {
        self.spectrum()
            .iter()
            .fold(f64::INFINITY, |m, l| m.min(l.norm()))
    }
}

/// Analyze a square matrix: eigenvalues via the real Schur form, clustered
/// into multiplicities, and the nonderogatory flag from rank tests of
/// `A - alpha I` per distinct eigenvalue.
pub fn analyze_operator(entries: DMatrix<f64>) -> Result<Operator> {
    analyze_operator_with(entries, &Tolerances::default())
}

pub fn analyze_operator_with(entries: DMatrix<f64>, tol: &Tolerances) -> Result<Operator> {
    let k = entries.nrows();
    if k == 0 || entries.ncols() != k {
        return Err(Error::Dimension(format!(
            "operator must be square and nonempty, got {}x{}",
            entries.nrows(),
            entries.ncols()
        )));
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::Schema("operator entries must be finite".into()));
    }

    let schur = Schur::try_new(entries.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let eigs: Vec<Complex64> = schur.complex_eigenvalues().iter().cloned().collect();

    let scale = eigs.iter().fold(1.0_f64, |m, l| m.max(l.norm()));
    let width = tol.eig_cluster * scale;

    // Greedy clustering; k is small, quadratic is fine.
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for l in &eigs {
        if let Some((c, m)) = clusters
            .iter_mut()
            .find(|(c, m)| (*c - l).norm() <= width * (1.0 + *m as f64))
        {
            // running mean keeps the representative centered
            *c = (*c * (*m as f64) + l) / (*m as f64 + 1.0);
            *m += 1;
        } else {
            clusters.push((*l, 1));
        }
    }

    let mut real_eigs = Vec::new();
    let mut complex_eigs = Vec::new();
    for &(c, m) in &clusters {
        if c.im.abs() <= width {
            real_eigs.push((c.re, m));
        } else if c.im > 0.0 {
            complex_eigs.push((c, m));
        }
    }
    real_eigs.sort_by(|a, b| a.0.total_cmp(&b.0));
    complex_eigs.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());

    let count: usize = real_eigs.iter().map(|&(_, m)| m).sum::<usize>()
        + 2 * complex_eigs.iter().map(|&(_, m)| m).sum::<usize>();
    if count != k {
        return Err(Error::EigenFailure(format!(
            "eigenvalue clustering lost conjugate symmetry ({count} of {k} accounted for)"
        )));
    }

    let ac = entries.map(|x| Complex64::new(x, 0.0));
    let mut nonderogatory = true;
    let mut check = |alpha: Complex64, mult: usize| -> Result<()> {
        if mult == 1 {
            return Ok(()); // geometric multiplicity is squeezed to one
        }
        let shifted = &ac - DMatrix::from_diagonal_element(k, k, alpha);
        let sv = shifted.singular_values();
        let thr = tol.rank_threshold(k, sv.amax());
        let rank = sv.iter().filter(|s| **s > thr).count();
        if k - rank != 1 {
            nonderogatory = false;
        }
        Ok(())
    };
    for &(a, m) in &real_eigs {
        check(Complex64::new(a, 0.0), m)?;
    }
    for &(g, m) in &complex_eigs {
        check(g, m)?;
    }

    Ok(Operator {
        dim: k,
        entries,
        real_eigs,
        complex_eigs,
        nonderogatory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_derogatory() {
        let op = analyze_operator(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(op.real_eigs, vec![(1.0, 2)]);
        assert!(op.complex_eigs.is_empty());
        assert!(!op.nonderogatory);
    }

    #[test]
    fn rotation_block_is_nonderogatory() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]);
        let op = analyze_operator(m).unwrap();
        assert!(op.real_eigs.is_empty());
        assert_eq!(op.complex_eigs.len(), 1);
        let (g, m) = op.complex_eigs[0];
        assert_eq!(m, 1);
        assert!((g - Complex64::new(1.0, 1.0)).norm() < 1e-10);
        assert!(op.nonderogatory);
    }

    #[test]
    fn jordan_block_is_nonderogatory() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 2.0]);
        let op = analyze_operator(m).unwrap();
        assert_eq!(op.real_eigs.len(), 1);
        assert_eq!(op.real_eigs[0].1, 3);
        assert!((op.real_eigs[0].0 - 2.0).abs() < 1e-6);
        assert!(op.nonderogatory);
    }

    #[test]
    fn block_diagonal_repeated_eigenvalue_is_derogatory() {
        // two separate Jordan blocks for the same eigenvalue
        let m = DMatrix::from_row_slice(4, 4, &[
            3.0, 1.0, 0.0, 0.0, //
            0.0, 3.0, 0.0, 0.0, //
            0.0, 0.0, 3.0, 1.0, //
            0.0, 0.0, 0.0, 3.0,
        ]);
        let op = analyze_operator(m).unwrap();
        assert_eq!(op.real_eigs, vec![(3.0, 4)]);
        assert!(!op.nonderogatory);
    }

    #[test]
    fn spectrum_gap_detects_plus_minus_pairs() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let op = analyze_operator(m).unwrap();
        assert!(op.spectrum_pairing_gap() < 1e-12);
    }
}
