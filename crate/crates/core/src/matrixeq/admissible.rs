//! Generation of admissible triples (psi, nu, beta) for a symmetric operator
//! with distinct eigenvalues.
//!
//! Per eigenvector a_i the data must satisfy
//!
//! ```text
//! (1 - alpha_i) |beta(a_i)|^2 - alpha_i |nu(a_i)|^2 - ((c - c~) + alpha_i c~) psi(a_i)^2 = 0
//! ```
//!
//! with (psi(a_i), nu(a_i), beta(a_i)) != 0, which pins a unique invertible
//! solution of the admissibility system. A nontrivial solution of the
//! quadratic exists exactly when the three coefficients are neither all
//! positive nor all negative, which for (c, c~) in D is the statement
//! alpha_i in Z(c, c~).

use nalgebra::{DMatrix, DVector};

use crate::matrixeq::sylvester::{
    solve_sylvester_system_with, AdmissibilityStatus, SylvesterSpec,
};
use crate::matrixeq::{in_d, z_interval, Operator};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Per-eigenvector magnitudes (psi, nu, beta) from the sign pattern of the
/// quadratic's coefficients. Entries of `coeff` may be None when the
/// corresponding space has dimension zero.
fn magnitudes(coeff: [Option<f64>; 3], alpha: f64, w1: usize, w2: usize) -> Result<[f64; 3]> {
    let eps = 1e-12
        * coeff
            .iter()
            .flatten()
            .fold(1.0_f64, |m, c| m.max(c.abs()));
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut zero = Vec::new();
    for (idx, c) in coeff.iter().enumerate() {
        match c {
            Some(v) if *v > eps => pos.push((idx, *v)),
            Some(v) if *v < -eps => neg.push((idx, *v)),
            Some(_) => zero.push(idx),
            None => {}
        }
    }
    let mut out = [0.0; 3];
    if !pos.is_empty() && !neg.is_empty() {
        // negative-side variables at 1; the positive side balances the sum
        // with deliberately distinct weights (equal psi and beta magnitudes
        // make the transformed metric collapse at the base point)
        let neg_sum: f64 = neg.iter().map(|(_, v)| -v).sum();
        for (idx, _) in &neg {
            out[*idx] = 1.0;
        }
        let wsum: f64 = pos.iter().map(|(idx, _)| (idx + 1) as f64).sum();
        for (idx, v) in &pos {
            out[*idx] = (neg_sum * (idx + 1) as f64 / (wsum * v)).sqrt();
        }
    } else if !zero.is_empty() {
        for idx in zero {
            out[idx] = 1.0;
        }
    } else {
        return Err(Error::NoAdmissibleData { alpha, w1, w2 });
    }
    Ok(out)
}

/// Construct an A-admissible triple for a symmetric operator with distinct
/// eigenvalues. `w1` and `w2` are the row counts of nu and beta.
pub fn generate_admissible_triple(
    a: &Operator,
    c: f64,
    c_tilde: f64,
    w1: usize,
    w2: usize,
) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    generate_admissible_triple_with(a, c, c_tilde, w1, w2, &Tolerances::default())
}

pub fn generate_admissible_triple_with(
    a: &Operator,
    c: f64,
    c_tilde: f64,
    w1: usize,
    w2: usize,
    tol: &Tolerances,
) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let k = a.dim;
    if !a.is_symmetric_distinct(tol.rank_threshold(k, 1.0)) {
        return Err(Error::Schema(
            "admissible-triple generation requires a symmetric operator with distinct eigenvalues"
                .into(),
        ));
    }

    let constrained = in_d(c, c_tilde) && (c, c_tilde) != (0.0, 0.0);
    if constrained {
        let z = z_interval(c, c_tilde)?;
        for &(alpha, _) in &a.real_eigs {
            if !z.contains(alpha, 1e-12) {
                return Err(Error::NotAdmissibleSpectrum {
                    alpha,
                    z: z.to_string(),
                });
            }
        }
    }

    let se = a.entries.clone().symmetric_eigen();
    let basis = &se.eigenvectors;

    // Data expressed on the eigenbasis, then rotated back. Retries rescale
    // the psi coefficient, which amounts to a substitution psi -> psi*sqrt(s)
    // and keeps the per-eigenvector identity exact.
    let mut scale = 1.0_f64;
    for _attempt in 0..4 {
        let mut psi_on = DVector::zeros(k);
        let mut nu_on = DMatrix::zeros(w1, k);
        let mut beta_on = DMatrix::zeros(w2, k);
        for i in 0..k {
            let alpha = se.eigenvalues[i];
            let coeff = [
                Some(scale * (-((c - c_tilde) + alpha * c_tilde))), // psi^2
                (w1 > 0).then_some(-alpha),                         // |nu|^2
                (w2 > 0).then_some(1.0 - alpha),                    // |beta|^2
            ];
            let m = magnitudes(coeff, alpha, w1, w2)?;
            psi_on[i] = m[0] * scale.sqrt();
            if w1 > 0 {
                nu_on[(i % w1, i)] = m[1];
            }
            if w2 > 0 {
                beta_on[(i % w2, i)] = m[2];
            }
        }

        let psi = basis * &psi_on;
        let nu = &nu_on * basis.transpose();
        let beta0 = &beta_on * basis.transpose();

        let spec = SylvesterSpec {
            a: a.clone(),
            c,
            c_tilde,
            psi: psi.clone(),
            nu: nu.clone(),
            beta0: beta0.clone(),
        };
        let verdict = solve_sylvester_system_with(&spec, tol)?;
        if verdict.status == AdmissibilityStatus::UniqueInvertible {
            return Ok((psi, nu, beta0));
        }
        // Outside D invertibility is not guaranteed by the sign analysis;
        // perturbing the psi weight moves the solution off the singular set.
        scale *= 0.25;
    }
    Err(Error::NoAdmissibleData {
        alpha: f64::NAN,
        w1,
        w2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixeq::analyze_operator;

    #[test]
    fn scalar_flat_case_matches_reference_values() {
        let a = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
        let (psi, nu, beta) = generate_admissible_triple(&a, 0.0, 0.0, 1, 1).unwrap();
        assert_eq!(psi[0], 0.0);
        assert!((nu[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((beta[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn all_components_nonzero_in_spherical_case() {
        let a = analyze_operator(DMatrix::from_partial_diagonal(
            2,
            2,
            &[1.0 / 3.0, 2.0 / 3.0],
        ))
        .unwrap();
        let (psi, nu, beta) = generate_admissible_triple(&a, 0.0, 1.0, 2, 2).unwrap();
        let se = a.entries.clone().symmetric_eigen();
        for i in 0..2 {
            let ai = se.eigenvectors.column(i);
            assert!(psi.dot(&ai).abs() > 1e-8);
            assert!((&nu * ai).norm() > 1e-8);
            assert!((&beta * ai).norm() > 1e-8);
        }
        let spec = SylvesterSpec {
            a,
            c: 0.0,
            c_tilde: 1.0,
            psi,
            nu,
            beta0: beta,
        };
        let v = solve_sylvester_system_with(&spec, &Tolerances::default()).unwrap();
        assert_eq!(v.status, AdmissibilityStatus::UniqueInvertible);
    }

    #[test]
    fn rejects_spectrum_outside_z() {
        let a = analyze_operator(DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();
        match generate_admissible_triple(&a, 1.0, 2.0, 1, 1) {
            Err(Error::NotAdmissibleSpectrum { alpha, .. }) => assert_eq!(alpha, 2.0),
            other => panic!("expected NotAdmissibleSpectrum, got {other:?}"),
        }
    }
}
