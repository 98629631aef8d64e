//! Lyapunov equation `P^t X + X P = C`, solved by the polynomial formula
//! built from the characteristic polynomial of `-P`. Valid whenever
//! `sigma(P)` does not meet `-sigma(P)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense;
use crate::matrixeq::Operator;
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    pub x: DMatrix<f64>,
    /// sigma_min/sigma_max of q_{-P}(P^t) when it is small enough to matter.
    pub conditioning_warning: Option<f64>,
}

/// Reusable solver: the polynomial data depends only on P, so pipelines that
/// solve at every grid node factor it once.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    k: usize,
    /// (P^t)-side combinations M_i = sum_{l>i} a_l (P^t)^(l-1-i); the solution
    /// is X = q^{-1} sum_i (-1)^i M_i C P^i.
    m: Vec<Vec<f64>>,
    /// P^0 .. P^(k-1), row-major.
    p_pows: Vec<Vec<f64>>,
    q_lu: Vec<f64>,
    q_piv: Vec<usize>,
    rcond: f64,
}

impl LyapunovSolver {
    pub fn new(p: &Operator, tol: &Tolerances) -> Result<Self> {
        let gap = p.spectrum_pairing_gap();
        if gap <= tol.spectrum_gap {
            return Err(Error::SpectrumClash { gap });
        }
        let k = p.dim;

        // characteristic polynomial of -P from the spectrum
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for lambda in p.spectrum() {
            // multiply by (x + lambda)
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] += c * lambda;
            }
            coeffs = next;
        }
        let a: Vec<f64> = coeffs.iter().map(|c| c.re).collect(); // a[l] multiplies x^l

        let pt = p.entries.transpose();
        let mut p_pows = Vec::with_capacity(k);
        let mut pt_pows = Vec::with_capacity(k + 1);
        let flat = |m: &DMatrix<f64>| m.row_iter().flat_map(|r| r.iter().cloned().collect::<Vec<_>>()).collect::<Vec<f64>>();
        let mut cur = DMatrix::identity(k, k);
        for _ in 0..k {
            p_pows.push(flat(&cur));
            cur = &cur * &p.entries;
        }
        let mut cur = DMatrix::identity(k, k);
        for _ in 0..=k {
            pt_pows.push(flat(&cur));
            cur = &cur * &pt;
        }

        // q = sum_l a_l (P^t)^l
        let mut q = vec![0.0; k * k];
        for (l, al) in a.iter().enumerate() {
            for (qe, pe) in q.iter_mut().zip(&pt_pows[l]) {
                *qe += al * pe;
            }
        }

        // M_i = sum_{l=i+1..=k} a_l (P^t)^(l-1-i)
        let mut m = Vec::with_capacity(k);
        for i in 0..k {
            let mut mi = vec![0.0; k * k];
            for l in i + 1..=k {
                for (me, pe) in mi.iter_mut().zip(&pt_pows[l - 1 - i]) {
                    *me += a[l] * pe;
                }
            }
            m.push(mi);
        }

        let qm = DMatrix::from_row_slice(k, k, &q);
        let sv = qm.singular_values();
        let rcond = if sv.amax() == 0.0 {
            0.0
        } else {
            sv.iter().fold(f64::INFINITY, |a, b| a.min(*b)) / sv.amax()
        };
        let mut q_lu = q;
        let mut q_piv = vec![0; k];
        if !dense::lu_factor(&mut q_lu, &mut q_piv, k) {
            return Err(Error::SingularOperator { ratio: rcond });
        }

        Ok(LyapunovSolver {
            k,
            m,
            p_pows,
            q_lu,
            q_piv,
            rcond,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solve into `x` (row-major k x k) without allocating; `work` must hold
    /// at least 3*k*k + k elements.
    pub fn solve_into(&self, c: &[f64], x: &mut [f64], work: &mut [f64]) {
        let k = self.k;
        let kk = k * k;
        let (t1, rest) = work.split_at_mut(kk);
        let (t2, rest) = rest.split_at_mut(kk);
        let (acc, scratch) = rest.split_at_mut(kk);
        acc.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..k {
            // t2 = M_i * C * P^i
            dense::matmul(&self.m[i], c, t1, k);
            dense::matmul(t1, &self.p_pows[i], t2, k);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for (a, t) in acc.iter_mut().zip(t2.iter()) {
                *a += sign * *t;
            }
        }
        // X = q^{-1} acc, column by column
        for col in 0..k {
            for row in 0..k {
                t1[row] = acc[row * k + col];
            }
            dense::lu_solve(&self.q_lu, &self.q_piv, &mut t1[..k], &mut scratch[..k], k);
            for row in 0..k {
                x[row * k + col] = t1[row];
            }
        }
    }

    pub fn solve(&self, c: &DMatrix<f64>) -> LyapunovSolution {
        let k = self.k;
        let cf: Vec<f64> = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| c[(i, j)])
            .collect();
        let mut x = vec![0.0; k * k];
        let mut work = vec![0.0; 3 * k * k + k];
        self.solve_into(&cf, &mut x, &mut work);
        LyapunovSolution {
            x: DMatrix::from_row_slice(k, k, &x),
            conditioning_warning: if self.rcond < 1e-8 {
                Some(self.rcond)
            } else {
                None
            },
        }
    }
}

/// One-shot solve of `P^t X + X P = C`.
pub fn solve_lyapunov(p: &Operator, c: &DMatrix<f64>) -> Result<LyapunovSolution> {
    solve_lyapunov_with(p, c, &Tolerances::default())
}

pub fn solve_lyapunov_with(
    p: &Operator,
    c: &DMatrix<f64>,
    tol: &Tolerances,
) -> Result<LyapunovSolution> {
    if c.nrows() != p.dim || c.ncols() != p.dim {
        return Err(Error::Dimension(format!(
            "C must be {k}x{k}, got {}x{}",
            c.nrows(),
            c.ncols(),
            k = p.dim
        )));
    }
    Ok(LyapunovSolver::new(p, tol)?.solve(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixeq::analyze_operator;

    #[test]
    fn scalar_case() {
        let p = analyze_operator(DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();
        let sol = solve_lyapunov(&p, &DMatrix::from_row_slice(1, 1, &[8.0])).unwrap();
        assert!((sol.x[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nondiagonalizable_reference_instance() {
        let p = analyze_operator(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])).unwrap();
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 4.0, 4.0]);
        let sol = solve_lyapunov(&p, &c).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 1.5, 1.0]);
        assert!((sol.x - expect).amax() < 1e-12);
    }

    #[test]
    fn rejects_spectrum_clash() {
        let p = analyze_operator(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        let c = DMatrix::identity(2, 2);
        match solve_lyapunov(&p, &c) {
            Err(Error::SpectrumClash { .. }) => {}
            other => panic!("expected SpectrumClash, got {other:?}"),
        }
    }

    #[test]
    fn residual_is_small_on_a_fixed_instance() {
        let pm = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 0.3, -0.1, 0.0, 1.5, 0.7, 0.2, -0.4, 3.1],
        );
        let p = analyze_operator(pm.clone()).unwrap();
        let c = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 2.0, 2.0, -2.0]);
        let sol = solve_lyapunov(&p, &c).unwrap();
        let res = pm.transpose() * &sol.x + &sol.x * &pm - &c;
        assert!(res.amax() < 1e-12 * (1.0 + c.amax()));
    }
}
