//! Small dense kernels used in per-node hot loops.
//!
//! Pipelines evaluate k x k solves at every grid node (k is the transform
//! dimension, typically <= 6). Routing those through heap-allocating matrix
//! types dominates the runtime on large grids, so the bare slice versions
//! live here. Row-major storage throughout.

/// c = a * b for k x k row-major matrices.
pub fn matmul(a: &[f64], b: &[f64], c: &mut [f64], k: usize) {
    for i in 0..k {
        for j in 0..k {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i * k + l] * b[l * k + j];
            }
            c[i * k + j] = s;
        }
    }
}

/// y = a * x for a k x k row-major matrix.
pub fn matvec(a: &[f64], x: &[f64], y: &mut [f64], k: usize) {
    for i in 0..k {
        let mut s = 0.0;
        for j in 0..k {
            s += a[i * k + j] * x[j];
        }
        y[i] = s;
    }
}

/// y = a^t * x for a k x k row-major matrix.
pub fn matvec_t(a: &[f64], x: &[f64], y: &mut [f64], k: usize) {
    for j in 0..k {
        y[j] = 0.0;
    }
    for i in 0..k {
        let xi = x[i];
        for j in 0..k {
            y[j] += a[i * k + j] * xi;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place LU factorization with partial pivoting. Returns false when a
/// pivot column is exactly zero.
pub fn lu_factor(a: &mut [f64], piv: &mut [usize], k: usize) -> bool {
    for (i, p) in piv.iter_mut().enumerate().take(k) {
        *p = i;
    }
    for col in 0..k {
        let mut pmax = col;
        let mut vmax = a[col * k + col].abs();
        for row in col + 1..k {
            let v = a[row * k + col].abs();
            if v > vmax {
                vmax = v;
                pmax = row;
            }
        }
        if vmax == 0.0 {
            return false;
        }
        if pmax != col {
            piv.swap(col, pmax);
            for j in 0..k {
                a.swap(col * k + j, pmax * k + j);
            }
        }
        let d = a[col * k + col];
        for row in col + 1..k {
            let m = a[row * k + col] / d;
            a[row * k + col] = m;
            for j in col + 1..k {
                a[row * k + j] -= m * a[col * k + j];
            }
        }
    }
    true
}

/// Solve L U x = P b given a factorization from [`lu_factor`]; `b` holds the
/// right-hand side on entry and the solution on exit. `piv` must record the
/// row order produced by the factorization (it already does: we swap rows of
/// `a` eagerly, so only the initial permutation of `b` is needed).
pub fn lu_solve(lu: &[f64], piv: &[usize], b: &mut [f64], scratch: &mut [f64], k: usize) {
    for i in 0..k {
        scratch[i] = b[piv[i]];
    }
    // forward substitution, unit lower triangle
    for i in 0..k {
        let mut s = scratch[i];
        for j in 0..i {
            s -= lu[i * k + j] * scratch[j];
        }
        scratch[i] = s;
    }
    // back substitution
    for i in (0..k).rev() {
        let mut s = scratch[i];
        for j in i + 1..k {
            s -= lu[i * k + j] * scratch[j];
        }
        scratch[i] = s / lu[i * k + i];
    }
    b[..k].copy_from_slice(&scratch[..k]);
}

/// Reusable k x k LU solver.
#[derive(Debug, Clone)]
pub struct LuSolver {
    k: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    scratch: Vec<f64>,
}

impl LuSolver {
    pub fn new(k: usize) -> Self {
        LuSolver {
            k,
            lu: vec![0.0; k * k],
            piv: vec![0; k],
            scratch: vec![0.0; k],
        }
    }

    /// Factor `a` (row-major k x k). Returns false for an exactly singular pivot.
    pub fn factor(&mut self, a: &[f64]) -> bool {
        self.lu.copy_from_slice(a);
        lu_factor(&mut self.lu, &mut self.piv, self.k)
    }

    pub fn solve_in_place(&mut self, b: &mut [f64]) {
        lu_solve(&self.lu, &self.piv, b, &mut self.scratch, self.k);
    }

    pub fn solve(&mut self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// max |a_ij| over a slice.
pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Ratio sigma_min / sigma_max of a k x k matrix via Jacobi one-sided sweeps.
///
/// Used only for nodewise invertibility monitoring; k is tiny, and the
/// accuracy demands are modest (threshold comparisons), so a few sweeps of
/// one-sided Jacobi on the Gram matrix are plenty.
pub fn sv_ratio(a: &[f64], k: usize) -> f64 {
    if k == 1 {
        return if a[0] == 0.0 { 0.0 } else { 1.0 };
    }
    // Gram matrix eigenvalues by cyclic Jacobi.
    let mut g = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = 0.0;
            for l in 0..k {
                s += a[l * k + i] * a[l * k + j];
            }
            g[i * k + j] = s;
        }
    }
    for _ in 0..12 {
        let mut off = 0.0;
        for p in 0..k {
            for q in p + 1..k {
                off += g[p * k + q].abs();
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let gpq = g[p * k + q];
                if gpq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (g[q * k + q] - g[p * k + p]) / gpq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for l in 0..k {
                    let glp = g[l * k + p];
                    let glq = g[l * k + q];
                    g[l * k + p] = c * glp - s * glq;
                    g[l * k + q] = s * glp + c * glq;
                }
                for l in 0..k {
                    let gpl = g[p * k + l];
                    let gql = g[q * k + l];
                    g[p * k + l] = c * gpl - s * gql;
                    g[q * k + l] = s * gpl + c * gql;
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for i in 0..k {
        let ev = g[i * k + i].max(0.0);
        lo = lo.min(ev);
        hi = hi.max(ev);
    }
    if hi == 0.0 {
        0.0
    } else {
        (lo / hi).sqrt()
    }
}
