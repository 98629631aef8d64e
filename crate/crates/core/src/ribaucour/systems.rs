//! RK4 integration of the linear systems R and R* over principal grids.

use nalgebra::DMatrix;

use crate::geomgrid::field::VecField;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::PrincipalKind;
use crate::geomgrid::sweep::{sweep_integrate, CoefficientProvider};
use crate::matrixeq::Operator;
use crate::ribaucour::comb::{CombSystem, CombescureData};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Initial data (phi_0, gamma_0 list, beta_0 list) at the base node.
#[derive(Debug, Clone)]
pub struct CombInit {
    pub phi0: Vec<f64>,
    pub gamma0: Vec<Vec<f64>>,
    pub beta0: Vec<Vec<f64>>,
}

fn check_operator_invertible(l: &Operator, tol: &Tolerances) -> Result<()> {
    let min = l.min_abs_eig();
    let max = l
        .spectrum()
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()))
        .max(1.0);
    if min <= tol.invert_ratio * max {
        return Err(Error::SingularOperator { ratio: min / max });
    }
    Ok(())
}

fn pack_init(init: &CombInit, k: usize, n: usize, p: usize) -> Result<Vec<f64>> {
    if init.phi0.len() != k || init.gamma0.len() != n || init.beta0.len() != p {
        return Err(Error::Dimension(format!(
            "initial data must provide phi ({k}), {n} gammas, {p} betas"
        )));
    }
    let mut state = Vec::with_capacity(k * (1 + n + p));
    state.extend_from_slice(&init.phi0);
    for gv in &init.gamma0 {
        if gv.len() != k {
            return Err(Error::Dimension("gamma_0 entries must have length k".into()));
        }
        state.extend_from_slice(gv);
    }
    for bv in &init.beta0 {
        if bv.len() != k {
            return Err(Error::Dimension("beta_0 entries must have length k".into()));
        }
        state.extend_from_slice(bv);
    }
    Ok(state)
}

fn unpack(
    grid: &Grid,
    state: VecField,
    k: usize,
    n: usize,
    p: usize,
) -> (VecField, Vec<VecField>, Vec<VecField>) {
    let len = grid.len();
    let mut phi = VecField::zeros(k, len);
    let mut gamma: Vec<VecField> = (0..n).map(|_| VecField::zeros(k, len)).collect();
    let mut beta: Vec<VecField> = (0..p).map(|_| VecField::zeros(k, len)).collect();
    for node in 0..len {
        let s = state.at(node);
        phi.at_mut(node).copy_from_slice(&s[0..k]);
        for (j, gf) in gamma.iter_mut().enumerate() {
            gf.at_mut(node)
                .copy_from_slice(&s[(1 + j) * k..(2 + j) * k]);
        }
        for (r, bf) in beta.iter_mut().enumerate() {
            bf.at_mut(node)
                .copy_from_slice(&s[(1 + n + r) * k..(2 + n + r) * k]);
        }
    }
    (phi, gamma, beta)
}

/// Integrate system R on a c = c~ seed.
pub fn integrate_system_r<S: CoefficientProvider + ?Sized>(
    seed: &S,
    grid: &Grid,
    base: &[usize],
    l: &Operator,
    init: &CombInit,
    axis_order: &[usize],
    tol: &Tolerances,
) -> Result<CombescureData> {
    if seed.kind() != PrincipalKind::FlatPair && seed.kind() != PrincipalKind::LagrangianPair {
        return Err(Error::Schema("system R expects a c = c~ pair seed".into()));
    }
    check_operator_invertible(l, tol)?;
    let n = seed.n();
    let p = n;
    let k = l.dim;
    let c = seed.c();
    let lt_inv_minus_id = {
        let m = l
            .entries
            .transpose()
            .try_inverse()
            .ok_or(Error::SingularOperator { ratio: 0.0 })?;
        m - DMatrix::identity(k, k)
    };

    let init_state = pack_init(init, k, n, p)?;
    let state_dim = k * (1 + n + p);
    let state = sweep_integrate(grid, base, axis_order, state_dim, &init_state, &mut |a,
                                                                                      x,
                                                                                      y,
                                                                                      dy| {
        dy.iter_mut().for_each(|v| *v = 0.0);
        let va = seed.v(x, a);
        let ga = &y[(1 + a) * k..(2 + a) * k];
        // dphi = v_a gamma_a
        for m in 0..k {
            dy[m] = va * ga[m];
        }
        // dgamma_j = h_ja gamma_a
        for j in 0..n {
            if j == a {
                continue;
            }
            let h = seed.h(x, j, a);
            for m in 0..k {
                dy[(1 + j) * k + m] = h * ga[m];
            }
        }
        // dgamma_a = -sum_j h_ja gamma_j - ((L^t)^{-1} - I) beta^a - c v_a phi
        {
            let base_idx = (1 + a) * k;
            for j in 0..n {
                if j == a {
                    continue;
                }
                let h = seed.h(x, j, a);
                for m in 0..k {
                    dy[base_idx + m] -= h * y[(1 + j) * k + m];
                }
            }
            let ba = &y[(1 + n + a) * k..(2 + n + a) * k];
            for i in 0..k {
                let mut s = 0.0;
                for j in 0..k {
                    s += lt_inv_minus_id[(i, j)] * ba[j];
                }
                dy[base_idx + i] -= s;
            }
            if c != 0.0 {
                for m in 0..k {
                    dy[base_idx + m] -= c * va * y[m];
                }
            }
        }
        // dbeta^r = h_ar beta^a (r != a); dbeta^a = -gamma_a - sum h_ar beta^r
        for r in 0..p {
            let base_idx = (1 + n + r) * k;
            if r == a {
                for m in 0..k {
                    dy[base_idx + m] -= ga[m];
                }
                for rr in 0..p {
                    if rr != a {
                        let h = seed.h(x, a, rr);
                        for m in 0..k {
                            dy[base_idx + m] -= h * y[(1 + n + rr) * k + m];
                        }
                    }
                }
            } else {
                let h = seed.h(x, a, r);
                for m in 0..k {
                    dy[base_idx + m] = h * y[(1 + n + a) * k + m];
                }
            }
        }
    })?;

    let (phi, gamma, beta) = unpack(grid, state, k, n, p);
    Ok(CombescureData {
        grid: grid.clone(),
        k,
        n,
        p,
        c,
        c_tilde: seed.c_tilde(),
        system: CombSystem::R,
        op: l.entries.clone(),
        phi,
        gamma,
        beta,
    })
}

/// Integrate system R* on a c != c~ seed.
pub fn integrate_system_rstar<S: CoefficientProvider + ?Sized>(
    seed: &S,
    grid: &Grid,
    base: &[usize],
    l: &Operator,
    init: &CombInit,
    axis_order: &[usize],
    tol: &Tolerances,
) -> Result<CombescureData> {
    if seed.kind() != PrincipalKind::CurvedTriple {
        return Err(Error::Schema("system R* expects a CurvedTriple seed".into()));
    }
    check_operator_invertible(l, tol)?;
    let n = seed.n();
    let p = seed.p();
    let k = l.dim;
    let c = seed.c();
    let c_tilde = seed.c_tilde();
    let lt_inv = l
        .entries
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;
    let lt_inv_minus_id = &lt_inv - DMatrix::identity(k, k);
    // ((L^t)^{-1}(c - c~) + c~ I)
    let phi_coeff = (c - c_tilde) * &lt_inv + c_tilde * DMatrix::identity(k, k);

    let init_state = pack_init(init, k, n, p)?;
    let state_dim = k * (1 + n + p);
    let state = sweep_integrate(grid, base, axis_order, state_dim, &init_state, &mut |a,
                                                                                      x,
                                                                                      y,
                                                                                      dy| {
        dy.iter_mut().for_each(|v| *v = 0.0);
        let va = seed.v(x, a);
        let ga = &y[(1 + a) * k..(2 + a) * k];
        for m in 0..k {
            dy[m] = va * ga[m];
        }
        for j in 0..n {
            if j == a {
                continue;
            }
            let h = seed.h(x, j, a);
            for m in 0..k {
                dy[(1 + j) * k + m] = h * ga[m];
            }
        }
        {
            let base_idx = (1 + a) * k;
            for j in 0..n {
                if j == a {
                    continue;
                }
                let h = seed.h(x, j, a);
                for m in 0..k {
                    dy[base_idx + m] -= h * y[(1 + j) * k + m];
                }
            }
            // ((L^t)^{-1} - I) applied to w = sum_r V_ar beta^r
            let mut w = vec![0.0; k];
            for r in 0..p {
                let var = seed.v_big(x, a, r);
                if var != 0.0 {
                    for m in 0..k {
                        w[m] += var * y[(1 + n + r) * k + m];
                    }
                }
            }
            for i in 0..k {
                let mut s = 0.0;
                for j in 0..k {
                    s += lt_inv_minus_id[(i, j)] * w[j];
                }
                dy[base_idx + i] -= s;
            }
            for i in 0..k {
                let mut s = 0.0;
                for j in 0..k {
                    s += phi_coeff[(i, j)] * y[j];
                }
                dy[base_idx + i] -= va * s;
            }
        }
        // dbeta^r = -V_ar gamma_a
        for r in 0..p {
            let var = seed.v_big(x, a, r);
            let base_idx = (1 + n + r) * k;
            for m in 0..k {
                dy[base_idx + m] = -var * ga[m];
            }
        }
    })?;

    let (phi, gamma, beta) = unpack(grid, state, k, n, p);
    Ok(CombescureData {
        grid: grid.clone(),
        k,
        n,
        p,
        c,
        c_tilde,
        system: CombSystem::RStar,
        op: l.entries.clone(),
        phi,
        gamma,
        beta,
    })
}
