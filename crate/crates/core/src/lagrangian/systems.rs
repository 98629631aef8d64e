//! Integration of the reduced linear systems: the flat Lagrangian system and
//! its horizontal analogue. Beta is not integrated; it is determined
//! algebraically by the complex/contact structure.

use crate::geomgrid::field::VecField;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::PrincipalKind;
use crate::geomgrid::sweep::{sweep_integrate, CoefficientProvider};
use crate::lagrangian::spec::{PTransformSpec, PVariant};
use crate::ribaucour::comb::{CombSystem, CombescureData};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// max |phi + sum_i v_i P^t gamma_i - (its base value)| over the grid; the
/// quantity is a first integral of the flat system over sphere-contained
/// seeds.
pub fn pstar_conservation_defect<S: CoefficientProvider + ?Sized>(
    comb: &CombescureData,
    seed: &S,
    spec: &PTransformSpec,
) -> f64 {
    let k = comb.k;
    let grid = &comb.grid;
    let pt = spec.p.entries.transpose();
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let mut value = vec![0.0; k];
    let mut base_val: Option<Vec<f64>> = None;
    let mut worst = 0.0_f64;
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut x);
        value.copy_from_slice(comb.phi.at(node));
        for (i, gf) in comb.gamma.iter().enumerate() {
            let vi = seed.v(&x, i);
            if vi != 0.0 {
                let g = gf.at(node);
                for a in 0..k {
                    let mut s = 0.0;
                    for b in 0..k {
                        s += pt[(a, b)] * g[b];
                    }
                    value[a] += vi * s;
                }
            }
        }
        match &base_val {
            None => base_val = Some(value.clone()),
            Some(bv) => {
                for (v, b) in value.iter().zip(bv) {
                    worst = worst.max((v - b).abs());
                }
            }
        }
    }
    worst
}

/// Integrate the reduced system on a Lagrangian or horizontal pair seed and
/// attach the algebraic beta fields.
pub fn integrate_system_p<S: CoefficientProvider + ?Sized>(
    seed: &S,
    grid: &Grid,
    base: &[usize],
    spec: &PTransformSpec,
    axis_order: &[usize],
    tol: &Tolerances,
) -> Result<CombescureData> {
    let n = seed.n();
    spec.validate(n, tol)?;
    let k = spec.k();
    let horizontal = spec.variant == PVariant::Horizontal;
    match (seed.kind(), horizontal) {
        (PrincipalKind::LagrangianPair, false) => {}
        (PrincipalKind::HorizontalPair | PrincipalKind::HorizontalTriple, true) => {}
        (kind, _) => {
            return Err(Error::Schema(format!(
                "seed kind {kind:?} does not match variant {:?}",
                spec.variant
            )))
        }
    }
    if horizontal && (spec.c != seed.c()) {
        return Err(Error::Schema("spec and seed disagree on c".into()));
    }

    let pt_inv = spec
        .p
        .entries
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;
    let c = spec.c;

    // state: phi then gamma_1..gamma_n
    let mut init_state = Vec::with_capacity(k * (1 + n));
    init_state.extend_from_slice(&spec.init_phi);
    for g in &spec.init_gamma {
        init_state.extend_from_slice(g);
    }
    // the P* constraint is checked at the base node before integrating
    if spec.variant == PVariant::PStar {
        let mut x0 = vec![0.0; n];
        grid.coords(base, &mut x0);
        let pt = spec.p.entries.transpose();
        let mut cval = spec.init_phi.clone();
        for (i, g) in spec.init_gamma.iter().enumerate() {
            let vi = seed.v(&x0, i);
            for a in 0..k {
                let mut s = 0.0;
                for b in 0..k {
                    s += pt[(a, b)] * g[b];
                }
                cval[a] += vi * s;
            }
        }
        let defect = cval.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if defect > 1e-9 {
            return Err(Error::ConstraintViolation(defect));
        }
    }

    let state = sweep_integrate(
        grid,
        base,
        axis_order,
        k * (1 + n),
        &init_state,
        &mut |a, x, y, dy| {
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
                let h = if horizontal {
                    seed.h(x, j, a)
                } else {
                    seed.h(x, a, j)
                };
                for m in 0..k {
                    dy[(1 + j) * k + m] = h * ga[m];
                }
            }
            {
                let bidx = (1 + a) * k;
                for j in 0..n {
                    if j == a {
                        continue;
                    }
                    let h = if horizontal {
                        seed.h(x, j, a)
                    } else {
                        seed.h(x, a, j)
                    };
                    for m in 0..k {
                        dy[bidx + m] -= h * y[(1 + j) * k + m];
                    }
                }
                for i in 0..k {
                    let mut s = 0.0;
                    for j in 0..k {
                        s += pt_inv[(i, j)] * ga[j];
                    }
                    dy[bidx + i] -= s;
                }
                if horizontal && c != 0.0 {
                    for m in 0..k {
                        dy[bidx + m] -= c * va * y[m];
                    }
                }
            }
        },
    )?;

    // unpack and derive beta
    let len = grid.len();
    let mut phi = VecField::zeros(k, len);
    let mut gamma: Vec<VecField> = (0..n).map(|_| VecField::zeros(k, len)).collect();
    for node in 0..len {
        let s = state.at(node);
        phi.at_mut(node).copy_from_slice(&s[0..k]);
        for (j, gf) in gamma.iter_mut().enumerate() {
            gf.at_mut(node)
                .copy_from_slice(&s[(1 + j) * k..(2 + j) * k]);
        }
    }

    // For P* data the constraint is enforced exactly: phi = -sum v_i P^t gamma_i.
    if spec.variant == PVariant::PStar {
        let pt = spec.p.entries.transpose();
        let mut x = vec![0.0; n];
        let mut multi = vec![0usize; n];
        for node in 0..len {
            grid.multi(node, &mut multi);
            grid.coords(&multi, &mut x);
            let out = phi.at_mut(node);
            out.iter_mut().for_each(|v| *v = 0.0);
            for (i, gf) in gamma.iter().enumerate() {
                let vi = seed.v(&x, i);
                if vi != 0.0 {
                    let g = gf.at(node);
                    for a2 in 0..k {
                        let mut s = 0.0;
                        for b2 in 0..k {
                            s += pt[(a2, b2)] * g[b2];
                        }
                        out[a2] -= vi * s;
                    }
                }
            }
        }
    }

    let p_fields = if horizontal { n + 1 } else { n };
    let mut beta: Vec<VecField> = (0..p_fields).map(|_| VecField::zeros(k, len)).collect();
    let pt = spec.p.entries.transpose();
    let sc = c.abs().sqrt();
    for node in 0..len {
        for i in 0..n {
            let g = gamma[i].at(node);
            let out = beta[i].at_mut(node);
            for a2 in 0..k {
                let mut s = 0.0;
                for b2 in 0..k {
                    s += pt[(a2, b2)] * g[b2];
                }
                out[a2] = s;
            }
        }
        if horizontal {
            let ph = phi.at(node);
            let out = beta[n].at_mut(node);
            for a2 in 0..k {
                let mut s = 0.0;
                for b2 in 0..k {
                    s += pt[(a2, b2)] * ph[b2];
                }
                out[a2] = sc * s;
            }
        }
    }

    Ok(CombescureData {
        grid: grid.clone(),
        k,
        n,
        p: p_fields,
        c: spec.c,
        c_tilde: if horizontal { spec.c } else { 0.0 },
        system: if horizontal {
            CombSystem::PHorizontal
        } else {
            CombSystem::PFlat
        },
        op: spec.p.entries.clone(),
        phi,
        gamma,
        beta,
    })
}
