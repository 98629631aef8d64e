//! The P-transform pipelines: nodewise Omega from the Lyapunov closed form,
//! the transformed immersion and the transformed pair/triple.

use crate::dense::{self, LuSolver};
use crate::geomgrid::field::{MatField, ScalarField};
use crate::geomgrid::frame::FrameSource;
use crate::geomgrid::principal::{h_slot, PrincipalData, PrincipalKind};
use crate::geomgrid::sweep::CoefficientProvider;
use crate::lagrangian::spec::{PTransformSpec, PVariant};
use crate::matrixeq::LyapunovSolver;
use crate::ribaucour::comb::CombescureData;
use crate::ribaucour::omega::OmegaField;
use crate::ribaucour::transform::{apply_vectorial_ribaucour, TransformBox, TransformOutput};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Omega from the polynomial Lyapunov solution at every node:
/// Omega^t solves P^t X + X P = ((P^t)^2 + I)(sum gamma gamma^t + c phi phi^t) P.
pub fn omega_from_lyapunov(
    comb: &CombescureData,
    spec: &PTransformSpec,
    tol: &Tolerances,
) -> Result<OmegaField> {
    let k = comb.k;
    let kk = k * k;
    let grid = &comb.grid;
    let solver = LyapunovSolver::new(&spec.p, tol)?;
    let pt = spec.p.entries.transpose();
    // A = ((P^t)^2 + I)
    let mut a = (&pt * &pt).clone_owned();
    for i in 0..k {
        a[(i, i)] += 1.0;
    }
    let af: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)])
        .collect();
    let pf: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| spec.p.entries[(i, j)])
        .collect();

    let len = grid.len();
    let mut omega = MatField::zeros(k, len);
    let c = spec.c;
    let mut ratio = f64::INFINITY;
    if k == 1 {
        // scalar shortcut: 2 P Omega = C
        let pval = spec.p.entries[(0, 0)];
        if 2.0 * pval.abs() <= tol.spectrum_gap {
            return Err(crate::Error::SpectrumClash {
                gap: 2.0 * pval.abs(),
            });
        }
        let cf = (1.0 + pval * pval) / (2.0 * pval) * pval; // ((P^2+1) q P) / (2P) per unit q
        for node in 0..len {
            let mut q = 0.0;
            for gf in &comb.gamma {
                let g = gf.at(node)[0];
                q += g * g;
            }
            if c != 0.0 {
                let ph = comb.phi.at(node)[0];
                q += c * ph * ph;
            }
            let val = cf * q;
            omega.at_mut(node)[0] = val;
            if val == 0.0 {
                ratio = 0.0;
            }
        }
        if ratio != 0.0 {
            ratio = 1.0;
        }
        let base = grid.center();
        let base_value = omega.at(grid.flat(&base)).to_vec();
        return Ok(OmegaField {
            grid: grid.clone(),
            k,
            omega,
            base_value,
            min_sv_ratio: ratio,
        });
    }
    let mut q = vec![0.0; kk];
    let mut t1 = vec![0.0; kk];
    let mut cmat = vec![0.0; kk];
    let mut xt = vec![0.0; kk];
    let mut work = vec![0.0; 3 * kk + k];
    for node in 0..len {
        // q = sum gamma gamma^t + c phi phi^t
        q.iter_mut().for_each(|v| *v = 0.0);
        for gf in &comb.gamma {
            let g = gf.at(node);
            for i in 0..k {
                for j in 0..k {
                    q[i * k + j] += g[i] * g[j];
                }
            }
        }
        if c != 0.0 {
            let ph = comb.phi.at(node);
            for i in 0..k {
                for j in 0..k {
                    q[i * k + j] += c * ph[i] * ph[j];
                }
            }
        }
        dense::matmul(&af, &q, &mut t1, k);
        dense::matmul(&t1, &pf, &mut cmat, k);
        solver.solve_into(&cmat, &mut xt, &mut work);
        let out = omega.at_mut(node);
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = xt[j * k + i];
            }
        }
        ratio = ratio.min(dense::sv_ratio(out, k));
    }
    let base = grid.center();
    let base_value = omega.at(grid.flat(&base)).to_vec();
    Ok(OmegaField {
        grid: grid.clone(),
        k,
        omega,
        base_value,
        min_sv_ratio: ratio,
    })
}

/// max || T Omega - Omega^t T^t || over the grid (the symmetry that encodes
/// the Lagrangian/horizontal reduction).
pub fn t_omega_defect(omega: &OmegaField, spec: &PTransformSpec) -> Result<f64> {
    let k = omega.k;
    let t = spec.t_matrix()?;
    let tf: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| t[(i, j)])
        .collect();
    let mut worst = 0.0_f64;
    let mut t1 = vec![0.0; k * k];
    for node in 0..omega.grid.len() {
        let om = omega.omega.at(node);
        dense::matmul(&tf, om, &mut t1, k);
        for i in 0..k {
            for j in 0..k {
                // (Omega^t T^t)_ij = (T Omega)_ji
                worst = worst.max((t1[i * k + j] - t1[j * k + i]).abs());
            }
        }
    }
    Ok(worst)
}

/// Transformed immersion and data of a P-transform. The returned data kind is
/// LagrangianPair for the flat variants and HorizontalTriple (with the
/// transformed rho) for the horizontal one.
pub fn apply_p_transform<F: FrameSource + ?Sized, S: CoefficientProvider + ?Sized>(
    frame: &F,
    seed: &S,
    comb: &CombescureData,
    omega: &OmegaField,
    spec: &PTransformSpec,
    store_tangents: bool,
    tol: &Tolerances,
) -> Result<(TransformOutput, PrincipalData, TransformBox)> {
    let out = apply_vectorial_ribaucour(frame, comb, omega, store_tangents, tol)?;
    let (data, dbox) = transformed_p_data(seed, comb, omega, spec, tol)?;
    Ok((out, data, dbox))
}

/// As [`apply_p_transform`] but checking the P* constraint first; the output
/// then stays in the unit sphere.
pub fn apply_pstar_transform<F: FrameSource + ?Sized, S: CoefficientProvider + ?Sized>(
    frame: &F,
    seed: &S,
    comb: &CombescureData,
    omega: &OmegaField,
    spec: &PTransformSpec,
    store_tangents: bool,
    tol: &Tolerances,
) -> Result<(TransformOutput, PrincipalData, TransformBox)> {
    let defect =
        crate::lagrangian::systems::pstar_conservation_defect(comb, seed, spec);
    // the conserved value must also be zero at the base node
    let base = comb.grid.flat(&comb.grid.center());
    let pt = spec.p.entries.transpose();
    let mut x0 = vec![0.0; comb.grid.n()];
    let mut multi = vec![0usize; comb.grid.n()];
    comb.grid.multi(base, &mut multi);
    comb.grid.coords(&multi, &mut x0);
    let mut cval = comb.phi.at(base).to_vec();
    for (i, gf) in comb.gamma.iter().enumerate() {
        let vi = seed.v(&x0, i);
        let g = gf.at(base);
        for a in 0..comb.k {
            let mut s = 0.0;
            for b in 0..comb.k {
                s += pt[(a, b)] * g[b];
            }
            cval[a] += vi * s;
        }
    }
    let base_defect = cval.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if base_defect > 1e-9 || defect > 1e-6 {
        return Err(Error::ConstraintViolation(base_defect.max(defect)));
    }
    apply_p_transform(frame, seed, comb, omega, spec, store_tangents, tol)
}

fn transformed_p_data<S: CoefficientProvider + ?Sized>(
    seed: &S,
    comb: &CombescureData,
    omega: &OmegaField,
    spec: &PTransformSpec,
    tol: &Tolerances,
) -> Result<(PrincipalData, TransformBox)> {
    let grid = &comb.grid;
    let k = comb.k;
    let n = comb.n;
    let len = grid.len();
    let horizontal = spec.variant == PVariant::Horizontal;
    let m = spec.p_plus_pinv()?;
    let mf: Vec<f64> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    let sc = spec.c.abs().sqrt();

    let inv_mask = omega.invertible_mask(tol);
    let mut lu = LuSolver::new(k);
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let mut w = vec![0.0; k];
    let mut mw = vec![0.0; k];

    let mut v_new = vec![ScalarField(vec![f64::NAN; len]); n];
    let mut h_new = vec![ScalarField(vec![f64::NAN; len]); n * (n - 1)];
    let mut rho_new = if horizontal {
        Some(vec![ScalarField(vec![f64::NAN; len]); n])
    } else {
        None
    };

    for node in 0..len {
        if !inv_mask[node] {
            continue;
        }
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut x);
        if !lu.factor(omega.omega.at(node)) {
            continue;
        }
        // v~_i = v_i + <gamma_i, (P + P^{-1}) Omega^{-1} phi>
        w.copy_from_slice(comb.phi.at(node));
        lu.solve_in_place(&mut w);
        dense::matvec(&mf, &w, &mut mw, k);
        for i in 0..n {
            v_new[i].0[node] = seed.v(&x, i) + dense::dot(comb.gamma[i].at(node), &mw);
        }
        if let Some(rn) = rho_new.as_mut() {
            // rho~_i = rho_i + sqrt(c) <phi, (P + P^{-1}) Omega^{-1} gamma_i>
            for i in 0..n {
                w.copy_from_slice(comb.gamma[i].at(node));
                lu.solve_in_place(&mut w);
                dense::matvec(&mf, &w, &mut mw, k);
                rn[i].0[node] = seed.rho(&x, i) + sc * dense::dot(comb.phi.at(node), &mw);
            }
        }
        // h~_ij = h_ij + <gamma_j, (P + P^{-1}) Omega^{-1} gamma_i>
        for i in 0..n {
            w.copy_from_slice(comb.gamma[i].at(node));
            lu.solve_in_place(&mut w);
            dense::matvec(&mf, &w, &mut mw, k);
            for j in 0..n {
                if j != i {
                    h_new[h_slot(n, i, j)].0[node] =
                        seed.h(&x, i, j) + dense::dot(comb.gamma[j].at(node), &mw);
                }
            }
        }
    }

    let mut valid = inv_mask;
    for vf in &v_new {
        for (mk, val) in valid.iter_mut().zip(&vf.0) {
            if val.is_nan() || val.abs() < tol.v_min {
                *mk = false;
            }
        }
    }
    let anchor = crate::geomgrid::grid::choose_anchor(grid, &grid.center(), &valid, |flat| {
        (0..n).fold(f64::INFINITY, |m, j| m.min(v_new[j].0[flat].abs()))
    })
    .ok_or_else(|| Error::EmptyDomain("transformed metric degenerate everywhere".into()))?;
    let (lo, hi) = grid
        .largest_valid_box(&anchor, &valid)
        .expect("anchor is valid");
    let (sub, map) = grid.restriction_map(&lo, &hi)?;
    let restrict = |f: &ScalarField| ScalarField(map.iter().map(|&old| f.0[old]).collect());

    let data = PrincipalData {
        kind: if horizontal {
            PrincipalKind::HorizontalTriple
        } else {
            PrincipalKind::LagrangianPair
        },
        grid: sub,
        n,
        p: comb.p,
        c: spec.c,
        c_tilde: if horizontal { spec.c } else { 0.0 },
        v: v_new.iter().map(&restrict).collect(),
        h: h_new.iter().map(&restrict).collect(),
        v_big: None,
        rho: rho_new.map(|r| r.iter().map(&restrict).collect()),
        signature: vec![1; comb.p],
        degenerate_seed: false,
    };
    Ok((
        data,
        TransformBox {
            box_lo: lo,
            box_hi: hi,
            index_map: map,
        },
    ))
}

/// Lagrangian criterion: max |h_ij - h_ji|.
pub fn check_lagrangian(data: &PrincipalData) -> f64 {
    crate::geomgrid::principal::h_symmetry_defect(data)
}

/// Horizontal criterion: max of |h_ij - h_ji| and |rho_i - sqrt(c) v_i|.
pub fn check_horizontal(data: &PrincipalData) -> f64 {
    let mut worst = crate::geomgrid::principal::h_symmetry_defect(data);
    let sc = data.c.abs().sqrt();
    if let Some(rho) = &data.rho {
        for i in 0..data.n {
            for (rv, vv) in rho[i].0.iter().zip(&data.v[i].0) {
                worst = worst.max((rv - sc * vv).abs());
            }
        }
    }
    worst
}
