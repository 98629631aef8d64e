//! The vectorial Ribaucour transform: new immersion, transformed principal
//! data and the inverse transform data.

use nalgebra::DMatrix;

use crate::dense::{self, LuSolver};
use crate::geomgrid::field::{MatField, ScalarField, VecField};
use crate::geomgrid::frame::{FrameSource, ImmersionField};
use crate::geomgrid::principal::{h_slot, PrincipalData, PrincipalKind};
use crate::geomgrid::sweep::CoefficientProvider;
use crate::matrixeq::{solve_sylvester_system_with, AdmissibilityStatus, SylvesterSpec};
use crate::ribaucour::comb::{CombSystem, CombescureData};
use crate::ribaucour::omega::OmegaField;
use crate::tol::Tolerances;
use crate::{Error, Result};

/// A transform output restricted to the sub-box where it is defined.
#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub field: ImmersionField,
    pub box_lo: Vec<usize>,
    pub box_hi: Vec<usize>,
    /// Parent flat index of each output node.
    pub index_map: Vec<usize>,
}

/// Base value of Omega from the admissibility system at the base node, with
/// A = L, psi = phi_0, nu rows = gamma_i(x_0), beta rows = beta^r(x_0).
pub fn omega_base_value(comb: &CombescureData, base: &[usize], tol: &Tolerances) -> Result<Vec<f64>> {
    let k = comb.k;
    let node = comb.grid.flat(base);
    let l = comb.l_matrix()?;
    let a = crate::matrixeq::analyze_operator(l)?;
    let psi = nalgebra::DVector::from_row_slice(comb.phi.at(node));
    let mut nu = DMatrix::zeros(comb.n, k);
    for (i, gf) in comb.gamma.iter().enumerate() {
        for j in 0..k {
            nu[(i, j)] = gf.at(node)[j];
        }
    }
    let mut beta0 = DMatrix::zeros(comb.beta.len(), k);
    for (r, bf) in comb.beta.iter().enumerate() {
        for j in 0..k {
            beta0[(r, j)] = bf.at(node)[j];
        }
    }
    let spec = SylvesterSpec {
        a,
        c: comb.c,
        c_tilde: comb.c_tilde,
        psi,
        nu,
        beta0,
    };
    let verdict = solve_sylvester_system_with(&spec, tol)?;
    if verdict.status != AdmissibilityStatus::UniqueInvertible {
        return Err(Error::SingularOmega(format!(
            "base-node admissibility verdict {:?}",
            verdict.status
        )));
    }
    let x = verdict.solution.unwrap();
    Ok((0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| x[(i, j)])
        .collect())
}

/// Evaluate G w at a node: sum_i <gamma_i, w> X_i + sum_r <beta^r, w> xi_r
/// + c~ <phi, w> F, written into `out`.
struct GApplier<'a, F: FrameSource + ?Sized> {
    comb: &'a CombescureData,
    frame: &'a F,
    tang: Vec<f64>,
    norm: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a, F: FrameSource + ?Sized> GApplier<'a, F> {
    fn new(comb: &'a CombescureData, frame: &'a F) -> Self {
        let nd = frame.ambient_dim();
        GApplier {
            comb,
            frame,
            tang: vec![0.0; comb.n],
            norm: vec![0.0; comb.beta.len()],
            scratch: vec![0.0; nd],
        }
    }

    fn apply(&mut self, parent_node: usize, x: &[f64], w: &[f64], out: &mut [f64]) {
        for (i, gf) in self.comb.gamma.iter().enumerate() {
            self.tang[i] = dense::dot(gf.at(parent_node), w);
        }
        for (r, bf) in self.comb.beta.iter().enumerate() {
            self.norm[r] = dense::dot(bf.at(parent_node), w);
        }
        let pos = if self.comb.c_tilde != 0.0 {
            self.comb.c_tilde * dense::dot(self.comb.phi.at(parent_node), w)
        } else {
            0.0
        };
        self.frame.combination(
            parent_node,
            x,
            &self.tang,
            &self.norm,
            pos,
            out,
            &mut self.scratch,
        );
    }
}

/// f~ = f - G Omega^{-1} phi, with the transformed tangent frame
/// X~_i = X_i - G Omega^{-1} gamma_i and the transformed normal frame of the
/// declared system. Nodes with singular Omega are excluded; the output lives
/// on the largest valid box around the grid center.
pub fn apply_vectorial_ribaucour<F: FrameSource + ?Sized>(
    frame: &F,
    comb: &CombescureData,
    omega: &OmegaField,
    store_tangents: bool,
    tol: &Tolerances,
) -> Result<TransformOutput> {
    let grid = &comb.grid;
    if omega.grid.len() != grid.len() {
        return Err(Error::Dimension("omega and comb grids differ".into()));
    }
    let k = comb.k;
    let n = comb.n;
    let nd = frame.ambient_dim();

    let mask = omega.invertible_mask(tol);
    let base = grid.center();
    let (lo, hi) = grid
        .largest_valid_box(&base, &mask)
        .ok_or_else(|| Error::EmptyDomain("Omega is singular at the base node".into()))?;
    let (sub, map) = grid.restriction_map(&lo, &hi)?;

    let len = sub.len();
    let mut f_out = VecField::zeros(nd, len);
    let mut x_out: Vec<VecField> = if store_tangents {
        (0..n).map(|_| VecField::zeros(nd, len)).collect()
    } else {
        Vec::new()
    };
    let store_normals = matches!(comb.system, CombSystem::R | CombSystem::RStar);
    let mut xi_out: Vec<VecField> = if store_tangents && store_normals {
        (0..comb.p).map(|_| VecField::zeros(nd, len)).collect()
    } else {
        Vec::new()
    };

    let l_inv = match comb.system {
        CombSystem::R => Some(
            comb.l_matrix()?
                .try_inverse()
                .ok_or(Error::SingularOperator { ratio: 0.0 })?,
        ),
        _ => None,
    };

    let mut lu = LuSolver::new(k);
    let mut g = GApplier::new(comb, frame);
    let mut w = vec![0.0; k];
    let mut gw = vec![0.0; nd];
    let mut vecbuf = vec![0.0; nd];
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let mut q: Vec<Vec<f64>> = (0..comb.p).map(|_| vec![0.0; k]).collect();

    let mut first = true;
    for (sub_node, &node) in map.iter().enumerate() {
        if first {
            grid.multi(node, &mut multi);
            first = false;
        } else {
            // the map walks the sub-box in row-major order
            let mut a = grid.n();
            loop {
                a -= 1;
                if multi[a] < hi[a] {
                    multi[a] += 1;
                    break;
                }
                multi[a] = lo[a];
            }
        }
        grid.coords(&multi, &mut x);
        if !lu.factor(omega.omega.at(node)) {
            return Err(Error::SingularOmega(format!("exact singularity at node {multi:?}")));
        }
        // f~ = f - G Omega^{-1} phi
        w.copy_from_slice(comb.phi.at(node));
        lu.solve_in_place(&mut w);
        g.apply(node, &x, &w, &mut gw);
        {
            let dst = f_out.at_mut(sub_node);
            frame.position(node, &x, dst);
            for (d, gv) in dst.iter_mut().zip(&gw) {
                *d -= gv;
            }
        }
        if store_tangents {
            for i in 0..n {
                w.copy_from_slice(comb.gamma[i].at(node));
                lu.solve_in_place(&mut w);
                g.apply(node, &x, &w, &mut gw);
                let dst = x_out[i].at_mut(sub_node);
                frame.tangent(node, &x, i, dst);
                for (d, gv) in dst.iter_mut().zip(&gw) {
                    *d -= gv;
                }
            }
            if store_normals {
                for r in 0..comb.p {
                    q[r].copy_from_slice(comb.beta[r].at(node));
                    lu.solve_in_place(&mut q[r]);
                }
                for r in 0..comb.p {
                    match comb.system {
                        CombSystem::R => {
                            // xi~_r = P(xi_r - sum_l c_l xi_l), c_l = <beta^r, L^{-1} Omega^{-1} beta^l>
                            let li = l_inv.as_ref().unwrap();
                            let br = comb.beta[r].at(node);
                            let mut combo = vec![0.0; k]; // Omega^{-1}(beta^r - sum c_l beta^l)
                            combo.copy_from_slice(&q[r]);
                            frame.normal_at(node, &x, r, xi_out[r].at_mut(sub_node));
                            for l in 0..comb.p {
                                // c_l = br^t L^{-1} q_l
                                let mut c_l = 0.0;
                                for ii in 0..k {
                                    let mut s = 0.0;
                                    for jj in 0..k {
                                        s += li[(ii, jj)] * q[l][jj];
                                    }
                                    c_l += br[ii] * s;
                                }
                                if c_l != 0.0 {
                                    frame.normal_at(node, &x, l, &mut vecbuf);
                                    for m in 0..nd {
                                        xi_out[r].at_mut(sub_node)[m] -= c_l * vecbuf[m];
                                    }
                                    for jj in 0..k {
                                        combo[jj] -= c_l * q[l][jj];
                                    }
                                }
                            }
                            g.apply(node, &x, &combo, &mut gw);
                            for m in 0..nd {
                                xi_out[r].at_mut(sub_node)[m] -= gw[m];
                            }
                        }
                        CombSystem::RStar => {
                            g.apply(node, &x, &q[r], &mut gw);
                            frame.normal_at(node, &x, r, xi_out[r].at_mut(sub_node));
                            for m in 0..nd {
                                xi_out[r].at_mut(sub_node)[m] -= gw[m];
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    let field = ImmersionField {
        grid: sub,
        n,
        ambient_dim: nd,
        ambient_curv: frame.ambient_curv(),
        complex_structure: frame.complex_structure(),
        f: f_out,
        x: x_out,
        xi: xi_out,
    };
    Ok(TransformOutput {
        field,
        box_lo: lo,
        box_hi: hi,
        index_map: map,
    })
}

/// Transformed pair/triple for the L-route. The output is restricted to the
/// box where Omega is invertible and every v~_i stays away from zero.
pub fn transformed_principal_data<S: CoefficientProvider + ?Sized>(
    seed: &S,
    comb: &CombescureData,
    omega: &OmegaField,
    tol: &Tolerances,
) -> Result<(PrincipalData, TransformBox)> {
    let grid = &comb.grid;
    let k = comb.k;
    let n = comb.n;
    let len = grid.len();

    let system = comb.system;
    if !matches!(system, CombSystem::R | CombSystem::RStar) {
        return Err(Error::Schema(
            "transformed_principal_data covers the L-route; use the Lagrangian module for P-routes"
                .into(),
        ));
    }
    let l = comb.l_matrix()?;
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;

    let inv_mask = omega.invertible_mask(tol);
    let mut lu = LuSolver::new(k);
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];

    // full-grid evaluation of v~, h~ (and V~), then restriction
    let mut v_new = vec![ScalarField(vec![f64::NAN; len]); n];
    let mut h_new = vec![ScalarField(vec![f64::NAN; len]); n * (n - 1)];
    let p = comb.p;
    let mut vbig_new = if system == CombSystem::RStar {
        Some(vec![ScalarField(vec![f64::NAN; len]); n * p])
    } else {
        None
    };

    let mut w_phi = vec![0.0; k];
    let mut w_g = vec![0.0; k];
    let mut tmp = vec![0.0; k];
    let mut b_vecs: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0; k]).collect();

    for node in 0..len {
        if !inv_mask[node] {
            continue;
        }
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut x);
        if !lu.factor(omega.omega.at(node)) {
            continue;
        }
        w_phi.copy_from_slice(comb.phi.at(node));
        lu.solve_in_place(&mut w_phi);

        match system {
            CombSystem::R => {
                // v~_j = v_j + <beta^j, L^{-1} Omega^{-1} phi>
                for ii in 0..k {
                    let mut s = 0.0;
                    for jj in 0..k {
                        s += l_inv[(ii, jj)] * w_phi[jj];
                    }
                    tmp[ii] = s;
                }
                for j in 0..n {
                    v_new[j].0[node] = seed.v(&x, j) + dense::dot(comb.beta[j].at(node), &tmp);
                }
                for i in 0..n {
                    w_g.copy_from_slice(comb.gamma[i].at(node));
                    lu.solve_in_place(&mut w_g);
                    let mut li_wg = vec![0.0; k];
                    for ii in 0..k {
                        let mut s = 0.0;
                        for jj in 0..k {
                            s += l_inv[(ii, jj)] * w_g[jj];
                        }
                        li_wg[ii] = s;
                    }
                    for r in 0..n {
                        if r != i {
                            h_new[h_slot(n, i, r)].0[node] =
                                seed.h(&x, i, r) + dense::dot(comb.beta[r].at(node), &li_wg);
                        }
                    }
                }
            }
            CombSystem::RStar => {
                // B_i = -(L^t)^{-1} (sum_r beta^r V_ir + (c - c~) v_i phi);
                // the phi-term sign follows from equation (iii) of the R*
                // system and is confirmed by the structure identities
                let dc = comb.c - comb.c_tilde;
                for (i, bi) in b_vecs.iter_mut().enumerate() {
                    let mut acc = vec![0.0; k];
                    for (r, bf) in comb.beta.iter().enumerate() {
                        let vir = seed.v_big(&x, i, r);
                        if vir != 0.0 {
                            for (av, bv) in acc.iter_mut().zip(bf.at(node)) {
                                *av += vir * bv;
                            }
                        }
                    }
                    let vi = seed.v(&x, i);
                    for (av, pv) in acc.iter_mut().zip(comb.phi.at(node)) {
                        *av += dc * vi * pv;
                    }
                    for ii in 0..k {
                        let mut s = 0.0;
                        for jj in 0..k {
                            s += lt_inv[(ii, jj)] * acc[jj];
                        }
                        bi[ii] = -s;
                    }
                }
                for j in 0..n {
                    v_new[j].0[node] = seed.v(&x, j) - dense::dot(&b_vecs[j], &w_phi);
                }
                for i in 0..n {
                    w_g.copy_from_slice(comb.gamma[i].at(node));
                    lu.solve_in_place(&mut w_g);
                    for j in 0..n {
                        if j != i {
                            h_new[h_slot(n, i, j)].0[node] =
                                seed.h(&x, i, j) - dense::dot(&b_vecs[j], &w_g);
                        }
                    }
                }
                let vb = vbig_new.as_mut().unwrap();
                for (r, bf) in comb.beta.iter().enumerate() {
                    w_g.copy_from_slice(bf.at(node));
                    lu.solve_in_place(&mut w_g);
                    for i in 0..n {
                        vb[i * p + r].0[node] =
                            seed.v_big(&x, i, r) + dense::dot(&b_vecs[i], &w_g);
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    // validity: invertible Omega and nondegenerate v~
    let mut valid = inv_mask;
    for j in 0..n {
        for (m, val) in valid.iter_mut().zip(&v_new[j].0) {
            if val.is_nan() || val.abs() < tol.v_min {
                *m = false;
            }
        }
    }
    let anchor = crate::geomgrid::grid::choose_anchor(grid, &grid.center(), &valid, |flat| {
        (0..n).fold(f64::INFINITY, |m, j| m.min(v_new[j].0[flat].abs()))
    })
    .ok_or_else(|| Error::EmptyDomain("transformed data degenerate everywhere".into()))?;
    let (lo, hi) = grid
        .largest_valid_box(&anchor, &valid)
        .expect("anchor is valid");
    let (sub, map) = grid.restriction_map(&lo, &hi)?;
    let restrict = |f: &ScalarField| ScalarField(map.iter().map(|&old| f.0[old]).collect());

    // an L-transform of a Lagrangian seed is not Lagrangian in general, so
    // the c = c~ output is reported as the flat pair it is
    let kind = match system {
        CombSystem::R => PrincipalKind::FlatPair,
        CombSystem::RStar => PrincipalKind::CurvedTriple,
        _ => unreachable!(),
    };
    let (c, c_tilde) = (comb.c, comb.c_tilde);

    let data = PrincipalData {
        kind,
        grid: sub,
        n,
        p: if system == CombSystem::RStar { p } else { n },
        c,
        c_tilde,
        v: v_new.iter().map(&restrict).collect(),
        h: h_new.iter().map(&restrict).collect(),
        v_big: vbig_new.map(|vb| vb.iter().map(&restrict).collect()),
        rho: None,
        signature: vec![1; if system == CombSystem::RStar { p } else { n }],
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

/// Domain bookkeeping for restricted outputs.
#[derive(Debug, Clone)]
pub struct TransformBox {
    pub box_lo: Vec<usize>,
    pub box_hi: Vec<usize>,
    pub index_map: Vec<usize>,
}

/// Inverse transform data: phi~ = Omega^{-1} phi, gamma~_i = Omega^{-1}
/// gamma_i, beta~ rotated to the transformed normal frame, operator L^t and
/// Omega~ = Omega^{-1}. Applying the vectorial transform with this data to
/// the transformed immersion recovers the original one.
pub fn inverse_transform_data(
    comb: &CombescureData,
    omega: &OmegaField,
) -> Result<(CombescureData, OmegaField)> {
    let grid = &comb.grid;
    let k = comb.k;
    let len = grid.len();
    if omega.grid.len() != len {
        return Err(Error::Dimension("omega and comb grids differ".into()));
    }
    if !matches!(comb.system, CombSystem::R | CombSystem::RStar) {
        return Err(Error::Schema("inverse data is defined for the L-route".into()));
    }
    let l = comb.l_matrix()?;
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::SingularOperator { ratio: 0.0 })?;

    let mut lu = LuSolver::new(k);
    let mut phi = VecField::zeros(k, len);
    let mut gamma: Vec<VecField> = (0..comb.n).map(|_| VecField::zeros(k, len)).collect();
    let mut beta: Vec<VecField> = (0..comb.p).map(|_| VecField::zeros(k, len)).collect();
    let mut om_inv = MatField::zeros(k, len);
    let mut q: Vec<Vec<f64>> = (0..comb.p).map(|_| vec![0.0; k]).collect();
    let mut col = vec![0.0; k];
    let mut ratio = f64::INFINITY;

    for node in 0..len {
        let om = omega.omega.at(node);
        ratio = ratio.min(dense::sv_ratio(om, k));
        if !lu.factor(om) {
            return Err(Error::SingularOmega(
                "inverse data requested on a singular node".into(),
            ));
        }
        {
            let out = phi.at_mut(node);
            out.copy_from_slice(comb.phi.at(node));
            lu.solve_in_place(out);
        }
        for (i, gf) in comb.gamma.iter().enumerate() {
            let out = gamma[i].at_mut(node);
            out.copy_from_slice(gf.at(node));
            lu.solve_in_place(out);
        }
        for (r, bf) in comb.beta.iter().enumerate() {
            q[r].copy_from_slice(bf.at(node));
            lu.solve_in_place(&mut q[r]);
        }
        match comb.system {
            CombSystem::R => {
                for r in 0..comb.p {
                    let br = comb.beta[r].at(node);
                    let out = beta[r].at_mut(node);
                    out.copy_from_slice(&q[r]);
                    for (l_idx, ql) in q.iter().enumerate() {
                        let mut c_l = 0.0;
                        for ii in 0..k {
                            let mut s = 0.0;
                            for jj in 0..k {
                                s += l_inv[(ii, jj)] * ql[jj];
                            }
                            c_l += br[ii] * s;
                        }
                        if c_l != 0.0 {
                            let ql2 = &q[l_idx];
                            for (ov, qv) in out.iter_mut().zip(ql2) {
                                *ov -= c_l * qv;
                            }
                        }
                    }
                }
            }
            CombSystem::RStar => {
                for r in 0..comb.p {
                    beta[r].at_mut(node).copy_from_slice(&q[r]);
                }
            }
            _ => unreachable!(),
        }
        // Omega~ = Omega^{-1}, column by column
        for cidx in 0..k {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[cidx] = 1.0;
            lu.solve_in_place(&mut col);
            let out = om_inv.at_mut(node);
            for ridx in 0..k {
                out[ridx * k + cidx] = col[ridx];
            }
        }
    }

    let base = grid.center();
    let base_value = om_inv.at(grid.flat(&base)).to_vec();
    let inv_comb = CombescureData {
        grid: grid.clone(),
        k,
        n: comb.n,
        p: comb.p,
        c: comb.c,
        c_tilde: comb.c_tilde,
        system: comb.system,
        op: comb.op.transpose(),
        phi,
        gamma,
        beta,
    };
    let inv_omega = OmegaField {
        grid: grid.clone(),
        k,
        omega: om_inv,
        base_value,
        min_sv_ratio: ratio,
    };
    Ok((inv_comb, inv_omega))
}
