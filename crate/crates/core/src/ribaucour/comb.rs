//! Vector-valued transform data (phi, gamma_i, beta^r) and the residuals of
//! the linear system it is declared to solve.

use nalgebra::DMatrix;

use crate::geomgrid::field::VecField;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::ResidualReport;
use crate::geomgrid::sweep::CoefficientProvider;
use crate::{Error, Result};

/// Which linear system the data solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombSystem {
    /// System R: seeds with c = c~.
    R,
    /// System R*: seeds with c != c~.
    RStar,
    /// Flat Lagrangian reduction; beta^i = P^t gamma_i.
    PFlat,
    /// Horizontal reduction; additionally beta^{n+1} = sqrt(c) P^t phi.
    PHorizontal,
}

/// Grid fields (phi, gamma_1..gamma_n, beta^1..beta^p) with values in R^k.
#[derive(Debug, Clone)]
pub struct CombescureData {
    pub grid: Grid,
    pub k: usize,
    pub n: usize,
    pub p: usize,
    pub c: f64,
    pub c_tilde: f64,
    pub system: CombSystem,
    /// The operator of the system: L for R / R*, P for the reductions.
    pub op: DMatrix<f64>,
    pub phi: VecField,
    pub gamma: Vec<VecField>,
    pub beta: Vec<VecField>,
}

impl CombescureData {
    /// The associated L operator: `op` itself for R / R*, (P^2+I)^{-1} P^2
    /// for the P reductions.
    pub fn l_matrix(&self) -> Result<DMatrix<f64>> {
        match self.system {
            CombSystem::R | CombSystem::RStar => Ok(self.op.clone()),
            CombSystem::PFlat | CombSystem::PHorizontal => {
                let k = self.k;
                let p2 = &self.op * &self.op;
                let m = &p2 + DMatrix::identity(k, k);
                let inv = m.try_inverse().ok_or(Error::SingularOperator { ratio: 0.0 })?;
                Ok(inv * p2)
            }
        }
    }

    /// rho = sum_r beta^r (beta^r)^t - (c - c~) phi phi^t at a node, row-major
    /// into `out`.
    pub fn rho_at(&self, node: usize, out: &mut [f64]) {
        let k = self.k;
        out.iter_mut().for_each(|v| *v = 0.0);
        for b in &self.beta {
            let bv = b.at(node);
            for i in 0..k {
                for j in 0..k {
                    out[i * k + j] += bv[i] * bv[j];
                }
            }
        }
        let dc = self.c - self.c_tilde;
        if dc != 0.0 {
            let ph = self.phi.at(node);
            for i in 0..k {
                for j in 0..k {
                    out[i * k + j] -= dc * ph[i] * ph[j];
                }
            }
        }
    }

    /// G^t G = sum gamma gamma^t + sum beta beta^t + c~ phi phi^t at a node.
    pub fn gram_at(&self, node: usize, out: &mut [f64]) {
        let k = self.k;
        out.iter_mut().for_each(|v| *v = 0.0);
        for gset in [&self.gamma, &self.beta] {
            for g in gset {
                let gv = g.at(node);
                for i in 0..k {
                    for j in 0..k {
                        out[i * k + j] += gv[i] * gv[j];
                    }
                }
            }
        }
        if self.c_tilde != 0.0 {
            let ph = self.phi.at(node);
            for i in 0..k {
                for j in 0..k {
                    out[i * k + j] += self.c_tilde * ph[i] * ph[j];
                }
            }
        }
    }

    pub fn restrict(&self, lo: &[usize], hi: &[usize]) -> Result<CombescureData> {
        let (sub, map) = self.grid.restriction_map(lo, hi)?;
        let take = |f: &VecField| -> VecField {
            let mut out = VecField::zeros(f.k, map.len());
            for (new, &old) in map.iter().enumerate() {
                out.at_mut(new).copy_from_slice(f.at(old));
            }
            out
        };
        Ok(CombescureData {
            grid: sub,
            k: self.k,
            n: self.n,
            p: self.p,
            c: self.c,
            c_tilde: self.c_tilde,
            system: self.system,
            op: self.op.clone(),
            phi: take(&self.phi),
            gamma: self.gamma.iter().map(&take).collect(),
            beta: self.beta.iter().map(&take).collect(),
        })
    }
}

/// Central-difference derivative of one component of a VecField.
fn diff_component(grid: &Grid, f: &VecField, comp: usize, axis: usize) -> Vec<f64> {
    let vals: Vec<f64> = (0..grid.len()).map(|node| f.at(node)[comp]).collect();
    crate::geomgrid::stencil::diff(grid, &vals, axis)
}

/// Finite-difference residuals of the declared linear system against a seed.
pub fn residual_comb<S: CoefficientProvider + ?Sized>(
    comb: &CombescureData,
    seed: &S,
) -> ResidualReport {
    let g = &comb.grid;
    let n = comb.n;
    let k = comb.k;
    let len = g.len();
    let mut report = ResidualReport::default();
    let mut x = vec![0.0; n];
    let mut multi = vec![0usize; n];

    let coords = |node: usize, x: &mut Vec<f64>, multi: &mut Vec<usize>| {
        g.multi(node, multi);
        g.coords(multi, x);
    };

    let lt_inv = comb
        .op
        .transpose()
        .try_inverse()
        .expect("operator of an integrated system is invertible");

    // i: dphi/du_a = v_a gamma_a
    {
        let mut worst = vec![0.0_f64; len];
        for a in 0..n {
            for comp in 0..k {
                let d = diff_component(g, &comb.phi, comp, a);
                for node in 0..len {
                    if d[node].is_nan() {
                        worst[node] = f64::NAN;
                        continue;
                    }
                    coords(node, &mut x, &mut multi);
                    let r = (d[node] - seed.v(&x, a) * comb.gamma[a].at(node)[comp]).abs();
                    if r > worst[node] {
                        worst[node] = r;
                    }
                }
            }
        }
        report.push(g, "i: dphi = v gamma", &worst);
    }

    // ii: dgamma_j/du_a = h gamma_a (j != a); index order depends on system
    {
        let mut worst = vec![0.0_f64; len];
        for a in 0..n {
            for j in 0..n {
                if j == a {
                    continue;
                }
                for comp in 0..k {
                    let d = diff_component(g, &comb.gamma[j], comp, a);
                    for node in 0..len {
                        if d[node].is_nan() {
                            worst[node] = f64::NAN;
                            continue;
                        }
                        coords(node, &mut x, &mut multi);
                        let h = match comb.system {
                            CombSystem::PFlat => seed.h(&x, a, j),
                            _ => seed.h(&x, j, a),
                        };
                        let r = (d[node] - h * comb.gamma[a].at(node)[comp]).abs();
                        if r > worst[node] {
                            worst[node] = r;
                        }
                    }
                }
            }
        }
        report.push(g, "ii: dgamma_j = h gamma_a", &worst);
    }

    // iii: the diagonal gamma equation of each system
    {
        let mut worst = vec![0.0_f64; len];
        let mut rhs = vec![0.0; k];
        for a in 0..n {
            let mut dcols: Vec<Vec<f64>> = Vec::with_capacity(k);
            for comp in 0..k {
                dcols.push(diff_component(g, &comb.gamma[a], comp, a));
            }
            for node in 0..len {
                coords(node, &mut x, &mut multi);
                rhs.iter_mut().for_each(|v| *v = 0.0);
                match comb.system {
                    CombSystem::R => {
                        for j in 0..n {
                            if j != a {
                                let h = seed.h(&x, j, a);
                                for (rv, gv) in rhs.iter_mut().zip(comb.gamma[j].at(node)) {
                                    *rv -= h * gv;
                                }
                            }
                        }
                        let ba = comb.beta[a].at(node);
                        for i in 0..k {
                            let mut s = 0.0;
                            for j in 0..k {
                                s += lt_inv[(i, j)] * ba[j];
                            }
                            rhs[i] -= s - ba[i];
                        }
                        let cva = comb.c * seed.v(&x, a);
                        for (rv, pv) in rhs.iter_mut().zip(comb.phi.at(node)) {
                            *rv -= cva * pv;
                        }
                    }
                    CombSystem::RStar => {
                        for j in 0..n {
                            if j != a {
                                let h = seed.h(&x, j, a);
                                for (rv, gv) in rhs.iter_mut().zip(comb.gamma[j].at(node)) {
                                    *rv -= h * gv;
                                }
                            }
                        }
                        // ((L^t)^{-1} - I) sum_r V_ar beta^r
                        let mut w = vec![0.0; k];
                        for (r, b) in comb.beta.iter().enumerate() {
                            let var = seed.v_big(&x, a, r);
                            for (wv, bv) in w.iter_mut().zip(b.at(node)) {
                                *wv += var * bv;
                            }
                        }
                        for i in 0..k {
                            let mut s = 0.0;
                            for j in 0..k {
                                s += lt_inv[(i, j)] * w[j];
                            }
                            rhs[i] -= s - w[i];
                        }
                        // ((L^t)^{-1}(c - c~) + c~ I) v_a phi
                        let va = seed.v(&x, a);
                        let dc = comb.c - comb.c_tilde;
                        let ph = comb.phi.at(node);
                        for i in 0..k {
                            let mut s = comb.c_tilde * ph[i];
                            for j in 0..k {
                                s += dc * lt_inv[(i, j)] * ph[j];
                            }
                            rhs[i] -= va * s;
                        }
                    }
                    CombSystem::PFlat => {
                        for j in 0..n {
                            if j != a {
                                let h = seed.h(&x, a, j);
                                for (rv, gv) in rhs.iter_mut().zip(comb.gamma[j].at(node)) {
                                    *rv -= h * gv;
                                }
                            }
                        }
                        let ga = comb.gamma[a].at(node);
                        for i in 0..k {
                            let mut s = 0.0;
                            for j in 0..k {
                                s += lt_inv[(i, j)] * ga[j];
                            }
                            rhs[i] -= s;
                        }
                    }
                    CombSystem::PHorizontal => {
                        for j in 0..n {
                            if j != a {
                                let h = seed.h(&x, j, a);
                                for (rv, gv) in rhs.iter_mut().zip(comb.gamma[j].at(node)) {
                                    *rv -= h * gv;
                                }
                            }
                        }
                        let ga = comb.gamma[a].at(node);
                        for i in 0..k {
                            let mut s = 0.0;
                            for j in 0..k {
                                s += lt_inv[(i, j)] * ga[j];
                            }
                            rhs[i] -= s;
                        }
                        let cva = comb.c * seed.v(&x, a);
                        for (rv, pv) in rhs.iter_mut().zip(comb.phi.at(node)) {
                            *rv -= cva * pv;
                        }
                    }
                }
                let mut r = 0.0_f64;
                let mut any_nan = false;
                for comp in 0..k {
                    let d = dcols[comp][node];
                    if d.is_nan() {
                        any_nan = true;
                    } else {
                        r = r.max((d - rhs[comp]).abs());
                    }
                }
                if any_nan {
                    worst[node] = f64::NAN;
                } else if r > worst[node] {
                    worst[node] = r;
                }
            }
        }
        report.push(g, "iii: dgamma_a diagonal equation", &worst);
    }

    // beta equations, only for the integrated systems R / R*
    match comb.system {
        CombSystem::R => {
            let mut worst = vec![0.0_f64; len];
            for a in 0..n {
                for r in 0..comb.p {
                    for comp in 0..k {
                        let d = diff_component(g, &comb.beta[r], comp, a);
                        for node in 0..len {
                            if d[node].is_nan() {
                                worst[node] = f64::NAN;
                                continue;
                            }
                            coords(node, &mut x, &mut multi);
                            let expect = if r == a {
                                let mut s = -comb.gamma[a].at(node)[comp];
                                for rr in 0..comb.p {
                                    if rr != a {
                                        s -= seed.h(&x, a, rr) * comb.beta[rr].at(node)[comp];
                                    }
                                }
                                s
                            } else {
                                seed.h(&x, a, r) * comb.beta[a].at(node)[comp]
                            };
                            let res = (d[node] - expect).abs();
                            if res > worst[node] {
                                worst[node] = res;
                            }
                        }
                    }
                }
            }
            report.push(g, "iv/v: beta equations", &worst);
        }
        CombSystem::RStar => {
            let mut worst = vec![0.0_f64; len];
            for a in 0..n {
                for r in 0..comb.p {
                    for comp in 0..k {
                        let d = diff_component(g, &comb.beta[r], comp, a);
                        for node in 0..len {
                            if d[node].is_nan() {
                                worst[node] = f64::NAN;
                                continue;
                            }
                            coords(node, &mut x, &mut multi);
                            let expect =
                                -seed.v_big(&x, a, r) * comb.gamma[a].at(node)[comp];
                            let res = (d[node] - expect).abs();
                            if res > worst[node] {
                                worst[node] = res;
                            }
                        }
                    }
                }
            }
            report.push(g, "iv: dbeta^r = -V gamma", &worst);
        }
        _ => {}
    }

    report
}
