//! Principal-coordinate data sets and the finite-difference residuals of the
//! nonlinear systems they are declared to satisfy.

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::Grid;
use super::stencil::{argmax_abs_valid, diff};
use crate::{Error, Result};

/// Which nonlinear system the data claims to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrincipalKind {
    /// (v, h) for an immersion with c = c~ and flat normal bundle.
    FlatPair,
    /// (v, h, V) for c != c~.
    CurvedTriple,
    /// (v, h) flat Lagrangian in C^n, h symmetric.
    LagrangianPair,
    /// (v, h, rho) in the curvature-c sphere.
    HorizontalTriple,
    /// (v, h) horizontal in the curvature-c sphere, h symmetric.
    HorizontalPair,
}

/// The pair/triple (v, h[, V][, rho]) sampled on a grid.
#[derive(Debug, Clone)]
pub struct PrincipalData {
    pub kind: PrincipalKind,
    pub grid: Grid,
    pub n: usize,
    /// Codimension: n for the pair kinds, free for CurvedTriple, n+1 for the
    /// horizontal kinds (the structure direction is carried by rho).
    pub p: usize,
    pub c: f64,
    pub c_tilde: f64,
    /// n metric coefficients v_i.
    pub v: Vec<ScalarField>,
    /// n(n-1) off-diagonal fields h_ij in the order produced by [`h_slot`].
    pub h: Vec<ScalarField>,
    /// n*p fields V_ir, row-major in (i, r); CurvedTriple only.
    pub v_big: Option<Vec<ScalarField>>,
    /// n fields rho_i; HorizontalTriple only.
    pub rho: Option<Vec<ScalarField>>,
    /// Normal signature; fixed to +1 at runtime.
    pub signature: Vec<i8>,
    /// Degenerate seeds (the vacuum) are exempt from the v_i != 0 invariant.
    pub degenerate_seed: bool,
}

/// Storage slot of h_ij (i != j).
pub fn h_slot(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j > i { j - 1 } else { j }
}

impl PrincipalData {
    pub fn h(&self, i: usize, j: usize) -> &ScalarField {
        &self.h[h_slot(self.n, i, j)]
    }

    pub fn v_big(&self, i: usize, r: usize) -> &ScalarField {
        &self.v_big.as_ref().expect("V fields missing")[i * self.p + r]
    }

    pub fn rho_field(&self, i: usize) -> &ScalarField {
        &self.rho.as_ref().expect("rho fields missing")[i]
    }

    /// Structural validation: field counts, lengths and kind/parameter
    /// coherence. Returns SchemaError on mismatch.
    pub fn validate(&self) -> Result<()> {
        let len = self.grid.len();
        let n = self.n;
        if self.grid.n() != n {
            return Err(Error::Schema("grid dimension differs from n".into()));
        }
        if self.v.len() != n || self.h.len() != n * (n - 1) {
            return Err(Error::Schema(format!(
                "expected {} v fields and {} h fields, got {} and {}",
                n,
                n * (n - 1),
                self.v.len(),
                self.h.len()
            )));
        }
        for f in self.v.iter().chain(self.h.iter()) {
            if f.len() != len {
                return Err(Error::Schema("field length differs from grid size".into()));
            }
        }
        match self.kind {
            PrincipalKind::CurvedTriple => {
                let vb = self
                    .v_big
                    .as_ref()
                    .ok_or_else(|| Error::Schema("CurvedTriple requires V fields".into()))?;
                if vb.len() != n * self.p {
                    return Err(Error::Schema(format!(
                        "expected {} V fields, got {}",
                        n * self.p,
                        vb.len()
                    )));
                }
                if self.c == self.c_tilde {
                    return Err(Error::Schema("CurvedTriple requires c != c~".into()));
                }
            }
            PrincipalKind::HorizontalTriple => {
                let r = self
                    .rho
                    .as_ref()
                    .ok_or_else(|| Error::Schema("HorizontalTriple requires rho fields".into()))?;
                if r.len() != n {
                    return Err(Error::Schema("expected n rho fields".into()));
                }
                if self.c <= 0.0 {
                    return Err(Error::Schema("horizontal kinds are exercised with c > 0".into()));
                }
                if self.c_tilde != self.c {
                    return Err(Error::Schema(
                        "horizontal kinds live in the curvature-c sphere; set c~ = c".into(),
                    ));
                }
            }
            PrincipalKind::HorizontalPair => {
                if self.c <= 0.0 {
                    return Err(Error::Schema("horizontal kinds are exercised with c > 0".into()));
                }
                if self.c_tilde != self.c {
                    return Err(Error::Schema(
                        "horizontal kinds live in the curvature-c sphere; set c~ = c".into(),
                    ));
                }
            }
            PrincipalKind::FlatPair => {
                if self.c != self.c_tilde {
                    return Err(Error::Schema("FlatPair requires c = c~".into()));
                }
            }
            PrincipalKind::LagrangianPair => {
                if self.c != 0.0 || self.c_tilde != 0.0 {
                    return Err(Error::Schema("LagrangianPair is the c = 0 flat class".into()));
                }
            }
        }
        Ok(())
    }

    /// Smallest |v_i| over the grid and the offending index, for the
    /// nondegeneracy invariant.
    pub fn min_abs_v(&self) -> (f64, usize) {
        let mut worst = (f64::INFINITY, 0usize);
        for (i, f) in self.v.iter().enumerate() {
            for x in &f.0 {
                if x.abs() < worst.0 {
                    worst = (x.abs(), i);
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub equation: String,
    pub max: f64,
    pub node: Vec<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn push(&mut self, grid: &Grid, equation: impl Into<String>, field: &[f64]) {
        let (max, flat) = argmax_abs_valid(field);
        let mut node = vec![0usize; grid.n()];
        grid.multi(flat, &mut node);
        self.entries.push(ResidualEntry {
            equation: equation.into(),
            max,
            node,
        });
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.max))
    }

    pub fn get(&self, equation: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.equation == equation)
            .map(|e| e.max)
    }
}

/// Central-difference residuals of every equation in the declared system.
pub fn residual_system(data: &PrincipalData) -> Result<ResidualReport> {
    data.validate()?;
    let g = &data.grid;
    let n = data.n;
    let len = g.len();
    let mut report = ResidualReport::default();

    let dv: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..n).map(|a| diff(g, &data.v[i].0, a)).collect())
        .collect();

    // metric compatibility dv_i/du_j = h_ji v_j appears in every system
    {
        let mut worst = vec![0.0_f64; len];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let hji = &data.h(j, i).0;
                let vj = &data.v[j].0;
                for idx in 0..len {
                    let r = (dv[i][j][idx] - hji[idx] * vj[idx]).abs();
                    if r.is_nan() {
                        worst[idx] = f64::NAN;
                    } else if r > worst[idx] {
                        worst[idx] = r;
                    }
                }
            }
        }
        report.push(g, "i: dv_i/du_j = h_ji v_j", &worst);
    }

    match data.kind {
        PrincipalKind::FlatPair | PrincipalKind::CurvedTriple | PrincipalKind::HorizontalTriple => {
            // Gauss equation with the c v_i v_j source
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in i + 1..n {
                    let dh_i = diff(g, &data.h(i, j).0, i);
                    let dh_j = diff(g, &data.h(j, i).0, j);
                    for idx in 0..len {
                        let mut s = dh_i[idx] + dh_j[idx] + data.c * data.v[i].0[idx] * data.v[j].0[idx];
                        for l in 0..n {
                            if l != i && l != j {
                                s += data.h(l, i).0[idx] * data.h(l, j).0[idx];
                            }
                        }
                        let r = s.abs();
                        if r.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if r > worst[idx] {
                            worst[idx] = r;
                        }
                    }
                }
            }
            report.push(g, "gauss: dh_ij/du_i + dh_ji/du_j + sum + c v_i v_j", &worst);
        }
        _ => {}
    }

    // dh_ij/du_l = h_il h_jl (tangential indices), common to all systems
    {
        let mut worst = vec![0.0_f64; len];
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for l in 0..n {
                    if l == i || l == j {
                        continue;
                    }
                    let d = diff(g, &data.h(i, j).0, l);
                    let (a, b) = match data.kind {
                        // dh_ir/du_j = h_ij h_jr with (i, r) relabeled
                        PrincipalKind::FlatPair | PrincipalKind::CurvedTriple
                        | PrincipalKind::HorizontalTriple => (data.h(i, l), data.h(l, j)),
                        // dh_ij/du_l = h_il h_jl
                        PrincipalKind::LagrangianPair | PrincipalKind::HorizontalPair => {
                            (data.h(i, l), data.h(j, l))
                        }
                    };
                    for idx in 0..len {
                        let r = (d[idx] - a.0[idx] * b.0[idx]).abs();
                        if r.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if r > worst[idx] {
                            worst[idx] = r;
                        }
                    }
                }
            }
        }
        report.push(g, "iii: dh_ij/du_l = h h", &worst);
    }

    match data.kind {
        PrincipalKind::FlatPair => {
            // normal-connection flatness: dh_ij/du_j + dh_ji/du_i + sum_r h_ir h_jr = 0
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in i + 1..n {
                    let dh_j = diff(g, &data.h(i, j).0, j);
                    let dh_i = diff(g, &data.h(j, i).0, i);
                    for idx in 0..len {
                        let mut s = dh_j[idx] + dh_i[idx];
                        for r in 0..n {
                            if r != i && r != j {
                                s += data.h(i, r).0[idx] * data.h(j, r).0[idx];
                            }
                        }
                        let rr = s.abs();
                        if rr.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "iv: normal flatness", &worst);
        }
        PrincipalKind::CurvedTriple => {
            let p = data.p;
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for r in 0..p {
                    for l in 0..n {
                        if l == i {
                            continue;
                        }
                        let d = diff(g, &data.v_big(i, r).0, l);
                        let hli = &data.h(l, i).0;
                        let vlr = &data.v_big(l, r).0;
                        for idx in 0..len {
                            let rr = (d[idx] - hli[idx] * vlr[idx]).abs();
                            if rr.is_nan() {
                                worst[idx] = f64::NAN;
                            } else if rr > worst[idx] {
                                worst[idx] = rr;
                            }
                        }
                    }
                }
            }
            report.push(g, "ii: dV_ir/du_l = h_li V_lr", &worst);

            // hat-V row orthonormality (Riemannian signature)
            let mut worst = vec![0.0_f64; len];
            let w = (data.c - data.c_tilde).abs();
            for i in 0..n {
                for j in i..n {
                    for idx in 0..len {
                        let mut s = w * data.v[i].0[idx] * data.v[j].0[idx];
                        for r in 0..p {
                            s += data.v_big(i, r).0[idx] * data.v_big(j, r).0[idx];
                        }
                        if i == j {
                            s -= 1.0;
                        }
                        let rr = s.abs();
                        if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "orth: Vhat Vhat^t = I", &worst);
        }
        PrincipalKind::LagrangianPair => {
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut acc = vec![0.0_f64; len];
                    for l in 0..n {
                        let d = diff(g, &data.h(i, j).0, l);
                        for idx in 0..len {
                            acc[idx] += d[idx];
                        }
                    }
                    for idx in 0..len {
                        let rr = acc[idx].abs();
                        if rr.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "ii: sum_l dh_ij/du_l = 0", &worst);
        }
        PrincipalKind::HorizontalTriple => {
            // drho_i/du_j = h_ij rho_j
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = diff(g, &data.rho_field(i).0, j);
                    for idx in 0..len {
                        let rr = (d[idx] - data.h(i, j).0[idx] * data.rho_field(j).0[idx]).abs();
                        if rr.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "rho: drho_i/du_j = h_ij rho_j", &worst);

            // second flatness equation with the rho_i rho_j source
            let eps = if data.c >= 0.0 { 1.0 } else { -1.0 };
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in i + 1..n {
                    let dh_j = diff(g, &data.h(i, j).0, j);
                    let dh_i = diff(g, &data.h(j, i).0, i);
                    for idx in 0..len {
                        let mut s = dh_j[idx]
                            + dh_i[idx]
                            + eps * data.rho_field(i).0[idx] * data.rho_field(j).0[idx];
                        for l in 0..n {
                            if l != i && l != j {
                                s += data.h(i, l).0[idx] * data.h(j, l).0[idx];
                            }
                        }
                        let rr = s.abs();
                        if rr.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "v: normal flatness with rho source", &worst);
        }
        PrincipalKind::HorizontalPair => {
            let mut worst = vec![0.0_f64; len];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let mut acc = vec![0.0_f64; len];
                    for l in 0..n {
                        let d = diff(g, &data.h(i, j).0, l);
                        for idx in 0..len {
                            acc[idx] += d[idx];
                        }
                    }
                    for idx in 0..len {
                        let rr = (acc[idx] + data.c * data.v[i].0[idx] * data.v[j].0[idx]).abs();
                        if rr.is_nan() {
                            worst[idx] = f64::NAN;
                        } else if rr > worst[idx] {
                            worst[idx] = rr;
                        }
                    }
                }
            }
            report.push(g, "ii: sum_l dh_ij/du_l + c v_i v_j = 0", &worst);
        }
    }

    Ok(report)
}

/// Symmetry defect max |h_ij - h_ji| (the Lagrangian criterion).
pub fn h_symmetry_defect(data: &PrincipalData) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..data.n {
        for j in i + 1..data.n {
            let a = &data.h(i, j).0;
            let b = &data.h(j, i).0;
            for idx in 0..a.len() {
                worst = worst.max((a[idx] - b[idx]).abs());
            }
        }
    }
    worst
}
