//! Ambient frames: position, tangent frame and normal frame sampled on the
//! grid, and their recovery from principal data by RK4 sweeps.

use super::field::VecField;
use super::grid::Grid;
use super::principal::PrincipalKind;
use super::stencil::diff;
use super::sweep::{sweep_integrate, CoefficientProvider};
use crate::{Error, Result};

/// Complex-structure action on interleaved coordinates: J(x, y) = (-y, x)
/// pairwise.
pub fn apply_j(v: &[f64], out: &mut [f64]) {
    for p in 0..v.len() / 2 {
        out[2 * p] = -v[2 * p + 1];
        out[2 * p + 1] = v[2 * p];
    }
}

/// Grid-sampled ambient positions plus tangent and normal frames.
#[derive(Debug, Clone)]
pub struct ImmersionField {
    pub grid: Grid,
    pub n: usize,
    pub ambient_dim: usize,
    /// Curvature of the ambient space form; 0 means flat R^N, otherwise the
    /// position lies on the sphere of radius 1/sqrt(c~).
    pub ambient_curv: f64,
    /// Marks R^{2m} carrying the complex structure J; Lagrangian fields store
    /// no normals (xi_i = J X_i), horizontal ones store n+1 of them.
    pub complex_structure: bool,
    pub f: VecField,
    pub x: Vec<VecField>,
    pub xi: Vec<VecField>,
}

impl ImmersionField {
    /// Number of normal directions available as fields (stored or via J).
    pub fn normal_count(&self) -> usize {
        if self.xi.is_empty() && self.complex_structure {
            self.n
        } else {
            self.xi.len()
        }
    }

    /// Write the r-th normal at a node into `out`.
    pub fn normal(&self, node: usize, r: usize, out: &mut [f64]) {
        if self.xi.is_empty() && self.complex_structure {
            apply_j(self.x[r].at(node), out);
        } else {
            out.copy_from_slice(self.xi[r].at(node));
        }
    }

    /// Max deviation of the frame from orthonormality (and, on a sphere, of
    /// the position from the sphere and from orthogonality to the frame).
    pub fn orthonormality_drift(&self) -> (f64, Vec<usize>) {
        let mut worst = (0.0_f64, 0usize);
        let nc = self.normal_count();
        let mut xi_r = vec![0.0; self.ambient_dim];
        let mut xi_s = vec![0.0; self.ambient_dim];
        for node in 0..self.grid.len() {
            let mut dev = 0.0_f64;
            for i in 0..self.n {
                let xi_vec = self.x[i].at(node);
                for j in i..self.n {
                    let d = dot(xi_vec, self.x[j].at(node)) - if i == j { 1.0 } else { 0.0 };
                    dev = dev.max(d.abs());
                }
            }
            for r in 0..nc {
                self.normal(node, r, &mut xi_r);
                for i in 0..self.n {
                    dev = dev.max(dot(&xi_r, self.x[i].at(node)).abs());
                }
                for s in r..nc {
                    self.normal(node, s, &mut xi_s);
                    let d = dot(&xi_r, &xi_s) - if r == s { 1.0 } else { 0.0 };
                    dev = dev.max(d.abs());
                }
            }
            if self.complex_structure && self.xi.is_empty() {
                // Lagrangian condition: J X_i is normal, so <X_i, J X_j> = 0
                for i in 0..self.n {
                    apply_j(self.x[i].at(node), &mut xi_r);
                    for j in 0..self.n {
                        dev = dev.max(dot(&xi_r, self.x[j].at(node)).abs());
                    }
                }
            }
            if self.ambient_curv != 0.0 {
                let f = self.f.at(node);
                let d = dot(f, f) - 1.0 / self.ambient_curv;
                dev = dev.max(d.abs() * self.ambient_curv.abs());
                for i in 0..self.n {
                    dev = dev.max(dot(f, self.x[i].at(node)).abs());
                }
                for r in 0..nc {
                    self.normal(node, r, &mut xi_r);
                    dev = dev.max(dot(f, &xi_r).abs());
                }
            }
            if dev > worst.0 {
                worst = (dev, node);
            }
        }
        let mut node = vec![0usize; self.grid.n()];
        self.grid.multi(worst.1, &mut node);
        (worst.0, node)
    }

    /// Max |df/du_i - v_i X_i| by central differences, given the metric
    /// coefficients; a consistency check between the position and the frame.
    pub fn position_derivative_defect(&self, v: &[super::field::ScalarField]) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..self.n {
            for comp in 0..self.ambient_dim {
                let fc: Vec<f64> = (0..self.grid.len())
                    .map(|node| self.f.at(node)[comp])
                    .collect();
                let d = diff(&self.grid, &fc, a);
                for (node, dval) in d.iter().enumerate() {
                    if dval.is_nan() {
                        continue;
                    }
                    let expect = v[a].0[node] * self.x[a].at(node)[comp];
                    worst = worst.max((dval - expect).abs());
                }
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ImmersionField {
    /// Restriction to an inclusive index box.
    pub fn restrict(&self, lo: &[usize], hi: &[usize]) -> crate::Result<ImmersionField> {
        let (sub, map) = self.grid.restriction_map(lo, hi)?;
        let take = |f: &VecField| -> VecField {
            let mut out = VecField::zeros(f.k, map.len());
            for (new, &old) in map.iter().enumerate() {
                out.at_mut(new).copy_from_slice(f.at(old));
            }
            out
        };
        Ok(ImmersionField {
            grid: sub,
            n: self.n,
            ambient_dim: self.ambient_dim,
            ambient_curv: self.ambient_curv,
            complex_structure: self.complex_structure,
            f: take(&self.f),
            x: self.x.iter().map(&take).collect(),
            xi: self.xi.iter().map(&take).collect(),
        })
    }
}

/// Initial frame at the base node.
#[derive(Debug, Clone)]
pub struct FrameInit {
    pub f0: Vec<f64>,
    pub x0: Vec<Vec<f64>>,
    pub xi0: Vec<Vec<f64>>,
}

/// Number of normal fields integrated as state for each seed kind.
fn stored_normals(kind: PrincipalKind, n: usize, p: usize) -> usize {
    match kind {
        PrincipalKind::FlatPair => n,
        PrincipalKind::CurvedTriple => p,
        PrincipalKind::LagrangianPair => 0,
        PrincipalKind::HorizontalTriple | PrincipalKind::HorizontalPair => n + 1,
    }
}

/// Integrate the moving frame of a seed from an orthonormal initial frame.
///
/// The frame ODEs are the structure equations of the declared system, written
/// in the ambient space (through the umbilical inclusion when the ambient is
/// a sphere). Orthonormality drift of the result is measured and reported,
/// never corrected; drift above `tol_frame` is an error.
pub fn integrate_frame<S: CoefficientProvider + ?Sized>(
    seed: &S,
    grid: &Grid,
    base: &[usize],
    init: &FrameInit,
    axis_order: &[usize],
    tol_frame: f64,
) -> Result<ImmersionField> {
    let n = seed.n();
    let kind = seed.kind();
    let nn = stored_normals(kind, n, seed.p());
    let nd = init.f0.len();
    if init.x0.len() != n || init.xi0.len() != nn {
        return Err(Error::Schema(format!(
            "frame init needs {n} tangents and {nn} normals for this kind"
        )));
    }
    let c_tilde = seed.c_tilde();

    let state_dim = nd * (1 + n + nn);
    let mut init_state = Vec::with_capacity(state_dim);
    init_state.extend_from_slice(&init.f0);
    for xv in &init.x0 {
        init_state.extend_from_slice(xv);
    }
    for xv in &init.xi0 {
        init_state.extend_from_slice(xv);
    }

    let xslice = |j: usize| (1 + j) * nd..(2 + j) * nd;
    let xislice = |r: usize| (1 + n + r) * nd..(2 + n + r) * nd;

    let mut state = sweep_integrate(
        grid,
        base,
        axis_order,
        state_dim,
        &init_state,
        &mut |a, x, y, dy| {
            dy.iter_mut().for_each(|d| *d = 0.0);
            let va = seed.v(x, a);
            // df = v_a X_a
            for m in 0..nd {
                dy[m] = va * y[xslice(a).start + m];
            }
            // dX_j = h_ja X_a for j != a
            for j in 0..n {
                if j == a {
                    continue;
                }
                let hja = seed.h(x, j, a);
                for m in 0..nd {
                    dy[xslice(j).start + m] = hja * y[xslice(a).start + m];
                }
            }
            // dX_a = -sum_k h_ka X_k + (normal part) - c~ v_a f
            {
                let base = xslice(a).start;
                for k in 0..n {
                    if k == a {
                        continue;
                    }
                    let hka = seed.h(x, k, a);
                    for m in 0..nd {
                        dy[base + m] -= hka * y[xslice(k).start + m];
                    }
                }
                match kind {
                    PrincipalKind::FlatPair => {
                        for m in 0..nd {
                            dy[base + m] += y[xislice(a).start + m];
                        }
                    }
                    PrincipalKind::CurvedTriple => {
                        for r in 0..nn {
                            let var = seed.v_big(x, a, r);
                            for m in 0..nd {
                                dy[base + m] += var * y[xislice(r).start + m];
                            }
                        }
                    }
                    PrincipalKind::LagrangianPair => {
                        // alpha(d_a, X_a) = J X_a
                        let xa = &y[xslice(a)];
                        for p in 0..nd / 2 {
                            dy[base + 2 * p] += -xa[2 * p + 1];
                            dy[base + 2 * p + 1] += xa[2 * p];
                        }
                    }
                    PrincipalKind::HorizontalTriple | PrincipalKind::HorizontalPair => {
                        for m in 0..nd {
                            dy[base + m] += y[xislice(a).start + m];
                        }
                    }
                }
                if c_tilde != 0.0 {
                    for m in 0..nd {
                        dy[base + m] -= c_tilde * va * y[m];
                    }
                }
            }
            // normal frame equations
            match kind {
                PrincipalKind::FlatPair => {
                    for r in 0..nn {
                        let base = xislice(r).start;
                        if r == a {
                            for m in 0..nd {
                                dy[base + m] -= y[xslice(a).start + m];
                            }
                            for rr in 0..nn {
                                if rr != a {
                                    let harr = seed.h(x, a, rr);
                                    for m in 0..nd {
                                        dy[base + m] -= harr * y[xislice(rr).start + m];
                                    }
                                }
                            }
                        } else {
                            let har = seed.h(x, a, r);
                            for m in 0..nd {
                                dy[base + m] = har * y[xislice(a).start + m];
                            }
                        }
                    }
                }
                PrincipalKind::CurvedTriple => {
                    for r in 0..nn {
                        let var = seed.v_big(x, a, r);
                        let base = xislice(r).start;
                        for m in 0..nd {
                            dy[base + m] = -var * y[xslice(a).start + m];
                        }
                    }
                }
                PrincipalKind::LagrangianPair => {}
                PrincipalKind::HorizontalTriple | PrincipalKind::HorizontalPair => {
                    let rho_a = seed.rho(x, a);
                    for r in 0..n {
                        let base = xislice(r).start;
                        if r == a {
                            for m in 0..nd {
                                dy[base + m] -= y[xslice(a).start + m];
                            }
                            for rr in 0..n {
                                if rr != a {
                                    let harr = seed.h(x, a, rr);
                                    for m in 0..nd {
                                        dy[base + m] -= harr * y[xislice(rr).start + m];
                                    }
                                }
                            }
                            for m in 0..nd {
                                dy[base + m] -= rho_a * y[xislice(n).start + m];
                            }
                        } else {
                            let har = seed.h(x, a, r);
                            for m in 0..nd {
                                dy[base + m] = har * y[xislice(a).start + m];
                            }
                        }
                    }
                    // structure direction
                    let base = xislice(n).start;
                    for m in 0..nd {
                        dy[base + m] = rho_a * y[xslice(a).start + m];
                    }
                }
            }
        },
    )?;

    // unpack
    let len = grid.len();
    let mut f = VecField::zeros(nd, len);
    let mut xf: Vec<VecField> = (0..n).map(|_| VecField::zeros(nd, len)).collect();
    let mut xif: Vec<VecField> = (0..nn).map(|_| VecField::zeros(nd, len)).collect();
    for node in 0..len {
        let s = state.at(node);
        f.at_mut(node).copy_from_slice(&s[0..nd]);
        for j in 0..n {
            xf[j].at_mut(node).copy_from_slice(&s[xslice(j)]);
        }
        for r in 0..nn {
            xif[r].at_mut(node).copy_from_slice(&s[xislice(r)]);
        }
    }
    state.data.clear();

    let field = ImmersionField {
        grid: grid.clone(),
        n,
        ambient_dim: nd,
        ambient_curv: c_tilde,
        complex_structure: matches!(
            kind,
            PrincipalKind::LagrangianPair
                | PrincipalKind::HorizontalTriple
                | PrincipalKind::HorizontalPair
        ),
        f,
        x: xf,
        xi: xif,
    };
    let (drift, node) = field.orthonormality_drift();
    if drift > tol_frame {
        return Err(Error::IntegrationDrift {
            drift,
            tol: tol_frame,
            node,
        });
    }
    Ok(field)
}

/// Access to a seed frame at grid nodes, either stored fields or closed-form
/// evaluation (which keeps large-grid pipelines from materializing frames).
pub trait FrameSource {
    fn ambient_dim(&self) -> usize;
    fn tangents(&self) -> usize;
    fn normals(&self) -> usize;
    fn complex_structure(&self) -> bool;
    fn ambient_curv(&self) -> f64;
    fn position(&self, node: usize, x: &[f64], out: &mut [f64]);
    fn tangent(&self, node: usize, x: &[f64], i: usize, out: &mut [f64]);
    fn normal_at(&self, node: usize, x: &[f64], r: usize, out: &mut [f64]);

    /// out = sum_i tang[i] X_i + sum_r norm[r] xi_r + pos * f at one node.
    /// Closed-form sources with sparse frames override this with direct
    /// writes; the default accumulates densely.
    fn combination(
        &self,
        node: usize,
        x: &[f64],
        tang: &[f64],
        norm: &[f64],
        pos: f64,
        out: &mut [f64],
        scratch: &mut [f64],
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &c) in tang.iter().enumerate() {
            if c != 0.0 {
                self.tangent(node, x, i, scratch);
                for (o, s) in out.iter_mut().zip(scratch.iter()) {
                    *o += c * *s;
                }
            }
        }
        for (r, &c) in norm.iter().enumerate() {
            if c != 0.0 {
                self.normal_at(node, x, r, scratch);
                for (o, s) in out.iter_mut().zip(scratch.iter()) {
                    *o += c * *s;
                }
            }
        }
        if pos != 0.0 {
            self.position(node, x, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += pos * *s;
            }
        }
    }
}

impl FrameSource for ImmersionField {
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    fn tangents(&self) -> usize {
        self.n
    }
    fn normals(&self) -> usize {
        self.normal_count()
    }
    fn complex_structure(&self) -> bool {
        self.complex_structure
    }
    fn ambient_curv(&self) -> f64 {
        self.ambient_curv
    }
    fn position(&self, node: usize, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.f.at(node));
    }
    fn tangent(&self, node: usize, _x: &[f64], i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.x[i].at(node));
    }
    fn normal_at(&self, node: usize, _x: &[f64], r: usize, out: &mut [f64]) {
        self.normal(node, r, out);
    }
}
