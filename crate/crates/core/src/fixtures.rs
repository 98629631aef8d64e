//! Closed-form seeds for the curved (c != c~) and horizontal classes. Like
//! the vacuum, these are degenerate solutions (only the first metric
//! coefficient is nonzero) whose frames are exact, so pipelines built on
//! them can be verified against integrable-system identities without a
//! separate integration error budget.

use num_complex::Complex64;

use crate::geomgrid::field::{ScalarField, VecField};
use crate::geomgrid::frame::ImmersionField;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::{PrincipalData, PrincipalKind};
use crate::geomgrid::sweep::CoefficientProvider;
use crate::{Error, Result};

fn put(out: &mut [f64], j: usize, z: Complex64) {
    out[2 * j] = z.re;
    out[2 * j + 1] = z.im;
}

/// Degenerate flat seed in the unit sphere: c = 0, c~ = 1, codimension n-1.
///
/// Frame: f = cos(u_1) e_1 + sin(u_1) e_2 traces a great circle; each further
/// axis rotates the pair (X_i, xi_{i-1}) in its own coordinate plane. The
/// associated triple has V_1r = 0 and V_ir = delta_{i-1,r}, constant.
#[derive(Debug, Clone)]
pub struct CurvedSeed {
    pub n: usize,
    pub data: PrincipalData,
    pub frame: ImmersionField,
}

#[derive(Debug, Clone, Copy)]
pub struct CurvedCoeffs {
    pub n: usize,
}

impl CoefficientProvider for CurvedCoeffs {
    fn n(&self) -> usize {
        self.n
    }
    fn p(&self) -> usize {
        self.n - 1
    }
    fn kind(&self) -> PrincipalKind {
        PrincipalKind::CurvedTriple
    }
    fn c(&self) -> f64 {
        0.0
    }
    fn c_tilde(&self) -> f64 {
        1.0
    }
    fn v(&self, _x: &[f64], i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            0.0
        }
    }
    fn h(&self, _x: &[f64], _i: usize, _j: usize) -> f64 {
        0.0
    }
    fn v_big(&self, _x: &[f64], i: usize, r: usize) -> f64 {
        if i >= 1 && r == i - 1 {
            1.0
        } else {
            0.0
        }
    }
}

pub fn curved_seed(n: usize, grid: &Grid) -> Result<CurvedSeed> {
    if n < 2 {
        return Err(Error::Schema("curved seed needs n >= 2".into()));
    }
    if grid.n() != n {
        return Err(Error::Grid("grid dimension mismatch".into()));
    }
    let len = grid.len();
    let p = n - 1;
    let nd = 2 * n; // n + p + 1

    let mut v = vec![ScalarField::constant(len, 1.0)];
    for _ in 1..n {
        v.push(ScalarField::zeros(len));
    }
    let mut v_big = Vec::with_capacity(n * p);
    for i in 0..n {
        for r in 0..p {
            let val = if i >= 1 && r == i - 1 { 1.0 } else { 0.0 };
            v_big.push(ScalarField::constant(len, val));
        }
    }
    let data = PrincipalData {
        kind: PrincipalKind::CurvedTriple,
        grid: grid.clone(),
        n,
        p,
        c: 0.0,
        c_tilde: 1.0,
        v,
        h: vec![ScalarField::zeros(len); n * (n - 1)],
        v_big: Some(v_big),
        rho: None,
        signature: vec![1; p],
        degenerate_seed: true,
    };

    let mut f = VecField::zeros(nd, len);
    let mut x: Vec<VecField> = (0..n).map(|_| VecField::zeros(nd, len)).collect();
    let mut xi: Vec<VecField> = (0..p).map(|_| VecField::zeros(nd, len)).collect();
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        let fv = f.at_mut(node);
        fv[0] = u[0].cos();
        fv[1] = u[0].sin();
        let x0 = x[0].at_mut(node);
        x0[0] = -u[0].sin();
        x0[1] = u[0].cos();
        for i in 1..n {
            let xv = x[i].at_mut(node);
            xv[2 * i] = u[i].cos();
            xv[2 * i + 1] = u[i].sin();
            let xiv = xi[i - 1].at_mut(node);
            xiv[2 * i] = -u[i].sin();
            xiv[2 * i + 1] = u[i].cos();
        }
    }
    let frame = ImmersionField {
        grid: grid.clone(),
        n,
        ambient_dim: nd,
        ambient_curv: 1.0,
        complex_structure: false,
        f,
        x,
        xi,
    };
    Ok(CurvedSeed { n, data, frame })
}

/// Degenerate horizontal seed with constant curvature c > 0 in S^{2n+1}(c).
///
/// The u_1 line is the curve F = a e^{i mu+ u_1} E_1 + b e^{i mu- u_1} E_2
/// with mu+- the roots of mu^2 - mu - c = 0 and weights chosen so that F is
/// horizontal with |F|^2 = 1/c and |X_1| = 1; the remaining axes rotate the
/// complex directions E_3, ..., E_{n+1}.
#[derive(Debug, Clone)]
pub struct HorizontalSeed {
    pub n: usize,
    pub c: f64,
    pub data: PrincipalData,
    pub frame: ImmersionField,
}

#[derive(Debug, Clone, Copy)]
pub struct HorizontalCoeffs {
    pub n: usize,
    pub c: f64,
}

impl CoefficientProvider for HorizontalCoeffs {
    fn n(&self) -> usize {
        self.n
    }
    fn p(&self) -> usize {
        self.n + 1
    }
    fn kind(&self) -> PrincipalKind {
        PrincipalKind::HorizontalPair
    }
    fn c(&self) -> f64 {
        self.c
    }
    fn c_tilde(&self) -> f64 {
        self.c
    }
    fn v(&self, _x: &[f64], i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            0.0
        }
    }
    fn h(&self, _x: &[f64], _i: usize, _j: usize) -> f64 {
        0.0
    }
}

pub fn horizontal_seed(n: usize, c: f64, grid: &Grid) -> Result<HorizontalSeed> {
    if n < 2 {
        return Err(Error::Schema("horizontal seed needs n >= 2".into()));
    }
    if c <= 0.0 {
        return Err(Error::Schema("horizontal seed needs c > 0".into()));
    }
    if grid.n() != n {
        return Err(Error::Grid("grid dimension mismatch".into()));
    }
    let len = grid.len();
    let nd = 2 * (n + 1);
    let disc = (1.0 + 4.0 * c).sqrt();
    let mu_p = 0.5 * (1.0 + disc);
    let mu_m = 0.5 * (1.0 - disc);
    let a = (-mu_m / (c * disc)).sqrt();
    let b = (1.0 / c - a * a).sqrt();
    let sc = c.sqrt();

    let mut v = vec![ScalarField::constant(len, 1.0)];
    for _ in 1..n {
        v.push(ScalarField::zeros(len));
    }
    let data = PrincipalData {
        kind: PrincipalKind::HorizontalPair,
        grid: grid.clone(),
        n,
        p: n + 1,
        c,
        c_tilde: c,
        v,
        h: vec![ScalarField::zeros(len); n * (n - 1)],
        v_big: None,
        rho: None,
        signature: vec![1; n + 1],
        degenerate_seed: true,
    };

    let mut f = VecField::zeros(nd, len);
    let mut x: Vec<VecField> = (0..n).map(|_| VecField::zeros(nd, len)).collect();
    let mut xi: Vec<VecField> = (0..=n).map(|_| VecField::zeros(nd, len)).collect();
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    let i = Complex64::i();
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        let zp = a * (i * mu_p * u[0]).exp();
        let zm = b * (i * mu_m * u[0]).exp();
        {
            let fv = f.at_mut(node);
            put(fv, 0, zp);
            put(fv, 1, zm);
        }
        {
            let x0 = x[0].at_mut(node);
            put(x0, 0, i * mu_p * zp);
            put(x0, 1, i * mu_m * zm);
        }
        {
            // xi_1 = J X_1
            let xi0 = xi[0].at_mut(node);
            put(xi0, 0, -mu_p * zp);
            put(xi0, 1, -mu_m * zm);
        }
        for j in 1..n {
            let zj = (i * u[j]).exp();
            put(x[j].at_mut(node), j + 1, zj);
            put(xi[j].at_mut(node), j + 1, i * zj);
        }
        {
            // structure direction sqrt(c) J F
            let xin = xi[n].at_mut(node);
            put(xin, 0, sc * i * zp);
            put(xin, 1, sc * i * zm);
        }
    }
    let frame = ImmersionField {
        grid: grid.clone(),
        n,
        ambient_dim: nd,
        ambient_curv: c,
        complex_structure: true,
        f,
        x,
        xi,
    };
    Ok(HorizontalSeed { n, c, data, frame })
}
