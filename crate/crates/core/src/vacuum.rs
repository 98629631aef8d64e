//! The vacuum seed of the flat Lagrangian system and the closed-form
//! transforms built from it: the scalar transform family and the
//! non-diagonalizable 2x2 example. These are the ground truth the pipelines
//! are tested against.

use num_complex::Complex64;

use crate::geomgrid::field::{ScalarField, VecField};
use crate::geomgrid::frame::{FrameSource, ImmersionField};
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::{PrincipalData, PrincipalKind};
use crate::geomgrid::sweep::CoefficientProvider;
use crate::{Error, Result};

/// Write a complex amplitude into interleaved real coordinates.
fn put(out: &mut [f64], j: usize, z: Complex64) {
    out[2 * j] = z.re;
    out[2 * j + 1] = z.im;
}

/// The trivial solution v = (1, 0, ..., 0), h = 0 with its exact frame
/// f = -i e^{i u_1} E_1, X_j = e^{i u_j} E_j.
#[derive(Debug, Clone)]
pub struct VacuumSeed {
    pub n: usize,
    pub data: PrincipalData,
    pub frame: ImmersionField,
}

/// Closed-form coefficient provider for the vacuum (exact at any point).
#[derive(Debug, Clone, Copy)]
pub struct VacuumCoeffs {
    pub n: usize,
}

impl CoefficientProvider for VacuumCoeffs {
    fn n(&self) -> usize {
        self.n
    }
    fn p(&self) -> usize {
        self.n
    }
    fn kind(&self) -> PrincipalKind {
        PrincipalKind::LagrangianPair
    }
    fn c(&self) -> f64 {
        0.0
    }
    fn c_tilde(&self) -> f64 {
        0.0
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

/// Closed-form frame of the vacuum, evaluated on demand.
#[derive(Debug, Clone, Copy)]
pub struct VacuumFrame {
    pub n: usize,
}

impl VacuumFrame {
    pub fn position_at(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        put(out, 0, -Complex64::i() * (Complex64::i() * u[0]).exp());
    }

    pub fn tangent_at(&self, u: &[f64], j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        put(out, j, (Complex64::i() * u[j]).exp());
    }
}

impl FrameSource for VacuumFrame {
    fn ambient_dim(&self) -> usize {
        2 * self.n
    }
    fn tangents(&self) -> usize {
        self.n
    }
    fn normals(&self) -> usize {
        self.n
    }
    fn complex_structure(&self) -> bool {
        true
    }
    fn ambient_curv(&self) -> f64 {
        0.0
    }
    fn position(&self, _node: usize, x: &[f64], out: &mut [f64]) {
        self.position_at(x, out);
    }
    fn tangent(&self, _node: usize, x: &[f64], i: usize, out: &mut [f64]) {
        self.tangent_at(x, i, out);
    }
    fn normal_at(&self, _node: usize, x: &[f64], r: usize, out: &mut [f64]) {
        // xi_r = J X_r = i e^{i u_r} E_r
        out.iter_mut().for_each(|v| *v = 0.0);
        put(out, r, Complex64::i() * (Complex64::i() * x[r]).exp());
    }
}

/// Populate the vacuum seed on a grid (exact evaluation, no integration).
pub fn vacuum_seed(n: usize, grid: &Grid) -> Result<VacuumSeed> {
    if n < 2 {
        return Err(Error::Schema("vacuum seed needs n >= 2".into()));
    }
    if grid.n() != n {
        return Err(Error::Grid(format!("grid dimension {} != n = {n}", grid.n())));
    }
    let len = grid.len();
    let mut v = vec![ScalarField::constant(len, 1.0)];
    for _ in 1..n {
        v.push(ScalarField::zeros(len));
    }
    let data = PrincipalData {
        kind: PrincipalKind::LagrangianPair,
        grid: grid.clone(),
        n,
        p: n,
        c: 0.0,
        c_tilde: 0.0,
        v,
        h: vec![ScalarField::zeros(len); n * (n - 1)],
        v_big: None,
        rho: None,
        signature: vec![1; n],
        degenerate_seed: true,
    };

    let src = VacuumFrame { n };
    let mut f = VecField::zeros(2 * n, len);
    let mut x: Vec<VecField> = (0..n).map(|_| VecField::zeros(2 * n, len)).collect();
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        src.position_at(&u, f.at_mut(node));
        for (j, xj) in x.iter_mut().enumerate() {
            src.tangent_at(&u, j, xj.at_mut(node));
        }
    }
    let frame = ImmersionField {
        grid: grid.clone(),
        n,
        ambient_dim: 2 * n,
        ambient_curv: 0.0,
        complex_structure: true,
        f,
        x,
        xi: Vec::new(),
    };
    Ok(VacuumSeed { n, data, frame })
}

/// Scalar transform of the vacuum in closed form:
///
/// ```text
/// f_P = -i e^{i u_1} E_1
///     + 2P(1 + P i) e^{-u_1/P} / ((1 + P^2) sum_j e^{-2 u_j / P})
///       * sum_j e^{(-1 + P i) u_j / P} E_j
/// ```
pub fn scalar_p_closed_form_at(p: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let s: f64 = u.iter().map(|uj| (-2.0 * uj / p).exp()).sum();
    let pref = 2.0 * p * Complex64::new(1.0, p) * (-u[0] / p).exp() / ((1.0 + p * p) * s);
    for j in 0..n {
        let z = pref * (Complex64::new(-1.0, p) * u[j] / p).exp();
        put(out, j, z);
    }
    let z0 = -Complex64::i() * (Complex64::i() * u[0]).exp();
    out[0] += z0.re;
    out[1] += z0.im;
}

/// Sample the scalar closed form over a grid. The result carries positions
/// only (it is an oracle for transformed positions, not an integrated frame).
pub fn scalar_p_closed_form(p: f64, grid: &Grid, n: usize) -> Result<ImmersionField> {
    if p == 0.0 {
        return Err(Error::Schema(
            "scalar transform parameter must be nonzero".into(),
        ));
    }
    if grid.n() != n {
        return Err(Error::Grid("grid dimension mismatch".into()));
    }
    let len = grid.len();
    let mut f = VecField::zeros(2 * n, len);
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        scalar_p_closed_form_at(p, &u, f.at_mut(node));
    }
    Ok(ImmersionField {
        grid: grid.clone(),
        n,
        ambient_dim: 2 * n,
        ambient_curv: 0.0,
        complex_structure: true,
        f,
        x: Vec::new(),
        xi: Vec::new(),
    })
}

/// gamma_j(u_j) for the non-diagonalizable example P = [[1, 1], [-1, 1]]
/// with initial value e_1.
pub fn nondiag_gamma(u_j: f64) -> [f64; 2] {
    let e = (-u_j / 2.0).exp();
    [e * (u_j / 2.0).cos(), e * (u_j / 2.0).sin()]
}

/// Omega(u) for the same example: sum_l e^{-u_l}/4 * Omega_l, row-major 2x2.
pub fn nondiag_omega(u: &[f64]) -> [f64; 4] {
    let mut m = [0.0; 4];
    for &ul in u {
        let e = (-ul).exp() / 4.0;
        let (cu, su) = (ul.cos(), ul.sin());
        m[0] += e * (3.0 + cu - 2.0 * su);
        m[1] += e * (1.0 + 2.0 * cu + su);
        m[2] += e * (-1.0 + 2.0 * cu + su);
        m[3] += e * (3.0 - cu + 2.0 * su);
    }
    m
}

/// The a_j, b_j coefficients of the non-diagonalizable transform
/// f~ = -i e^{i u_1} E_1 + sum_j (a_j + i b_j) e^{i u_j} E_j.
pub fn nondiag_ab(u: &[f64], j: usize) -> (f64, f64) {
    let g: f64 = u.iter().map(|ul| (-ul).exp()).sum();
    let mut d = 2.0 * g * g;
    for &ul in u {
        for &um in u {
            d -= (-(ul + um)).exp() * (ul - um).cos();
        }
    }
    let uj = 0.5 * (u[0] + u[j]);
    let vj = 0.5 * (u[0] - u[j]);
    let euj = (-uj).exp();
    let mut sa = 0.0;
    let mut sb = 0.0;
    for &ul in u {
        let e = (-ul).exp();
        sa += e * ((ul - uj).sin() - 3.0 * (ul - uj).cos());
        sb += e * ((ul - uj).sin() + 2.0 * (ul - uj).cos());
    }
    let a = 0.8 * euj * ((2.0 * vj.cos() - 4.0 * vj.sin()) * g + sa) / d;
    let b = 1.6 * euj * ((3.0 * vj.cos() - vj.sin()) * g - sb) / d;
    (a, b)
}

/// Sample the non-diagonalizable closed form over a grid; nodes where the
/// denominator D is nearly singular are reported.
pub fn nondiag_closed_form(grid: &Grid, n: usize) -> Result<(ImmersionField, Vec<usize>)> {
    if grid.n() != n {
        return Err(Error::Grid("grid dimension mismatch".into()));
    }
    let len = grid.len();
    let mut f = VecField::zeros(2 * n, len);
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    let mut flagged = Vec::new();
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        let g: f64 = u.iter().map(|ul| (-ul).exp()).sum();
        let mut d = 2.0 * g * g;
        for &ul in &u {
            for &um in &u {
                d -= (-(ul + um)).exp() * (ul - um).cos();
            }
        }
        if d.abs() < 1e-12 * g * g {
            flagged.push(node);
            continue;
        }
        let out = f.at_mut(node);
        for j in 0..n {
            let (a, b) = nondiag_ab(&u, j);
            let z = Complex64::new(a, b) * (Complex64::i() * u[j]).exp();
            put(out, j, z);
        }
        let z0 = -Complex64::i() * (Complex64::i() * u[0]).exp();
        out[0] += z0.re;
        out[1] += z0.im;
    }
    Ok((
        ImmersionField {
            grid: grid.clone(),
            n,
            ambient_dim: 2 * n,
            ambient_curv: 0.0,
            complex_structure: true,
            f,
            x: Vec::new(),
            xi: Vec::new(),
        },
        flagged,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomgrid::principal::residual_system;
    use crate::geomgrid::sphere::sphere_deviation_field;

    #[test]
    fn seed_values_at_the_origin() {
        let g = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![5, 5]).unwrap();
        let seed = vacuum_seed(2, &g).unwrap();
        let node = g.flat(&[2, 2]); // u = 0
        assert_eq!(seed.frame.f.at(node), &[0.0, -1.0, 0.0, 0.0]);
        let rep = residual_system(&seed.data).unwrap();
        assert_eq!(rep.max(), 0.0);
    }

    #[test]
    fn tangent_at_quarter_turn() {
        let g = Grid::new(
            vec![0.0, 0.0],
            vec![std::f64::consts::PI, std::f64::consts::PI],
            vec![5, 5],
        )
        .unwrap();
        let seed = vacuum_seed(2, &g).unwrap();
        let node = g.flat(&[0, 2]); // u_2 = pi/2
        let x2 = seed.frame.x[1].at(node);
        // e^{i pi/2} E_2 = i E_2
        assert!((x2[0]).abs() < 1e-12 && (x2[1]).abs() < 1e-12);
        assert!((x2[2]).abs() < 1e-12 && (x2[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_closed_form_at_origin_matches_hand_evaluation() {
        let mut out = vec![0.0; 4];
        scalar_p_closed_form_at(1.0, &[0.0, 0.0], &mut out);
        // -iE_1 + (1+i)/2 (E_1 + E_2)
        assert!((out[0] - 0.5).abs() < 1e-15);
        assert!((out[1] - (-0.5)).abs() < 1e-15);
        assert!((out[2] - 0.5).abs() < 1e-15);
        assert!((out[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scalar_closed_form_is_sphere_contained() {
        let g = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![21, 21]).unwrap();
        for p in [1.0, 2.0] {
            let f = scalar_p_closed_form(p, &g, 2).unwrap();
            assert!(sphere_deviation_field(&f) < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn scalar_closed_form_decays_to_the_seed() {
        let mut out = vec![0.0; 4];
        let u = [30.0, 0.0];
        scalar_p_closed_form_at(1.0, &u, &mut out);
        let mut seed = vec![0.0; 4];
        VacuumFrame { n: 2 }.position_at(&u, &mut seed);
        let d: f64 = out
            .iter()
            .zip(&seed)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(d < 1e-11);
    }

    #[test]
    fn nondiag_denominator_and_sum_at_origin() {
        let u: [f64; 2] = [0.0, 0.0];
        let g: f64 = u.iter().map(|x: &f64| (-x).exp()).sum();
        assert_eq!(g, 2.0);
        let mut d = 2.0 * g * g;
        for &ul in &u {
            for &um in &u {
                d -= (-(ul + um)).exp() * (ul - um).cos();
            }
        }
        assert_eq!(d, 4.0);
    }

    #[test]
    fn nondiag_closed_form_is_sphere_contained() {
        let g = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![21, 21]).unwrap();
        let (f, flagged) = nondiag_closed_form(&g, 2).unwrap();
        assert!(flagged.is_empty());
        assert!(sphere_deviation_field(&f) < 1e-12);
    }
}

/// Vacuum frame with per-axis trigonometric tables for one grid; the tensor
/// structure of the closed form makes every frame evaluation a lookup.
#[derive(Debug, Clone)]
pub struct VacuumFrameTable {
    n: usize,
    strides: Vec<usize>,
    steps: Vec<usize>,
    /// (cos u, sin u) per node index, per axis.
    cis: Vec<Vec<(f64, f64)>>,
}

impl VacuumFrameTable {
    pub fn new(n: usize, grid: &Grid) -> Self {
        let cis = (0..n)
            .map(|a| {
                (0..grid.steps()[a])
                    .map(|i| {
                        let u = grid.coord_axis(a, i);
                        (u.cos(), u.sin())
                    })
                    .collect()
            })
            .collect();
        VacuumFrameTable {
            n,
            strides: grid.strides().to_vec(),
            steps: grid.steps().to_vec(),
            cis,
        }
    }

    #[inline]
    fn axis_index(&self, node: usize, a: usize) -> usize {
        (node / self.strides[a]) % self.steps[a]
    }
}

impl FrameSource for VacuumFrameTable {
    fn ambient_dim(&self) -> usize {
        2 * self.n
    }
    fn tangents(&self) -> usize {
        self.n
    }
    fn normals(&self) -> usize {
        self.n
    }
    fn complex_structure(&self) -> bool {
        true
    }
    fn ambient_curv(&self) -> f64 {
        0.0
    }
    fn position(&self, node: usize, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (c, s) = self.cis[0][self.axis_index(node, 0)];
        // -i e^{i u_1} = sin u_1 - i cos u_1
        out[0] = s;
        out[1] = -c;
    }
    fn tangent(&self, node: usize, _x: &[f64], i: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (c, s) = self.cis[i][self.axis_index(node, i)];
        out[2 * i] = c;
        out[2 * i + 1] = s;
    }
    fn normal_at(&self, node: usize, _x: &[f64], r: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let (c, s) = self.cis[r][self.axis_index(node, r)];
        // i e^{i u_r}
        out[2 * r] = -s;
        out[2 * r + 1] = c;
    }
    fn combination(
        &self,
        node: usize,
        _x: &[f64],
        tang: &[f64],
        norm: &[f64],
        pos: f64,
        out: &mut [f64],
        _scratch: &mut [f64],
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..self.n {
            let (c, s) = self.cis[a][self.axis_index(node, a)];
            let t = tang.get(a).copied().unwrap_or(0.0);
            let m = norm.get(a).copied().unwrap_or(0.0);
            // t e^{iu} + m (i e^{iu})
            out[2 * a] = t * c - m * s;
            out[2 * a + 1] = t * s + m * c;
        }
        if pos != 0.0 {
            let (c, s) = self.cis[0][self.axis_index(node, 0)];
            out[0] += pos * s;
            out[1] -= pos * c;
        }
    }
}
