//! Axis-by-axis RK4 integration of linear systems over a grid, plus
//! point evaluation of stored coefficient fields.
//!
//! Integration starts at a base node, fills its axis line, then sweeps each
//! further axis from every already-filled node. The step equals the grid
//! spacing; midpoint coefficients come from the provider, which for stored
//! fields means cubic interpolation along the line (order matched to RK4).

use super::grid::Grid;
use super::field::VecField;
use super::principal::{PrincipalData, PrincipalKind};
use crate::{Error, Result};

/// Coefficients (v, h, V, rho) of a seed, evaluated at arbitrary points.
///
/// During a sweep only the integration axis leaves the lattice, so stored
/// implementations interpolate along a single axis.
pub trait CoefficientProvider {
    fn n(&self) -> usize;
    fn p(&self) -> usize;
    fn kind(&self) -> PrincipalKind;
    fn c(&self) -> f64;
    fn c_tilde(&self) -> f64;
    fn v(&self, x: &[f64], i: usize) -> f64;
    fn h(&self, x: &[f64], i: usize, j: usize) -> f64;
    fn v_big(&self, _x: &[f64], _i: usize, _r: usize) -> f64 {
        panic!("this seed kind has no V fields")
    }
    /// Defaults to the horizontal-pair relation rho_i = sqrt(|c|) v_i.
    fn rho(&self, x: &[f64], i: usize) -> f64 {
        self.c().abs().sqrt() * self.v(x, i)
    }
}

/// Evaluate a stored field at a point that lies on the lattice in all axes
/// but at most one; that axis is interpolated with a 4-point Lagrange rule.
pub fn eval_field(grid: &Grid, f: &[f64], x: &[f64]) -> f64 {
    let mut flat = 0usize;
    let mut off: Option<(usize, f64)> = None;
    for a in 0..grid.n() {
        let t = (x[a] - grid.lo()[a]) / grid.spacing()[a];
        let r = t.round();
        if (t - r).abs() <= 1e-9 {
            let i = (r.max(0.0) as usize).min(grid.steps()[a] - 1);
            flat += i * grid.strides()[a];
        } else {
            debug_assert!(off.is_none(), "more than one off-lattice axis");
            off = Some((a, t));
        }
    }
    match off {
        None => f[flat],
        Some((a, t)) => {
            let steps = grid.steps()[a];
            let stride = grid.strides()[a];
            if steps < 4 {
                // linear between the surrounding nodes
                let m = (t.floor().max(0.0) as usize).min(steps - 2);
                let s = t - m as f64;
                let y0 = f[flat + m * stride];
                let y1 = f[flat + (m + 1) * stride];
                return y0 + s * (y1 - y0);
            }
            let m = t.floor() as isize;
            let w = (m - 1).clamp(0, steps as isize - 4) as usize;
            let xi = t - w as f64;
            let mut val = 0.0;
            for j in 0..4 {
                let mut wgt = 1.0;
                for l in 0..4 {
                    if l != j {
                        wgt *= (xi - l as f64) / (j as f64 - l as f64);
                    }
                }
                val += wgt * f[flat + (w + j) * stride];
            }
            val
        }
    }
}

impl CoefficientProvider for PrincipalData {
    fn n(&self) -> usize {
        self.n
    }
    fn p(&self) -> usize {
        self.p
    }
    fn kind(&self) -> PrincipalKind {
        self.kind
    }
    fn c(&self) -> f64 {
        self.c
    }
    fn c_tilde(&self) -> f64 {
        self.c_tilde
    }
    fn v(&self, x: &[f64], i: usize) -> f64 {
        eval_field(&self.grid, &self.v[i].0, x)
    }
    fn h(&self, x: &[f64], i: usize, j: usize) -> f64 {
        eval_field(&self.grid, &self.h(i, j).0, x)
    }
    fn v_big(&self, x: &[f64], i: usize, r: usize) -> f64 {
        eval_field(&self.grid, &PrincipalData::v_big(self, i, r).0, x)
    }
    fn rho(&self, x: &[f64], i: usize) -> f64 {
        match &self.rho {
            Some(fields) => eval_field(&self.grid, &fields[i].0, x),
            None => self.c.abs().sqrt() * self.v(x, i),
        }
    }
}

/// Integrate dy/du_a = rhs(a, x, y) over the grid from `base` along the axes
/// in `axis_order`, filling every node. Returns node-major packed states.
pub fn sweep_integrate(
    grid: &Grid,
    base: &[usize],
    axis_order: &[usize],
    state_dim: usize,
    init: &[f64],
    rhs: &mut dyn FnMut(usize, &[f64], &[f64], &mut [f64]),
) -> Result<VecField> {
    let n = grid.n();
    debug_assert_eq!(init.len(), state_dim);
    debug_assert_eq!(axis_order.len(), n);
    let mut out = VecField::zeros(state_dim, grid.len());
    out.at_mut(grid.flat(base)).copy_from_slice(init);

    let mut k1 = vec![0.0; state_dim];
    let mut k2 = vec![0.0; state_dim];
    let mut k3 = vec![0.0; state_dim];
    let mut k4 = vec![0.0; state_dim];
    let mut ytmp = vec![0.0; state_dim];
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; state_dim];

    let mut processed: Vec<usize> = Vec::new();
    for &axis in axis_order {
        let fixed: Vec<(usize, usize)> = (0..n)
            .filter(|a| *a != axis && !processed.contains(a))
            .map(|a| (a, base[a]))
            .collect();
        // also pin the sweep axis to its base coordinate when enumerating
        let mut starts: Vec<Vec<usize>> = Vec::new();
        let mut fixed_with_axis = fixed.clone();
        fixed_with_axis.push((axis, base[axis]));
        grid.for_each_in_slab(&fixed_with_axis, |m| starts.push(m.to_vec()));

        for start in starts {
            for dir in [1isize, -1] {
                let mut node = start.clone();
                let mut i = base[axis] as isize;
                y.copy_from_slice(out.at(grid.flat(&node)));
                loop {
                    let next = i + dir;
                    if next < 0 || next as usize >= grid.steps()[axis] {
                        break;
                    }
                    let h = grid.spacing()[axis] * dir as f64;
                    grid.coords(&node, &mut x);
                    let t0 = grid.coord_axis(axis, i as usize);

                    x[axis] = t0;
                    rhs(axis, &x, &y, &mut k1);
                    for s in 0..state_dim {
                        ytmp[s] = y[s] + 0.5 * h * k1[s];
                    }
                    x[axis] = t0 + 0.5 * h;
                    rhs(axis, &x, &ytmp, &mut k2);
                    for s in 0..state_dim {
                        ytmp[s] = y[s] + 0.5 * h * k2[s];
                    }
                    rhs(axis, &x, &ytmp, &mut k3);
                    for s in 0..state_dim {
                        ytmp[s] = y[s] + h * k3[s];
                    }
                    x[axis] = t0 + h;
                    rhs(axis, &x, &ytmp, &mut k4);
                    for s in 0..state_dim {
                        y[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
                    }
                    if !y.iter().all(|v| v.is_finite()) {
                        return Err(Error::IntegrationDiverged(format!(
                            "non-finite state along axis {axis} near index {next}"
                        )));
                    }
                    i = next;
                    node[axis] = i as usize;
                    out.at_mut(grid.flat(&node)).copy_from_slice(&y);
                }
            }
        }
        processed.push(axis);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_line_integration_is_fourth_order() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![101]).unwrap();
        let out = sweep_integrate(&g, &[0], &[0], 1, &[1.0], &mut |_, _, y, dy| {
            dy[0] = -y[0];
        })
        .unwrap();
        let got = out.at(100)[0];
        let expect = (-1.0_f64).exp();
        assert!((got - expect).abs() < 1e-10, "err = {}", (got - expect).abs());
    }

    #[test]
    fn two_axis_sweep_fills_the_grid() {
        // dphi/du_a = 1 for both axes: phi = u1 + u2 (+ const from base)
        let g = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![11, 11]).unwrap();
        let out = sweep_integrate(&g, &[5, 5], &[0, 1], 1, &[0.0], &mut |_, _, _, dy| {
            dy[0] = 1.0;
        })
        .unwrap();
        let mut m = [0usize; 2];
        for idx in g.iter_flat() {
            g.multi(idx, &mut m);
            let expect = g.coord_axis(0, m[0]) + g.coord_axis(1, m[1]);
            assert!((out.at(idx)[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_field_interpolates_cubics_exactly() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![9, 9]).unwrap();
        let mut f = vec![0.0; g.len()];
        let mut m = [0usize; 2];
        for idx in g.iter_flat() {
            g.multi(idx, &mut m);
            let u = g.coord_axis(0, m[0]);
            let w = g.coord_axis(1, m[1]);
            f[idx] = u * u * u + 2.0 * w;
        }
        // off-lattice along axis 0 only
        let x = [0.3125, 0.5];
        let got = eval_field(&g, &f, &x);
        let expect = x[0] * x[0] * x[0] + 2.0 * x[1];
        assert!((got - expect).abs() < 1e-12);
    }
}
