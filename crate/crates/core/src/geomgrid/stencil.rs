//! Central finite differences on grid fields.
//!
//! Differentiation uses the 5-point fourth-order stencil wherever an axis is
//! long enough (>= 5 nodes) and the plain central difference otherwise.
//! Nodes whose stencil leaves the grid are marked NaN and ignored by the
//! residual maxima; constant and linear fields therefore differentiate
//! exactly, and smooth fields see O(h^4) truncation.

use super::grid::Grid;

/// Partial derivative along `axis`. Margin nodes are NaN.
pub fn diff(grid: &Grid, f: &[f64], axis: usize) -> Vec<f64> {
    let steps = grid.steps()[axis];
    let stride = grid.strides()[axis];
    let h = grid.spacing()[axis];
    let order4 = steps >= 5;
    let margin = if order4 { 2 } else { 1 };
    let mut out = vec![f64::NAN; f.len()];
    for idx in 0..f.len() {
        let i = (idx / stride) % steps;
        if i < margin || i + margin >= steps {
            continue;
        }
        out[idx] = if order4 {
            (-f[idx + 2 * stride] + 8.0 * f[idx + stride] - 8.0 * f[idx - stride]
                + f[idx - 2 * stride])
                / (12.0 * h)
        } else {
            (f[idx + stride] - f[idx - stride]) / (2.0 * h)
        };
    }
    out
}

/// Max |value| over non-NaN entries.
pub fn max_abs_valid(f: &[f64]) -> f64 {
    f.iter()
        .filter(|x| !x.is_nan())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Max |value| and its flat node index over non-NaN entries.
pub fn argmax_abs_valid(f: &[f64]) -> (f64, usize) {
    let mut best = (0.0_f64, 0usize);
    for (i, x) in f.iter().enumerate() {
        if !x.is_nan() && x.abs() > best.0 {
            best = (x.abs(), i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_polynomials_exactly() {
        let g = Grid::new(vec![-1.0], vec![1.0], vec![9]).unwrap();
        // cubic is exact under the 4th-order stencil
        let f: Vec<f64> = (0..9).map(|i| {
            let x = g.coord_axis(0, i);
            x * x * x - 2.0 * x
        }).collect();
        let d = diff(&g, &f, 0);
        for i in 0..9 {
            let x = g.coord_axis(0, i);
            if (2..7).contains(&i) {
                assert!((d[i] - (3.0 * x * x - 2.0)).abs() < 1e-12);
            } else {
                assert!(d[i].is_nan());
            }
        }
    }

    #[test]
    fn short_axis_falls_back_to_second_order() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![3]).unwrap();
        let f = vec![0.0, 0.5, 1.0];
        let d = diff(&g, &f, 0);
        assert!(d[0].is_nan() && d[2].is_nan());
        assert!((d[1] - 1.0).abs() < 1e-12);
    }
}
