//! Uniform principal-coordinate grids.

use crate::{Error, Result};

/// Uniform tensor grid on a box [lo_1, hi_1] x ... x [lo_n, hi_n].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    steps: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, steps: Vec<usize>) -> Result<Self> {
        let n = lo.len();
        if n == 0 || hi.len() != n || steps.len() != n {
            return Err(Error::Grid("lo/hi/steps must share a nonzero length".into()));
        }
        for a in 0..n {
            if steps[a] < 3 {
                return Err(Error::Grid(format!("axis {a}: need at least 3 nodes")));
            }
            if !(hi[a] > lo[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::Grid(format!("axis {a}: invalid bounds")));
            }
        }
        let spacing: Vec<f64> = (0..n).map(|a| (hi[a] - lo[a]) / (steps[a] - 1) as f64).collect();
        let mut strides = vec![0usize; n];
        let mut acc = 1usize;
        for a in (0..n).rev() {
            strides[a] = acc;
            acc = acc
                .checked_mul(steps[a])
                .ok_or_else(|| Error::Grid("grid too large".into()))?;
        }
        Ok(Grid {
            lo,
            hi,
            steps,
            spacing,
            strides,
            len: acc,
        })
    }

    /// Symmetric box [-half, half]^n with the given spacing.
    pub fn centered(n: usize, half: f64, spacing: f64) -> Result<Self> {
        let steps = (2.0 * half / spacing).round() as usize + 1;
        Grid::new(vec![-half; n], vec![half; n], vec![steps; n])
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn coord_axis(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + self.spacing[axis] * i as f64
    }

    pub fn coords(&self, multi: &[usize], out: &mut [f64]) {
        for a in 0..self.n() {
            out[a] = self.coord_axis(a, multi[a]);
        }
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi(&self, mut flat: usize, out: &mut [usize]) {
        for a in 0..self.n() {
            out[a] = flat / self.strides[a];
            flat %= self.strides[a];
        }
    }

    /// Default base node: the lattice center.
    pub fn center(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s / 2).collect()
    }

    /// Restriction to the box [lo_idx, hi_idx] (inclusive node ranges).
    pub fn restrict(&self, lo_idx: &[usize], hi_idx: &[usize]) -> Result<Grid> {
        let n = self.n();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        let mut steps = Vec::with_capacity(n);
        for a in 0..n {
            if hi_idx[a] >= self.steps[a] || lo_idx[a] > hi_idx[a] {
                return Err(Error::Grid(format!("axis {a}: bad restriction range")));
            }
            lo.push(self.coord_axis(a, lo_idx[a]));
            hi.push(self.coord_axis(a, hi_idx[a]));
            steps.push(hi_idx[a] - lo_idx[a] + 1);
        }
        Grid::new(lo, hi, steps)
    }

    /// Iterate all flat indices (row-major, last axis fastest).
    pub fn iter_flat(&self) -> std::ops::Range<usize> {
        0..self.len
    }

    /// Visit every node of the sub-box where the axes in `fixed` are pinned.
    pub fn for_each_in_slab(
        &self,
        fixed: &[(usize, usize)], // (axis, index)
        mut visit: impl FnMut(&[usize]),
    ) {
        let n = self.n();
        let mut multi = vec![0usize; n];
        let free: Vec<usize> = (0..n)
            .filter(|a| fixed.iter().all(|(fa, _)| fa != a))
            .collect();
        for &(a, i) in fixed {
            multi[a] = i;
        }
        let mut counters = vec![0usize; free.len()];
        loop {
            for (ci, &a) in free.iter().enumerate() {
                multi[a] = counters[ci];
            }
            visit(&multi);
            // odometer increment
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                counters[pos] += 1;
                if counters[pos] < self.steps[free[pos]] {
                    break;
                }
                counters[pos] = 0;
                if pos == 0 {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = Grid::new(vec![-1.0, 0.0], vec![1.0, 2.0], vec![5, 3]).unwrap();
        assert_eq!(g.len(), 15);
        let mut multi = [0usize; 2];
        for flat in g.iter_flat() {
            g.multi(flat, &mut multi);
            assert_eq!(g.flat(&multi), flat);
        }
        assert_eq!(g.spacing(), &[0.5, 1.0]);
        assert_eq!(g.coord_axis(0, 2), 0.0);
    }

    #[test]
    fn centered_grid_has_expected_node_count() {
        let g = Grid::centered(2, 1.0, 0.01).unwrap();
        assert_eq!(g.steps(), &[201, 201]);
        assert_eq!(g.center(), vec![100, 100]);
        assert!((g.coord_axis(0, 100)).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_axes() {
        assert!(Grid::new(vec![0.0], vec![1.0], vec![2]).is_err());
    }
}

impl Grid {
    /// Restriction plus the parent flat index of every node of the sub-grid,
    /// in the sub-grid's row-major order.
    pub fn restriction_map(
        &self,
        lo_idx: &[usize],
        hi_idx: &[usize],
    ) -> crate::Result<(Grid, Vec<usize>)> {
        let sub = self.restrict(lo_idx, hi_idx)?;
        let n = self.n();
        let mut map = Vec::with_capacity(sub.len());
        let mut parent: Vec<usize> = lo_idx.to_vec();
        let mut flat = self.flat(&parent);
        loop {
            map.push(flat);
            // odometer over the sub-box, updating the parent flat index
            let mut a = n;
            loop {
                if a == 0 {
                    return Ok((sub, map));
                }
                a -= 1;
                if parent[a] < hi_idx[a] {
                    parent[a] += 1;
                    flat += self.strides[a];
                    break;
                }
                flat -= (parent[a] - lo_idx[a]) * self.strides[a];
                parent[a] = lo_idx[a];
                if a == 0 {
                    return Ok((sub, map));
                }
            }
        }
    }

    /// Largest axis-aligned box around `base` on which `valid` holds, grown
    /// face by face (round-robin) while every node in the candidate slab is
    /// valid. Returns inclusive index ranges, or None when the base node
    /// itself is invalid.
    pub fn largest_valid_box(
        &self,
        base: &[usize],
        valid: &[bool],
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        if !valid[self.flat(base)] {
            return None;
        }
        let n = self.n();
        let mut lo = base.to_vec();
        let mut hi = base.to_vec();
        let slab_ok = |lo: &[usize], hi: &[usize]| -> bool {
            // checks the whole box; cheap enough at desk scale and simple
            let mut ok = true;
            self.for_each_in_box(lo, hi, &mut |flat| {
                if !valid[flat] {
                    ok = false;
                }
            });
            ok
        };
        let mut grew = true;
        while grew {
            grew = false;
            for a in 0..n {
                if lo[a] > 0 {
                    let mut nlo = lo.clone();
                    nlo[a] -= 1;
                    let mut nhi = hi.clone();
                    nhi[a] = nlo[a];
                    if slab_ok(&nlo, &nhi) {
                        lo[a] -= 1;
                        grew = true;
                    }
                }
                if hi[a] + 1 < self.steps()[a] {
                    let mut nlo = lo.clone();
                    nlo[a] = hi[a] + 1;
                    let mut nhi = hi.clone();
                    nhi[a] += 1;
                    if slab_ok(&nlo, &nhi) {
                        hi[a] += 1;
                        grew = true;
                    }
                }
            }
        }
        Some((lo, hi))
    }

    /// Visit the flat index of every node in the inclusive box [lo, hi].
    pub fn for_each_in_box(&self, lo: &[usize], hi: &[usize], visit: &mut dyn FnMut(usize)) {
        let n = self.n();
        let mut multi = lo.to_vec();
        loop {
            visit(self.flat(&multi));
            let mut a = n;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                multi[a] += 1;
                if multi[a] <= hi[a] {
                    break;
                }
                multi[a] = lo[a];
                if a == 0 {
                    return;
                }
            }
        }
    }
}

/// Pick a box anchor: the base node when valid, otherwise the valid node
/// with the best score. Returns None when nothing is valid.
pub fn choose_anchor(
    grid: &Grid,
    base: &[usize],
    valid: &[bool],
    score: impl Fn(usize) -> f64,
) -> Option<Vec<usize>> {
    if valid[grid.flat(base)] {
        return Some(base.to_vec());
    }
    let mut best: Option<(f64, usize)> = None;
    for flat in grid.iter_flat() {
        if valid[flat] {
            let s = score(flat);
            if best.map_or(true, |(bs, _)| s > bs) {
                best = Some((s, flat));
            }
        }
    }
    best.map(|(_, flat)| {
        let mut multi = vec![0usize; grid.n()];
        grid.multi(flat, &mut multi);
        multi
    })
}
