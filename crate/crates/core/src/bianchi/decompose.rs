//! Decomposition of a vectorial transform into two steps along a splitting
//! V = V_1 + V_2 of the transform space, for block-diagonal operators.

use crate::dense::LuSolver;
use crate::geomgrid::field::{MatField, VecField};
use crate::geomgrid::frame::FrameSource;
use crate::geomgrid::grid::Grid;
use crate::ribaucour::comb::CombescureData;
use crate::ribaucour::omega::OmegaField;
use crate::{Error, Result};

/// The second ("bar") step of a decomposition, expressed directly through the
/// remaining phi components, the updated ambient Combescure columns and the
/// Schur complement of Omega. Applying it to the first step's output
/// reproduces the full transform.
#[derive(Debug, Clone)]
pub struct BarData {
    pub grid: Grid,
    pub k: usize,
    pub ambient_dim: usize,
    pub phi: VecField,
    /// Ambient columns G-bar_i.
    pub g: Vec<VecField>,
    pub omega: MatField,
}

impl BarData {
    /// f_full = f_first - G-bar (Omega-bar)^{-1} phi-bar at every node of the
    /// given positions field. Positions must live on the same grid.
    pub fn apply(&self, first: &VecField) -> Result<VecField> {
        let len = self.grid.len();
        if first.nodes() != len {
            return Err(Error::Dimension("position field lives on another grid".into()));
        }
        let nd = self.ambient_dim;
        let mut out = VecField::zeros(nd, len);
        let mut lu = LuSolver::new(self.k);
        let mut w = vec![0.0; self.k];
        for node in 0..len {
            if !lu.factor(self.omega.at(node)) {
                return Err(Error::SingularOmega(
                    "bar-step Omega singular at a node".into(),
                ));
            }
            w.copy_from_slice(self.phi.at(node));
            lu.solve_in_place(&mut w);
            let dst = out.at_mut(node);
            dst.copy_from_slice(first.at(node));
            for (j, gf) in self.g.iter().enumerate() {
                let coeff = w[j];
                for (d, gv) in dst.iter_mut().zip(gf.at(node)) {
                    *d -= coeff * gv;
                }
            }
        }
        Ok(out)
    }
}

/// Split a transform into the V1-step and the bar data for V2 relative to the
/// V1 output. The operator must be block-diagonal for the split.
pub fn decompose_transform(
    comb: &CombescureData,
    omega: &OmegaField,
    split: (&[usize], &[usize]),
    frame: &(impl FrameSource + ?Sized),
) -> Result<((CombescureData, OmegaField), BarData)> {
    let (first, second) = split;
    let k = comb.k;
    if first.len() + second.len() != k {
        return Err(Error::SplitMismatch("split does not cover the space".into()));
    }
    let mut seen = vec![false; k];
    for &i in first.iter().chain(second) {
        if i >= k || seen[i] {
            return Err(Error::SplitMismatch("split indices invalid".into()));
        }
        seen[i] = true;
    }
    for &i in first {
        for &j in second {
            if comb.op[(i, j)].abs() > 1e-12 || comb.op[(j, i)].abs() > 1e-12 {
                return Err(Error::SplitMismatch(format!(
                    "operator couples indices {i} and {j}"
                )));
            }
        }
    }
    if second.is_empty() {
        // trivial split: the first step is the whole transform
        let step = (
            crate::bianchi::cube::subset_comb(comb, first),
            crate::bianchi::cube::subset_omega(&omega.omega, &comb.grid, first),
        );
        let bar = BarData {
            grid: comb.grid.clone(),
            k: 0,
            ambient_dim: frame.ambient_dim(),
            phi: VecField::zeros(0, comb.grid.len()),
            g: Vec::new(),
            omega: MatField::zeros(0, comb.grid.len()),
        };
        return Ok((step, bar));
    }

    let step_comb = crate::bianchi::cube::subset_comb(comb, first);
    let step_omega = crate::bianchi::cube::subset_omega(&omega.omega, &comb.grid, first);

    // bar data for the second block relative to the first step's output:
    // phi-bar = phi_2 - Omega_21 Omega_11^{-1} phi_1
    // G-bar   = G_2 - G_1 Omega_11^{-1} Omega_12
    // Omega-bar = Omega_22 - Omega_21 Omega_11^{-1} Omega_12
    let grid = &comb.grid;
    let len = grid.len();
    let nd = frame.ambient_dim();
    let k1 = first.len();
    let k2 = second.len();
    let mut lu = LuSolver::new(k1);
    let mut phi_bar = VecField::zeros(k2, len);
    let mut om_bar = MatField::zeros(k2, len);
    let mut gbar: Vec<VecField> = (0..k2).map(|_| VecField::zeros(nd, len)).collect();

    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let mut buf = vec![0.0; nd];
    let mut gcol = vec![0.0; nd];
    let mut w = vec![0.0; k1];

    // ambient G columns of the full transform
    let mut gcols: Vec<VecField> = (0..k).map(|_| VecField::zeros(nd, len)).collect();
    for node in 0..len {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut x);
        for (j, gf) in gcols.iter_mut().enumerate() {
            let out = gf.at_mut(node);
            for (i, gamf) in comb.gamma.iter().enumerate() {
                let coeff = gamf.at(node)[j];
                if coeff != 0.0 {
                    frame.tangent(node, &x, i, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
            for (r, betf) in comb.beta.iter().enumerate() {
                let coeff = betf.at(node)[j];
                if coeff != 0.0 {
                    frame.normal_at(node, &x, r, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
            if comb.c_tilde != 0.0 {
                let coeff = comb.c_tilde * comb.phi.at(node)[j];
                if coeff != 0.0 {
                    frame.position(node, &x, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
        }
    }

    for node in 0..len {
        let om = omega.omega.at(node);
        // Omega_11 block
        let mut o11 = vec![0.0; k1 * k1];
        for (ni, &oi) in first.iter().enumerate() {
            for (nj, &oj) in first.iter().enumerate() {
                o11[ni * k1 + nj] = om[oi * k + oj];
            }
        }
        if !lu.factor(&o11) {
            return Err(Error::SingularOmega(
                "first-step Omega block singular".into(),
            ));
        }
        // w = Omega_11^{-1} phi_1
        for (ni, &oi) in first.iter().enumerate() {
            w[ni] = comb.phi.at(node)[oi];
        }
        lu.solve_in_place(&mut w);
        for (ni2, &oi2) in second.iter().enumerate() {
            let mut val = comb.phi.at(node)[oi2];
            for (nj, &oj) in first.iter().enumerate() {
                val -= om[oi2 * k + oj] * w[nj];
            }
            phi_bar.at_mut(node)[ni2] = val;
        }
        // columns: for each second index j: Omega_11^{-1} Omega_{1, j}
        for (nj2, &oj2) in second.iter().enumerate() {
            let mut col = vec![0.0; k1];
            for (ni, &oi) in first.iter().enumerate() {
                col[ni] = om[oi * k + oj2];
            }
            lu.solve_in_place(&mut col);
            // G-bar_j = G_j - sum_i G_i col_i
            gcol.copy_from_slice(gcols[oj2].at(node));
            for (ni, &oi) in first.iter().enumerate() {
                let coeff = col[ni];
                if coeff != 0.0 {
                    let gi = gcols[oi].at(node);
                    for m in 0..nd {
                        gcol[m] -= coeff * gi[m];
                    }
                }
            }
            gbar[nj2].at_mut(node).copy_from_slice(&gcol);
            // Omega-bar column
            for (ni2, &oi2) in second.iter().enumerate() {
                let mut val = om[oi2 * k + oj2];
                for (nl, &ol) in first.iter().enumerate() {
                    val -= om[oi2 * k + ol] * col[nl];
                }
                om_bar.at_mut(node)[ni2 * k2 + nj2] = val;
            }
        }
    }
    Ok((
        (step_comb, step_omega),
        BarData {
            grid: grid.clone(),
            k: k2,
            ambient_dim: nd,
            phi: phi_bar,
            g: gbar,
            omega: om_bar,
        },
    ))
}
