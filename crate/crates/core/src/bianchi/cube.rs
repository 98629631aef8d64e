//! Bianchi cubes: k scalar transforms of one seed generate 2^k vertices by
//! purely algebraic formulas. The cube Omega is assembled entrywise from the
//! scalar data; each vertex is the vectorial transform of the corresponding
//! sub-block, and sequential scalar chains must reproduce it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::dense;
use crate::geomgrid::field::{MatField, VecField};
use crate::geomgrid::frame::FrameSource;
use crate::geomgrid::grid::Grid;
use crate::geomgrid::principal::PrincipalData;
use crate::geomgrid::sweep::CoefficientProvider;
use crate::lagrangian::spec::{PTransformSpec, PVariant};
use crate::lagrangian::transform::apply_p_transform;
use crate::matrixeq::analyze_operator;
use crate::ribaucour::comb::{CombSystem, CombescureData};
use crate::ribaucour::omega::OmegaField;
use crate::ribaucour::transform::{
    apply_vectorial_ribaucour, transformed_principal_data, TransformBox, TransformOutput,
};
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubeVertex {
    pub subset: Vec<usize>,
    pub output: TransformOutput,
    pub data: PrincipalData,
    pub data_box: TransformBox,
}

#[derive(Debug, Clone)]
pub struct BianchiCube {
    pub k: usize,
    pub grid: Grid,
    /// L_i or P_i per scalar transform.
    pub values: Vec<f64>,
    /// Algebraic Omega over the grid.
    pub omega: MatField,
    /// The joined k-dimensional transform data.
    pub joint: CombescureData,
    /// Vertices keyed by subset bitmask (bit i = scalar transform i).
    pub vertices: BTreeMap<u32, CubeVertex>,
}

fn validate_scalars(scalars: &[CombescureData], expect: &[CombSystem]) -> Result<()> {
    if scalars.is_empty() {
        return Err(Error::Schema("a cube needs at least one scalar transform".into()));
    }
    let first = &scalars[0];
    for s in scalars {
        if s.k != 1 {
            return Err(Error::Schema("cube steps must be scalar (k = 1)".into()));
        }
        if !expect.contains(&s.system) {
            return Err(Error::NotCompatible(format!(
                "scalar system {:?} not usable for this cube",
                s.system
            )));
        }
        if s.system != first.system
            || s.grid != first.grid
            || s.c != first.c
            || s.c_tilde != first.c_tilde
            || s.n != first.n
            || s.p != first.p
        {
            return Err(Error::NotCompatible(
                "scalar transforms disagree on grid or seed parameters".into(),
            ));
        }
    }
    Ok(())
}

/// Commutation of the shape operators A_{beta_i}. All scalar data sets are
/// carried over one shared principal frame, where every A_beta is diagonal
/// with entries sum_r beta^r V_lr / v_l (or beta^l / v_l in the flat cases),
/// so the commutator is evaluated on those diagonal representations.
/// Directions with a degenerate metric coefficient carry no shape-operator
/// information and are skipped.
fn commutation_defect<S: CoefficientProvider + ?Sized>(
    scalars: &[CombescureData],
    seed: &S,
    tol: &Tolerances,
) -> f64 {
    let grid = &scalars[0].grid;
    let n = scalars[0].n;
    let curved = scalars[0].system == CombSystem::RStar;
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let diag = |s: &CombescureData, node: usize, l: usize, x: &[f64], vl: f64| -> f64 {
        if curved {
            let mut acc = 0.0;
            for (r, bf) in s.beta.iter().enumerate() {
                acc += bf.at(node)[0] * seed.v_big(x, l, r);
            }
            acc / vl
        } else {
            s.beta[l].at(node)[0] / vl
        }
    };
    let mut worst = 0.0_f64;
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut x);
        for a in 0..scalars.len() {
            for b in a + 1..scalars.len() {
                for l in 0..n {
                    let vl = seed.v(&x, l);
                    if vl.abs() < tol.v_min {
                        continue;
                    }
                    let da = diag(&scalars[a], node, l, &x, vl);
                    let db = diag(&scalars[b], node, l, &x, vl);
                    worst = worst.max((da * db - db * da).abs());
                }
            }
        }
    }
    worst
}

/// Join scalar data into a k-dimensional CombescureData with diagonal
/// operator.
fn join_scalars(scalars: &[CombescureData], values: &[f64]) -> CombescureData {
    let k = scalars.len();
    let first = &scalars[0];
    let grid = first.grid.clone();
    let len = grid.len();
    let mut phi = VecField::zeros(k, len);
    let mut gamma: Vec<VecField> = (0..first.n).map(|_| VecField::zeros(k, len)).collect();
    let mut beta: Vec<VecField> = (0..first.p).map(|_| VecField::zeros(k, len)).collect();
    for node in 0..len {
        for (j, s) in scalars.iter().enumerate() {
            phi.at_mut(node)[j] = s.phi.at(node)[0];
            for i in 0..first.n {
                gamma[i].at_mut(node)[j] = s.gamma[i].at(node)[0];
            }
            for r in 0..first.p {
                beta[r].at_mut(node)[j] = s.beta[r].at(node)[0];
            }
        }
    }
    let mut op = DMatrix::zeros(k, k);
    for (j, v) in values.iter().enumerate() {
        op[(j, j)] = *v;
    }
    CombescureData {
        grid,
        k,
        n: first.n,
        p: first.p,
        c: first.c,
        c_tilde: first.c_tilde,
        system: first.system,
        op,
        phi,
        gamma,
        beta,
    }
}

/// Extract the sub-block of a joined comb for a subset of indices.
pub fn subset_comb(joint: &CombescureData, subset: &[usize]) -> CombescureData {
    let k = subset.len();
    let len = joint.grid.len();
    let take = |f: &VecField| -> VecField {
        let mut out = VecField::zeros(k, len);
        for node in 0..len {
            let src = f.at(node);
            let dst = out.at_mut(node);
            for (new, &old) in subset.iter().enumerate() {
                dst[new] = src[old];
            }
        }
        out
    };
    let mut op = DMatrix::zeros(k, k);
    for (new_i, &old_i) in subset.iter().enumerate() {
        for (new_j, &old_j) in subset.iter().enumerate() {
            op[(new_i, new_j)] = joint.op[(old_i, old_j)];
        }
    }
    CombescureData {
        grid: joint.grid.clone(),
        k,
        n: joint.n,
        p: joint.p,
        c: joint.c,
        c_tilde: joint.c_tilde,
        system: joint.system,
        op,
        phi: take(&joint.phi),
        gamma: joint.gamma.iter().map(&take).collect(),
        beta: joint.beta.iter().map(&take).collect(),
    }
}

/// Extract the sub-block of the cube Omega field.
pub fn subset_omega(omega: &MatField, grid: &Grid, subset: &[usize]) -> OmegaField {
    let k = subset.len();
    let kk_old = omega.k;
    let len = grid.len();
    let mut out = MatField::zeros(k, len);
    let mut ratio = f64::INFINITY;
    for node in 0..len {
        let src = omega.at(node);
        let dst = out.at_mut(node);
        for (ni, &oi) in subset.iter().enumerate() {
            for (nj, &oj) in subset.iter().enumerate() {
                dst[ni * k + nj] = src[oi * kk_old + oj];
            }
        }
        ratio = ratio.min(dense::sv_ratio(dst, k));
    }
    let base = grid.center();
    let base_value = out.at(grid.flat(&base)).to_vec();
    OmegaField {
        grid: grid.clone(),
        k,
        omega: out,
        base_value,
        min_sv_ratio: ratio,
    }
}

fn enumerate_subsets(k: usize) -> Vec<u32> {
    (1u32..(1 << k)).collect()
}

fn subset_indices(mask: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|i| mask & (1 << i) != 0).collect()
}

/// Bianchi cube from scalar L-transform data; Omega entries are
/// (rho_ij - L_i <G_i, G_j>)/(L_j - L_i) off the diagonal and |G_i|^2/2 on it.
pub fn build_cube_l<F: FrameSource + ?Sized, S: CoefficientProvider + ?Sized>(
    scalars: &[CombescureData],
    frame: &F,
    seed: &S,
    tol: &Tolerances,
) -> Result<BianchiCube> {
    validate_scalars(scalars, &[CombSystem::R, CombSystem::RStar])?;
    let k = scalars.len();
    let values: Vec<f64> = scalars.iter().map(|s| s.op[(0, 0)]).collect();
    for i in 0..k {
        for j in i + 1..k {
            if (values[i] - values[j]).abs() <= 1e-12 {
                return Err(Error::DuplicateOperator(values[i]));
            }
        }
    }
    let cd = commutation_defect(scalars, seed, tol);
    if cd > 1e-8 {
        return Err(Error::NotCompatible(format!(
            "shape-operator commutation defect {cd:.3e}"
        )));
    }

    let joint = join_scalars(scalars, &values);
    let grid = joint.grid.clone();
    let len = grid.len();
    let dc = joint.c - joint.c_tilde;
    let mut omega = MatField::zeros(k, len);
    for node in 0..len {
        let out = omega.at_mut(node);
        for i in 0..k {
            for j in 0..k {
                let phi_i = scalars[i].phi.at(node)[0];
                let phi_j = scalars[j].phi.at(node)[0];
                let mut beta_ij = 0.0;
                let mut gdot = 0.0;
                for r in 0..joint.p {
                    beta_ij += scalars[i].beta[r].at(node)[0] * scalars[j].beta[r].at(node)[0];
                }
                for l in 0..joint.n {
                    gdot += scalars[i].gamma[l].at(node)[0] * scalars[j].gamma[l].at(node)[0];
                }
                gdot += beta_ij + joint.c_tilde * phi_i * phi_j;
                let rho_ij = beta_ij - dc * phi_i * phi_j;
                out[i * k + j] = if i == j {
                    0.5 * gdot
                } else {
                    (rho_ij - values[i] * gdot) / (values[j] - values[i])
                };
            }
        }
    }

    let mut vertices = BTreeMap::new();
    for mask in enumerate_subsets(k) {
        let subset = subset_indices(mask, k);
        let comb = subset_comb(&joint, &subset);
        let om = subset_omega(&omega, &grid, &subset);
        let output = apply_vectorial_ribaucour(frame, &comb, &om, true, tol)?;
        let (data, data_box) = transformed_principal_data(seed, &comb, &om, tol)?;
        vertices.insert(
            mask,
            CubeVertex {
                subset,
                output,
                data,
                data_box,
            },
        );
    }

    Ok(BianchiCube {
        k,
        grid,
        values,
        omega,
        joint,
        vertices,
    })
}

/// Bianchi cube from scalar P-transform data; Omega entries are
/// (1 + P_j^2) / (P_j (P_i + P_j)) * rho_ij with
/// rho_ij = P_i P_j (sum_l gamma^i_l gamma^j_l + c phi_i phi_j).
pub fn build_cube_p<F: FrameSource + ?Sized, S: CoefficientProvider + ?Sized>(
    scalars: &[CombescureData],
    frame: &F,
    seed: &S,
    tol: &Tolerances,
) -> Result<BianchiCube> {
    validate_scalars(scalars, &[CombSystem::PFlat, CombSystem::PHorizontal])?;
    let k = scalars.len();
    let values: Vec<f64> = scalars.iter().map(|s| s.op[(0, 0)]).collect();
    for i in 0..k {
        for j in i + 1..k {
            if (values[i] - values[j]).abs() <= 1e-12
                || (values[i] + values[j]).abs() <= 1e-12
            {
                return Err(Error::DuplicateOperator(values[i]));
            }
        }
    }
    // [d omega_i^t, d omega_j^t] = 0: the Codazzi tensors are diagonal on the
    // common principal frame, like the shape operators above.
    let cd = commutation_defect(scalars, seed, tol);
    if cd > 1e-8 {
        return Err(Error::NotCompatible(format!(
            "Codazzi commutation defect {cd:.3e}"
        )));
    }

    let joint = join_scalars(scalars, &values);
    let grid = joint.grid.clone();
    let len = grid.len();
    let c = joint.c;
    let mut omega = MatField::zeros(k, len);
    for node in 0..len {
        let out = omega.at_mut(node);
        for i in 0..k {
            for j in 0..k {
                let mut dot = 0.0;
                for l in 0..joint.n {
                    dot += scalars[i].gamma[l].at(node)[0] * scalars[j].gamma[l].at(node)[0];
                }
                if c != 0.0 {
                    dot += c * scalars[i].phi.at(node)[0] * scalars[j].phi.at(node)[0];
                }
                let rho_ij = values[i] * values[j] * dot;
                out[i * k + j] =
                    (1.0 + values[j] * values[j]) / (values[j] * (values[i] + values[j])) * rho_ij;
            }
        }
    }

    let horizontal = joint.system == CombSystem::PHorizontal;
    let mut vertices = BTreeMap::new();
    for mask in enumerate_subsets(k) {
        let subset = subset_indices(mask, k);
        let comb = subset_comb(&joint, &subset);
        let om = subset_omega(&omega, &grid, &subset);
        let mut pm = DMatrix::zeros(subset.len(), subset.len());
        for (new, &old) in subset.iter().enumerate() {
            pm[(new, new)] = values[old];
        }
        let spec = PTransformSpec {
            p: analyze_operator(pm)?,
            variant: if horizontal {
                PVariant::Horizontal
            } else {
                PVariant::FlatLagrangian
            },
            c: if horizontal { c } else { 0.0 },
            init_phi: vec![0.0; subset.len()],
            init_gamma: vec![vec![0.0; subset.len()]; joint.n],
        };
        let (output, data, data_box) =
            apply_p_transform(frame, seed, &comb, &om, &spec, true, tol)?;
        vertices.insert(
            mask,
            CubeVertex {
                subset,
                output,
                data,
                data_box,
            },
        );
    }

    Ok(BianchiCube {
        k,
        grid,
        values,
        omega,
        joint,
        vertices,
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (pos, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Max gap between every vertex computed through every scalar chain and the
/// algebraic vertex formula, over the vertex's valid box. Nodes where a chain
/// pivot degenerates are skipped (they are reported in the count).
pub fn path_independence_defect<F: FrameSource + ?Sized>(
    cube: &BianchiCube,
    frame: &F,
    tol: &Tolerances,
) -> Result<(f64, usize)> {
    let grid = &cube.grid;
    let k = cube.k;
    let nd = frame.ambient_dim();
    let len = grid.len();

    // ambient G columns of every scalar transform
    let mut gcols: Vec<VecField> = Vec::with_capacity(k);
    let mut x = vec![0.0; grid.n()];
    let mut multi = vec![0usize; grid.n()];
    let mut buf = vec![0.0; nd];
    for j in 0..k {
        let mut gf = VecField::zeros(nd, len);
        for node in 0..len {
            grid.multi(node, &mut multi);
            grid.coords(&multi, &mut x);
            let out = gf.at_mut(node);
            for (i, gamf) in cube.joint.gamma.iter().enumerate() {
                let coeff = gamf.at(node)[j];
                if coeff != 0.0 {
                    frame.tangent(node, &x, i, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
            for (r, betf) in cube.joint.beta.iter().enumerate() {
                let coeff = betf.at(node)[j];
                if coeff != 0.0 {
                    frame.normal_at(node, &x, r, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
            if cube.joint.c_tilde != 0.0 {
                let coeff = cube.joint.c_tilde * cube.joint.phi.at(node)[j];
                if coeff != 0.0 {
                    frame.position(node, &x, &mut buf);
                    for m in 0..nd {
                        out[m] += coeff * buf[m];
                    }
                }
            }
        }
        gcols.push(gf);
    }

    let mut worst = 0.0_f64;
    let mut skipped = 0usize;
    for (mask, vertex) in &cube.vertices {
        let subset = subset_indices(*mask, k);
        if subset.len() < 2 {
            continue;
        }
        for order in permutations(&subset) {
            // Schur-eliminate one scalar index at a time, per node of the
            // vertex box.
            for (sub_node, &node) in vertex.output.index_map.iter().enumerate() {
                grid.multi(node, &mut multi);
                grid.coords(&multi, &mut x);
                // local copies
                let m = subset.len();
                let mut om = vec![0.0; m * m];
                for (ni, &oi) in subset.iter().enumerate() {
                    for (nj, &oj) in subset.iter().enumerate() {
                        om[ni * m + nj] = cube.omega.at(node)[oi * k + oj];
                    }
                }
                let mut phi: Vec<f64> = subset
                    .iter()
                    .map(|&j| cube.joint.phi.at(node)[j])
                    .collect();
                let mut g: Vec<Vec<f64>> = subset
                    .iter()
                    .map(|&j| gcols[j].at(node).to_vec())
                    .collect();
                frame.position(node, &x, &mut buf);
                let mut f_cur = buf.clone();
                let mut active: Vec<usize> = subset.clone();
                let mut ok = true;
                for &elim in &order {
                    let pos = active.iter().position(|&a| a == elim).unwrap();
                    let mm = active.len();
                    let pivot = om[pos * mm + pos];
                    let scale = om.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
                    if pivot.abs() < tol.invert_ratio.max(1e-13) * scale.max(1.0) {
                        ok = false;
                        break;
                    }
                    let w = phi[pos] / pivot;
                    for mcomp in 0..nd {
                        f_cur[mcomp] -= w * g[pos][mcomp];
                    }
                    // Schur update of the remaining block
                    let mut new_om = Vec::with_capacity((mm - 1) * (mm - 1));
                    let mut new_phi = Vec::with_capacity(mm - 1);
                    let mut new_g = Vec::with_capacity(mm - 1);
                    for i2 in 0..mm {
                        if i2 == pos {
                            continue;
                        }
                        new_phi.push(phi[i2] - om[i2 * mm + pos] * phi[pos] / pivot);
                        let coef = om[pos * mm + i2] / pivot;
                        let mut gi = g[i2].clone();
                        for mcomp in 0..nd {
                            gi[mcomp] -= coef * g[pos][mcomp];
                        }
                        new_g.push(gi);
                        for j2 in 0..mm {
                            if j2 == pos {
                                continue;
                            }
                            new_om
                                .push(om[i2 * mm + j2] - om[i2 * mm + pos] * om[pos * mm + j2] / pivot);
                        }
                    }
                    om = new_om;
                    phi = new_phi;
                    g = new_g;
                    active.remove(pos);
                }
                if !ok {
                    skipped += 1;
                    continue;
                }
                for (a, b) in f_cur.iter().zip(vertex.output.field.f.at(sub_node)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok((worst, skipped))
}

/// Diagonal identity of the cube Omega: Omega_ii = |G_i|^2 / 2.
pub fn omega_diagonal_defect(cube: &BianchiCube) -> f64 {
    let k = cube.k;
    let mut worst = 0.0_f64;
    for node in cube.grid.iter_flat() {
        for i in 0..k {
            let mut g2 = 0.0;
            for gf in &cube.joint.gamma {
                let v = gf.at(node)[i];
                g2 += v * v;
            }
            for bf in &cube.joint.beta {
                let v = bf.at(node)[i];
                g2 += v * v;
            }
            if cube.joint.c_tilde != 0.0 {
                let v = cube.joint.phi.at(node)[i];
                g2 += cube.joint.c_tilde * v * v;
            }
            worst = worst.max((cube.omega.at(node)[i * k + i] - 0.5 * g2).abs());
        }
    }
    worst
}
