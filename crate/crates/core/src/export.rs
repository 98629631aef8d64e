//! Text export of grid fields: CSV (one row per node, row-major node order,
//! 17 significant digits), JSON, and OBJ meshes for n = 2 immersions.

use std::fmt::Write as _;

use crate::geomgrid::field::{ScalarField, VecField};
use crate::geomgrid::frame::ImmersionField;
use crate::geomgrid::grid::Grid;
use crate::{Error, Result};

fn fmt_val(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with coordinates first, then the named scalar columns.
pub fn scalar_fields_csv(grid: &Grid, fields: &[(&str, &ScalarField)]) -> String {
    let n = grid.n();
    let mut out = String::new();
    for a in 0..n {
        let _ = write!(out, "u{},", a + 1);
    }
    out.push_str(
        &fields
            .iter()
            .map(|(name, _)| name.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    let mut multi = vec![0usize; n];
    let mut coords = vec![0.0; n];
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut coords);
        let mut row: Vec<String> = coords.iter().map(|c| fmt_val(*c)).collect();
        for (_, f) in fields {
            row.push(fmt_val(f.0[node]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// CSV of a vector field: coordinates then the per-node components
/// (`prefix_0`, `prefix_1`, ...); complex ambients are interleaved real.
pub fn vec_field_csv(grid: &Grid, prefix: &str, field: &VecField) -> String {
    let n = grid.n();
    let mut out = String::new();
    for a in 0..n {
        let _ = write!(out, "u{},", a + 1);
    }
    out.push_str(
        &(0..field.k)
            .map(|c| format!("{prefix}_{c}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    let mut multi = vec![0usize; n];
    let mut coords = vec![0.0; n];
    for node in grid.iter_flat() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut coords);
        let mut row: Vec<String> = coords.iter().map(|c| fmt_val(*c)).collect();
        for c in field.at(node) {
            row.push(fmt_val(*c));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// JSON with the grid description and named columns.
pub fn fields_json(grid: &Grid, fields: &[(&str, &ScalarField)]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert(
        "grid".into(),
        serde_json::json!({
            "lo": grid.lo(),
            "hi": grid.hi(),
            "steps": grid.steps(),
        }),
    );
    let mut cols = serde_json::Map::new();
    for (name, f) in fields {
        cols.insert((*name).into(), serde_json::json!(f.0));
    }
    map.insert("fields".into(), serde_json::Value::Object(cols));
    serde_json::Value::Object(map)
}

/// OBJ surface mesh of an n = 2 immersion: one vertex per node (the three
/// ambient coordinates selected by `axes`), quad faces between neighbors.
pub fn immersion_obj(field: &ImmersionField, axes: &[usize; 3]) -> Result<String> {
    let grid = &field.grid;
    if grid.n() != 2 {
        return Err(Error::Schema("OBJ export needs a 2-dimensional grid".into()));
    }
    if axes.iter().any(|a| *a >= field.ambient_dim) {
        return Err(Error::Schema("OBJ axis selection out of range".into()));
    }
    let (s0, s1) = (grid.steps()[0], grid.steps()[1]);
    let mut out = String::with_capacity(grid.len() * 40);
    for node in grid.iter_flat() {
        let f = field.f.at(node);
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_val(f[axes[0]]),
            fmt_val(f[axes[1]]),
            fmt_val(f[axes[2]])
        );
    }
    for i in 0..s0 - 1 {
        for j in 0..s1 - 1 {
            let a = i * s1 + j + 1;
            let b = i * s1 + j + 2;
            let c = (i + 1) * s1 + j + 2;
            let d = (i + 1) * s1 + j + 1;
            let _ = writeln!(out, "f {a} {b} {c} {d}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_one_row_per_node_and_deterministic_digits() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![3]).unwrap();
        let f = ScalarField(vec![1.0, 0.5, 1.0 / 3.0]);
        let csv = scalar_fields_csv(&g, &[("v1", &f)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "u1,v1");
        assert!(lines[3].contains("3.3333333333333331e-1"));
    }

    #[test]
    fn obj_counts() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 4]).unwrap();
        let field = ImmersionField {
            grid: g.clone(),
            n: 2,
            ambient_dim: 4,
            ambient_curv: 0.0,
            complex_structure: true,
            f: VecField::zeros(4, g.len()),
            x: Vec::new(),
            xi: Vec::new(),
        };
        let obj = immersion_obj(&field, &[0, 1, 2]).unwrap();
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(verts, 12);
        assert_eq!(faces, 6);
    }
}
