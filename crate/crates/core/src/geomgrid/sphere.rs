//! Containment of flat Lagrangian data in the unit sphere:
//! sum_i v_i^2 = 1 on the data side, |f|^2 = 1 on the immersion side.

use super::frame::ImmersionField;
use super::principal::PrincipalData;

/// max over nodes of |sum_i v_i^2 - 1|.
pub fn sphere_deviation_data(data: &PrincipalData) -> f64 {
    let len = data.grid.len();
    let mut worst = 0.0_f64;
    for idx in 0..len {
        let s: f64 = data.v.iter().map(|f| f.0[idx] * f.0[idx]).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}

/// max over nodes of | |f|^2 - 1 |.
pub fn sphere_deviation_field(field: &ImmersionField) -> f64 {
    let mut worst = 0.0_f64;
    for node in 0..field.grid.len() {
        let f = field.f.at(node);
        let s: f64 = f.iter().map(|x| x * x).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}
