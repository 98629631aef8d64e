use std::time::Instant;
use nalgebra::DMatrix;
use ribaucour_core::geomgrid::Grid;
use ribaucour_core::lagrangian::{integrate_system_p, omega_from_lyapunov, PTransformSpec, PVariant};
use ribaucour_core::matrixeq::analyze_operator;
use ribaucour_core::ribaucour::apply_vectorial_ribaucour;
use ribaucour_core::vacuum::{scalar_p_closed_form_at, VacuumCoeffs, VacuumFrameTable};
use ribaucour_core::Tolerances;

fn main() {
    let n = 3;
    let p = 1.0;
    let grid = Grid::centered(n, 1.0, 1e-2).unwrap();
    let tol = Tolerances::default();
    let seed = VacuumCoeffs { n };
    let frame = VacuumFrameTable::new(n, &grid);
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[p])).unwrap(),
        variant: PVariant::FlatLagrangian,
        c: 0.0,
        init_phi: vec![-p],
        init_gamma: vec![vec![1.0]; n],
    };
    let t = Instant::now();
    let comb = integrate_system_p(&seed, &grid, &grid.center(), &spec, &[0,1,2], &tol).unwrap();
    println!("integrate: {:?}", t.elapsed());
    let t = Instant::now();
    let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
    println!("omega: {:?}", t.elapsed());
    let t = Instant::now();
    let out = apply_vectorial_ribaucour(&frame, &comb, &omega, false, &tol).unwrap();
    println!("apply: {:?}", t.elapsed());
    let t = Instant::now();
    let mut worst = 0.0_f64;
    let mut u = vec![0.0; n];
    let mut multi = vec![0usize; n];
    let mut oracle = vec![0.0; 2 * n];
    for (sub, &node) in out.index_map.iter().enumerate() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        scalar_p_closed_form_at(p, &u, &mut oracle);
        for (a, b) in out.field.f.at(sub).iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    println!("compare: {:?}  gap {worst:.3e}", t.elapsed());
}
