//! End-to-end checks of the L-route: systems R and R*, Omega, the vectorial
//! transform, transformed data and the inverse.

use nalgebra::DMatrix;

use ribaucour_core::fixtures::{curved_seed, CurvedCoeffs};
use ribaucour_core::geomgrid::{residual_system, Grid, ImmersionField};
use ribaucour_core::matrixeq::{analyze_operator, generate_admissible_triple};
use ribaucour_core::ribaucour::{
    apply_vectorial_ribaucour, integrate_omega, integrate_system_r, integrate_system_rstar,
    inverse_transform_data, omega_base_value, omega_invariants, residual_comb,
    transformed_principal_data, CombInit, CombSystem, CombescureData,
};
use ribaucour_core::vacuum::{vacuum_seed, VacuumCoeffs};
use ribaucour_core::Tolerances;

fn grid2(half: f64, spacing: f64) -> Grid {
    Grid::centered(2, half, spacing).unwrap()
}

fn max_field_gap(a: &ImmersionField, b: &ImmersionField) -> f64 {
    assert_eq!(a.grid.len(), b.grid.len());
    let mut worst = 0.0_f64;
    for node in 0..a.grid.len() {
        for (x, y) in a.f.at(node).iter().zip(b.f.at(node)) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

#[test]
fn system_r_zero_init_stays_zero() {
    let g = grid2(0.5, 0.05);
    let seed = VacuumCoeffs { n: 2 };
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let init = CombInit {
        phi0: vec![0.0],
        gamma0: vec![vec![0.0], vec![0.0]],
        beta0: vec![vec![0.0], vec![0.0]],
    };
    let comb =
        integrate_system_r(&seed, &g, &g.center(), &l, &init, &[0, 1], &Tolerances::default())
            .unwrap();
    assert_eq!(comb.phi.data.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 0.0);
    for gf in &comb.gamma {
        assert_eq!(gf.data.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 0.0);
    }
}

/// Scalar L on the vacuum: per axis the system decouples into
/// gamma' = -((1/L) - 1) beta, beta' = -gamma, solvable in closed form.
#[test]
fn system_r_matches_the_constant_coefficient_solution() {
    let g = grid2(1.0, 0.01);
    let seed = VacuumCoeffs { n: 2 };
    let lval = 0.5;
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[lval])).unwrap();
    let (g0, b0) = (0.7, -0.3);
    let init = CombInit {
        phi0: vec![0.2],
        gamma0: vec![vec![g0], vec![g0]],
        beta0: vec![vec![b0], vec![b0]],
    };
    let comb =
        integrate_system_r(&seed, &g, &g.center(), &l, &init, &[0, 1], &Tolerances::default())
            .unwrap();

    // mu^2 = (1/L - 1) = 1; gamma = A e^u + B e^{-u}, beta = -gamma'
    let a = 0.5 * (g0 - b0);
    let b = 0.5 * (g0 + b0);
    let gamma_exact = |u: f64| a * u.exp() + b * (-u).exp();
    let beta_exact = |u: f64| -a * u.exp() + b * (-u).exp();
    let phi_exact = |u: f64| 0.2 + a * (u.exp() - 1.0) - b * ((-u).exp() - 1.0);

    let mut worst = 0.0_f64;
    let mut multi = [0usize; 2];
    for node in g.iter_flat() {
        g.multi(node, &mut multi);
        let (u0, u1) = (g.coord_axis(0, multi[0]), g.coord_axis(1, multi[1]));
        worst = worst.max((comb.gamma[0].at(node)[0] - gamma_exact(u0)).abs());
        worst = worst.max((comb.beta[0].at(node)[0] - beta_exact(u0)).abs());
        worst = worst.max((comb.gamma[1].at(node)[0] - gamma_exact(u1)).abs());
        worst = worst.max((comb.beta[1].at(node)[0] - beta_exact(u1)).abs());
        worst = worst.max((comb.phi.at(node)[0] - phi_exact(u0)).abs());
    }
    assert!(worst < 1e-8, "closed-form gap {worst}");

    let rep = residual_comb(&comb, &seed);
    assert!(rep.max() < 1e-7, "comb residual {}", rep.max());
}

#[test]
fn system_rstar_zero_init_and_fixture() {
    let g = grid2(1.0, 0.01);
    let seed = CurvedCoeffs { n: 2 };
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let tol = Tolerances::default();
    let zero = CombInit {
        phi0: vec![0.0],
        gamma0: vec![vec![0.0], vec![0.0]],
        beta0: vec![vec![0.0]],
    };
    let comb = integrate_system_rstar(&seed, &g, &g.center(), &l, &zero, &[0, 1], &tol).unwrap();
    assert_eq!(comb.phi.data.iter().fold(0.0_f64, |m, x| m.max(x.abs())), 0.0);

    // constant-coefficient fixture along axis 1 (V_21 = 1):
    // gamma_2' = -((1/L)-1) beta^1 = -beta^1, beta^1' = -gamma_2
    let init = CombInit {
        phi0: vec![0.1],
        gamma0: vec![vec![0.4], vec![0.6]],
        beta0: vec![vec![-0.2]],
    };
    let comb = integrate_system_rstar(&seed, &g, &g.center(), &l, &init, &[0, 1], &tol).unwrap();
    let a = 0.5 * (0.6 - (-0.2));
    let b = 0.5 * (0.6 + (-0.2));
    let mut worst = 0.0_f64;
    let mut multi = [0usize; 2];
    for node in g.iter_flat() {
        g.multi(node, &mut multi);
        if multi[0] != g.center()[0] {
            continue; // the closed form below is for the axis-1 line through the base
        }
        let u1 = g.coord_axis(1, multi[1]);
        let gamma2 = a * u1.exp() + b * (-u1).exp();
        let beta1 = -a * u1.exp() + b * (-u1).exp();
        worst = worst.max((comb.gamma[1].at(node)[0] - gamma2).abs());
        worst = worst.max((comb.beta[0].at(node)[0] - beta1).abs());
    }
    assert!(worst < 1e-8, "fixture gap {worst}");

    let rep = residual_comb(&comb, &seed);
    assert!(rep.max() < 1e-7, "comb residual {}", rep.max());
}

#[test]
fn sweep_order_changes_nothing_measurable() {
    // compatibility of system R* across sweep orders
    let g = grid2(0.5, 0.01);
    let seed = CurvedCoeffs { n: 2 };
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let tol = Tolerances::default();
    let init = CombInit {
        phi0: vec![0.3],
        gamma0: vec![vec![0.5], vec![0.2]],
        beta0: vec![vec![0.4]],
    };
    let c01 = integrate_system_rstar(&seed, &g, &g.center(), &l, &init, &[0, 1], &tol).unwrap();
    let c10 = integrate_system_rstar(&seed, &g, &g.center(), &l, &init, &[1, 0], &tol).unwrap();
    let mut worst = 0.0_f64;
    for node in g.iter_flat() {
        worst = worst.max((c01.phi.at(node)[0] - c10.phi.at(node)[0]).abs());
        for i in 0..2 {
            worst = worst.max((c01.gamma[i].at(node)[0] - c10.gamma[i].at(node)[0]).abs());
        }
    }
    assert!(worst < 1e-8, "sweep-order gap {worst}");
}

/// Builds the full scalar L-pipeline over the curved fixture and returns the
/// pieces: (seed data, seed frame, comb, omega).
fn curved_pipeline(
    lval: f64,
    g: &Grid,
) -> (
    ribaucour_core::fixtures::CurvedSeed,
    CombescureData,
    ribaucour_core::ribaucour::OmegaField,
) {
    let tol = Tolerances::default();
    let seed = curved_seed(2, g).unwrap();
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[lval])).unwrap();
    let (psi, nu, beta) = generate_admissible_triple(&l, 0.0, 1.0, 2, 1).unwrap();
    let init = CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..2).map(|i| nu.row(i).iter().cloned().collect()).collect(),
        beta0: (0..1)
            .map(|r| beta.row(r).iter().cloned().collect())
            .collect(),
    };
    let comb = integrate_system_rstar(
        &CurvedCoeffs { n: 2 },
        g,
        &g.center(),
        &l,
        &init,
        &[0, 1],
        &tol,
    )
    .unwrap();
    let om0 = omega_base_value(&comb, &g.center(), &tol).unwrap();
    let omega = integrate_omega(&comb, &CurvedCoeffs { n: 2 }, &om0, &g.center(), &[0, 1]).unwrap();
    (seed, comb, omega)
}

#[test]
fn omega_invariants_hold_along_the_integration() {
    let g = grid2(1.0, 0.01);
    let (_seed, comb, omega) = curved_pipeline(0.5, &g);
    let (r15, r21) = omega_invariants(&omega, &comb).unwrap();
    assert!(r15 < 1e-8, "Gram identity residual {r15}");
    assert!(r21 < 1e-8, "operator identity residual {r21}");

    // path independence of Omega across sweep orders
    let om0 = omega_base_value(&comb, &g.center(), &Tolerances::default()).unwrap();
    let o2 = integrate_omega(&comb, &CurvedCoeffs { n: 2 }, &om0, &g.center(), &[1, 0]).unwrap();
    let mut worst = 0.0_f64;
    for node in g.iter_flat() {
        worst = worst.max((omega.omega.at(node)[0] - o2.omega.at(node)[0]).abs());
    }
    assert!(worst < 1e-8, "Omega sweep-order gap {worst}");
}

#[test]
fn omega_constant_where_data_vanishes() {
    let g = grid2(0.5, 0.05);
    let seed = VacuumCoeffs { n: 2 };
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let tol = Tolerances::default();
    // gamma_2 = 0 and beta^2 = 0 keep each other zero along axis 2,
    // so Omega must be constant along axis 2
    let init = CombInit {
        phi0: vec![0.2],
        gamma0: vec![vec![0.5], vec![0.0]],
        beta0: vec![vec![0.5], vec![0.0]],
    };
    let comb = integrate_system_r(&seed, &g, &g.center(), &l, &init, &[0, 1], &tol).unwrap();
    let om0 = omega_base_value(&comb, &g.center(), &tol).unwrap();
    let omega = integrate_omega(&comb, &seed, &om0, &g.center(), &[0, 1]).unwrap();
    let mut multi = [0usize; 2];
    let mut worst = 0.0_f64;
    for node in g.iter_flat() {
        g.multi(node, &mut multi);
        let along_axis0 = g.flat(&[multi[0], g.center()[1]]);
        worst = worst.max((omega.omega.at(node)[0] - omega.omega.at(along_axis0)[0]).abs());
    }
    assert!(worst < 1e-12, "Omega varies along a dead axis by {worst}");
}

#[test]
fn zero_phi_gives_identity_transform() {
    let g = grid2(0.5, 0.05);
    let seed = vacuum_seed(2, &g).unwrap();
    let len = g.len();
    let mut comb = CombescureData {
        grid: g.clone(),
        k: 1,
        n: 2,
        p: 2,
        c: 0.0,
        c_tilde: 0.0,
        system: CombSystem::R,
        op: DMatrix::from_row_slice(1, 1, &[0.5]),
        phi: ribaucour_core::geomgrid::VecField::zeros(1, len),
        gamma: vec![
            ribaucour_core::geomgrid::VecField::zeros(1, len),
            ribaucour_core::geomgrid::VecField::zeros(1, len),
        ],
        beta: vec![
            ribaucour_core::geomgrid::VecField::zeros(1, len),
            ribaucour_core::geomgrid::VecField::zeros(1, len),
        ],
    };
    // nonzero beta to make G nonzero; phi stays zero
    for node in 0..len {
        comb.beta[0].at_mut(node)[0] = 1.0;
    }
    let mut omega = ribaucour_core::ribaucour::OmegaField {
        grid: g.clone(),
        k: 1,
        omega: ribaucour_core::geomgrid::MatField::zeros(1, len),
        base_value: vec![1.0],
        min_sv_ratio: 1.0,
    };
    for node in 0..len {
        omega.omega.at_mut(node)[0] = 1.0;
    }
    let out = apply_vectorial_ribaucour(&seed.frame, &comb, &omega, true, &Tolerances::default())
        .unwrap();
    assert_eq!(out.field.grid.len(), g.len());
    let gap = max_field_gap(&out.field, &seed.frame);
    assert_eq!(gap, 0.0);
}

#[test]
fn l_transform_of_the_curved_fixture_round_trips() {
    let tol = Tolerances::default();
    let g = grid2(1.0, 0.01);
    let (seed, comb, omega) = curved_pipeline(0.5, &g);

    let out = apply_vectorial_ribaucour(&seed.frame, &comb, &omega, true, &tol).unwrap();
    // transformed immersion stays on the unit sphere
    let mut worst = 0.0_f64;
    for node in 0..out.field.grid.len() {
        let f = out.field.f.at(node);
        let norm2: f64 = f.iter().map(|x| x * x).sum();
        worst = worst.max((norm2 - 1.0).abs());
    }
    assert!(worst < 1e-8, "left the ambient sphere by {worst}");

    // the transformed frame stays orthonormal
    let (drift, node) = out.field.orthonormality_drift();
    assert!(drift < 1e-8, "frame drift {drift} at {node:?}");

    // transformed data satisfies the curved system and has flat metric
    let (data, _dbox) = transformed_principal_data(&CurvedCoeffs { n: 2 }, &comb, &omega, &tol)
        .unwrap();
    let rep = residual_system(&data).unwrap();
    assert!(rep.max() < 1e-6, "transformed residual {}", rep.max());
    let curv = ribaucour_core::geomgrid::numeric_sectional_curvature(&data, 5e-2);
    assert!(curv.evaluated() > 0);
    let dev = curv.max_deviation(0.0);
    assert!(dev < 1e-3, "curvature deviation {dev}");

    // round trip: the inverse data is an L^t-transform taking f~ back to f
    let comb_r = comb.restrict(&out.box_lo, &out.box_hi).unwrap();
    let omega_r = omega.restrict(&out.box_lo, &out.box_hi).unwrap();
    let (inv_comb, inv_omega) = inverse_transform_data(&comb_r, &omega_r).unwrap();

    // base value of the inverse is the inverse of the base value
    let ob = DMatrix::from_row_slice(1, 1, &omega_r.base_value);
    let ib = DMatrix::from_row_slice(1, 1, &inv_omega.base_value);
    assert!((ob[(0, 0)] * ib[(0, 0)] - 1.0).abs() < 1e-14);

    // the L^t structure identity for the inverse data
    let (r15, r21) = omega_invariants(&inv_omega, &inv_comb).unwrap();
    assert!(r15 < 1e-8 && r21 < 1e-8, "inverse identities {r15} {r21}");

    let back = apply_vectorial_ribaucour(&out.field, &inv_comb, &inv_omega, false, &tol).unwrap();
    // compare against the seed positions on the common box
    let mut worst = 0.0_f64;
    for (sub_node, &mid_node) in back.index_map.iter().enumerate() {
        let orig_node = out.index_map[mid_node];
        for (x, y) in back.field.f.at(sub_node).iter().zip(seed.frame.f.at(orig_node)) {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(worst < 1e-8, "round-trip gap {worst}");
}

#[test]
fn frame_integration_reproduces_the_vacuum() {
    let g = grid2(1.0, 0.01);
    let n = 2;
    let seed = VacuumCoeffs { n };
    let exact = vacuum_seed(n, &g).unwrap();
    let base = g.center();
    let mut f0 = vec![0.0; 2 * n];
    let mut x0 = vec![vec![0.0; 2 * n], vec![0.0; 2 * n]];
    let mut u = vec![0.0; n];
    g.coords(&base, &mut u);
    let vf = ribaucour_core::vacuum::VacuumFrame { n };
    vf.position_at(&u, &mut f0);
    vf.tangent_at(&u, 0, &mut x0[0]);
    vf.tangent_at(&u, 1, &mut x0[1]);
    let init = ribaucour_core::geomgrid::FrameInit {
        f0,
        x0,
        xi0: vec![],
    };
    let frame =
        ribaucour_core::geomgrid::integrate_frame(&seed, &g, &base, &init, &[0, 1], 1e-7).unwrap();
    let gap = max_field_gap(&frame, &exact.frame);
    assert!(gap < 1e-8, "integrated frame differs from the exact one by {gap}");

    // base node exact
    let node = g.flat(&base);
    assert_eq!(frame.f.at(node), exact.frame.f.at(node));

    // order independence
    let mut f0b = vec![0.0; 2 * n];
    vf.position_at(&u, &mut f0b);
    let initb = ribaucour_core::geomgrid::FrameInit {
        f0: f0b,
        x0: vec![
            {
                let mut t = vec![0.0; 2 * n];
                vf.tangent_at(&u, 0, &mut t);
                t
            },
            {
                let mut t = vec![0.0; 2 * n];
                vf.tangent_at(&u, 1, &mut t);
                t
            },
        ],
        xi0: vec![],
    };
    let frame_b =
        ribaucour_core::geomgrid::integrate_frame(&seed, &g, &base, &initb, &[1, 0], 1e-7)
            .unwrap();
    let gap = max_field_gap(&frame, &frame_b);
    assert!(gap < 1e-8, "sweep-order frame gap {gap}");
}
