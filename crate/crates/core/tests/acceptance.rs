//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Tolerances are pinned here, in code.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ribaucour_core::bianchi::{build_cube_l, build_cube_p, path_independence_defect};
use ribaucour_core::fixtures::{curved_seed, horizontal_seed, CurvedCoeffs, HorizontalCoeffs};
use ribaucour_core::geomgrid::{
    numeric_sectional_curvature, sphere_deviation_data, Grid, PrincipalData,
};
use ribaucour_core::lagrangian::{
    apply_p_transform, apply_pstar_transform, check_horizontal, check_lagrangian,
    integrate_system_p, omega_from_lyapunov, t_omega_defect, PTransformSpec, PVariant,
};
use ribaucour_core::matrixeq::{
    analyze_operator, generate_admissible_triple, solve_sylvester_system, AdmissibilityStatus,
    LyapunovSolver, SylvesterSpec,
};
use ribaucour_core::ribaucour::{
    apply_vectorial_ribaucour, integrate_omega, integrate_system_r, integrate_system_rstar,
    inverse_transform_data, omega_base_value, omega_invariants, CombInit, CombescureData,
    OmegaField,
};
use ribaucour_core::vacuum::{
    nondiag_ab, vacuum_seed, VacuumCoeffs, VacuumFrame, VacuumFrameTable,
};
use ribaucour_core::Tolerances;

fn tols() -> Tolerances {
    Tolerances::default()
}

fn order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Independent Lyapunov oracle: the Kronecker form
/// (I (x) P^t + P^t (x) I) vec(X) = vec(C), solved densely.
fn kronecker_lyapunov(p: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let k = p.nrows();
    let pt = p.transpose();
    let mut big = DMatrix::zeros(k * k, k * k);
    // column-stacked vec: X_{i,j} at index j*k + i
    for i in 0..k {
        for j in 0..k {
            let row = j * k + i;
            for m in 0..k {
                big[(row, j * k + m)] += pt[(i, m)]; // (P^t X)_{ij}
                big[(row, m * k + i)] += p[(m, j)]; // (X P)_{ij}
            }
        }
    }
    let mut rhs = DVector::zeros(k * k);
    for i in 0..k {
        for j in 0..k {
            rhs[j * k + i] = c[(i, j)];
        }
    }
    let sol = big.lu().solve(&rhs).expect("Kronecker system solvable");
    let mut x = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            x[(i, j)] = sol[j * k + i];
        }
    }
    x
}

fn random_matrix(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0))
}

#[test]
fn criterion_1_lyapunov_oracle() {
    let start = Instant::now();
    let tol = tols();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for trial in 0..200 {
        let k = 1 + trial % 6;
        // shift the spectrum into the right half-plane
        let m = random_matrix(&mut rng, k);
        let shift = 1.5 + m.amax() * (k as f64).sqrt();
        let p = analyze_operator(m + DMatrix::identity(k, k) * shift).unwrap();
        let c = random_matrix(&mut rng, k);
        let solver = LyapunovSolver::new(&p, &tol).unwrap();
        let x = solver.solve(&c).x;
        let oracle = kronecker_lyapunov(&p.entries, &c);
        worst = worst.max((x - oracle).amax() / (1.0 + c.amax()));
    }
    // the reference instance
    let p = analyze_operator(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])).unwrap();
    let c = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 4.0, 4.0]);
    let x = LyapunovSolver::new(&p, &tol).unwrap().solve(&c).x;
    let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 1.5, 1.0]);
    let ref_gap = (x - expect).amax();
    worst = worst.max(ref_gap);

    let elapsed = start.elapsed();
    assert!(worst <= 1e-10, "max oracle gap {worst}");
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?}");
    println!(
        "criterion 1 (lyapunov oracle): PASS - 200 random + reference, max gap {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_sylvester_system() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_cf = 0.0_f64;
    let mut worst_res = 0.0_f64;
    for k in 2..=5 {
        for &(c, c_tilde) in &[(0.0, 1.0), (2.0, 1.0), (0.0, 0.0)] {
            // symmetric A with distinct eigenvalues inside Z(c, c~)
            // the diagonal construction needs a nontrivial solution of the
            // per-eigenvector quadratic; at (0, 0) that restricts the
            // spectrum to (0, 1] even though Z is formally unconstrained
            let (lo, hi) = if (c, c_tilde) == (0.0, 0.0) {
                (0.05, 0.95)
            } else {
                let z = ribaucour_core::matrixeq::z_interval(c, c_tilde).unwrap();
                let (zlo, zhi) = z.intervals[0];
                (zlo.max(-1.0) + 0.05, zhi.min(2.0) - 0.05)
            };
            let mut alphas: Vec<f64> = (0..k)
                .map(|i| lo + (hi - lo) * (i as f64 + rng.gen_range(0.1..0.9)) / k as f64)
                .collect();
            alphas.sort_by(f64::total_cmp);
            // rotate into a dense symmetric matrix
            let q = random_matrix(&mut rng, k).qr().q();
            let a_mat = &q * DMatrix::from_diagonal(&DVector::from_vec(alphas)) * q.transpose();
            let a = analyze_operator(a_mat).unwrap();
            let (psi, nu, beta0) = generate_admissible_triple(&a, c, c_tilde, k, k).unwrap();
            let spec = SylvesterSpec {
                a,
                c,
                c_tilde,
                psi,
                nu,
                beta0,
            };
            let verdict = solve_sylvester_system(&spec).unwrap();
            assert_eq!(
                verdict.status,
                AdmissibilityStatus::UniqueInvertible,
                "k = {k}, (c, c~) = ({c}, {c_tilde})"
            );
            worst_res = worst_res.max(verdict.residual_sym.max(verdict.residual_op));
            worst_cf = worst_cf.max(verdict.closed_form_residual.unwrap());
        }
    }

    // spectra outside Z(c, c~), odd multiplicity: singular or no solution
    let a = analyze_operator(DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();
    let zero = SylvesterSpec {
        a: a.clone(),
        c: 1.0,
        c_tilde: 2.0,
        psi: DVector::zeros(1),
        nu: DMatrix::zeros(1, 1),
        beta0: DMatrix::zeros(1, 1),
    };
    let v = solve_sylvester_system(&zero).unwrap();
    assert_eq!(v.status, AdmissibilityStatus::UniqueSingular);
    let nonzero = SylvesterSpec {
        a,
        c: 1.0,
        c_tilde: 2.0,
        psi: DVector::from_row_slice(&[1.0]),
        nu: DMatrix::from_row_slice(1, 1, &[1.0]),
        beta0: DMatrix::from_row_slice(1, 1, &[1.0]),
    };
    let v = solve_sylvester_system(&nonzero).unwrap();
    assert_eq!(v.status, AdmissibilityStatus::NoSolution);

    let elapsed = start.elapsed();
    assert!(worst_cf <= 1e-10, "closed-form gap {worst_cf}");
    assert!(worst_res <= 1e-10, "system residual {worst_res}");
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?}");
    println!(
        "criterion 2 (sylvester system): PASS - closed form gap {worst_cf:.3e}, residual {worst_res:.3e}, inadmissible spectra classified, {elapsed:?}"
    );
}

/// Scalar pipeline gap against the closed form over the full grid; streams
/// the oracle so n = 3 stays within memory.
fn scalar_pipeline_gap(n: usize, p: f64, grid: &Grid) -> f64 {
    let tol = tols();
    let seed = VacuumCoeffs { n };
    let frame = VacuumFrameTable::new(n, grid);
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[p])).unwrap(),
        variant: PVariant::FlatLagrangian,
        c: 0.0,
        init_phi: vec![-p],
        init_gamma: vec![vec![1.0]; n],
    };
    let comb = integrate_system_p(&seed, grid, &grid.center(), &spec, &order(n), &tol).unwrap();
    let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
    let out = apply_vectorial_ribaucour(&frame, &comb, &omega, false, &tol).unwrap();
    assert_eq!(out.field.grid.len(), grid.len(), "domain loss in the scalar pipeline");

    // the closed form factors over axes; tabulate the per-axis pieces
    let zi = num_complex::Complex64::new(-1.0, p) / p;
    let tab_e: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..grid.steps()[a])
                .map(|i| (-2.0 * grid.coord_axis(a, i) / p).exp())
                .collect()
        })
        .collect();
    let tab_z: Vec<Vec<num_complex::Complex64>> = (0..n)
        .map(|a| {
            (0..grid.steps()[a])
                .map(|i| (zi * grid.coord_axis(a, i)).exp())
                .collect()
        })
        .collect();
    let tab_seed: Vec<num_complex::Complex64> = (0..grid.steps()[0])
        .map(|i| {
            -num_complex::Complex64::i()
                * (num_complex::Complex64::i() * grid.coord_axis(0, i)).exp()
        })
        .collect();
    let pref_c = 2.0 * p * num_complex::Complex64::new(1.0, p) / (1.0 + p * p);
    let eu: Vec<Vec<f64>> = (0..1)
        .map(|_| {
            (0..grid.steps()[0])
                .map(|i| (-grid.coord_axis(0, i) / p).exp())
                .collect()
        })
        .collect();

    let mut worst = 0.0_f64;
    let mut multi = vec![0usize; n];
    for (sub, &node) in out.index_map.iter().enumerate() {
        grid.multi(node, &mut multi);
        let s: f64 = (0..n).map(|a| tab_e[a][multi[a]]).sum();
        let pref = pref_c * eu[0][multi[0]] / s;
        let f = out.field.f.at(sub);
        for j in 0..n {
            let mut z = pref * tab_z[j][multi[j]];
            if j == 0 {
                z += tab_seed[multi[0]];
            }
            worst = worst.max((f[2 * j] - z.re).abs());
            worst = worst.max((f[2 * j + 1] - z.im).abs());
        }
    }
    worst
}

#[test]
fn criterion_3_scalar_reproduction() {
    let start = Instant::now();
    let mut detail = String::new();
    let mut worst = 0.0_f64;
    for n in [2usize, 3] {
        let grid = Grid::centered(n, 1.0, 1e-2).unwrap();
        for p in [1.0, 2.0] {
            let gap = scalar_pipeline_gap(n, p, &grid);
            detail.push_str(&format!("n={n} P={p}: {gap:.3e}; "));
            worst = worst.max(gap);
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-8, "max closed-form gap {worst}");
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?}");
    println!("criterion 3 (scalar reproduction): PASS - {detail}{elapsed:?}");
}

/// The non-diagonalizable pipeline on [-1, 1]^2; returns (closed-form gap,
/// sphere deviation, h-symmetry defect, transformed data).
fn nondiag_pipeline(grid: &Grid) -> (f64, f64, f64, PrincipalData) {
    let tol = tols();
    let n = 2;
    let seed = VacuumCoeffs { n };
    let frame = VacuumFrame { n };
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0])).unwrap(),
        variant: PVariant::PStar,
        c: 0.0,
        init_phi: vec![-1.0, -1.0],
        init_gamma: vec![vec![1.0, 0.0]; n],
    };
    let comb = integrate_system_p(&seed, grid, &grid.center(), &spec, &order(n), &tol).unwrap();
    let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
    let (out, data, _) =
        apply_pstar_transform(&frame, &seed, &comb, &omega, &spec, false, &tol).unwrap();

    let mut gap = 0.0_f64;
    let mut u = [0.0; 2];
    let mut multi = [0usize; 2];
    for (sub, &node) in out.index_map.iter().enumerate() {
        grid.multi(node, &mut multi);
        grid.coords(&multi, &mut u);
        let f = out.field.f.at(sub);
        for j in 0..2 {
            let (a, b) = nondiag_ab(&u, j);
            let e = num_complex::Complex64::new(a, b)
                * (num_complex::Complex64::i() * u[j]).exp()
                + if j == 0 {
                    -num_complex::Complex64::i() * (num_complex::Complex64::i() * u[0]).exp()
                } else {
                    num_complex::Complex64::new(0.0, 0.0)
                };
            gap = gap.max((f[2 * j] - e.re).abs());
            gap = gap.max((f[2 * j + 1] - e.im).abs());
        }
    }
    (gap, sphere_deviation_data(&data), check_lagrangian(&data), data)
}

#[test]
fn criterion_4_nondiagonalizable_reproduction() {
    let start = Instant::now();
    let grid = Grid::centered(2, 1.0, 1e-2).unwrap();
    let (gap, sphere, sym, _) = nondiag_pipeline(&grid);
    let elapsed = start.elapsed();
    assert!(gap <= 1e-8, "closed-form gap {gap}");
    assert!(sphere <= 1e-10, "sum v~^2 deviation {sphere}");
    assert!(sym <= 1e-8, "h~ symmetry defect {sym}");
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?}");
    println!(
        "criterion 4 (non-diagonalizable reproduction): PASS - gap {gap:.3e}, sphere {sphere:.3e}, symmetry {sym:.3e}, {elapsed:?}"
    );
}

/// Scalar P-transform with full data output (n = 2 size).
fn scalar_transform_data(p: f64, grid: &Grid) -> PrincipalData {
    let tol = tols();
    let n = 2;
    let seed = VacuumCoeffs { n };
    let frame = VacuumFrame { n };
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[p])).unwrap(),
        variant: PVariant::FlatLagrangian,
        c: 0.0,
        init_phi: vec![-p],
        init_gamma: vec![vec![1.0]; n],
    };
    let comb = integrate_system_p(&seed, grid, &grid.center(), &spec, &order(n), &tol).unwrap();
    let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
    let (_, data, _) = apply_p_transform(&frame, &seed, &comb, &omega, &spec, false, &tol).unwrap();
    data
}

fn curved_l_pipeline(grid: &Grid) -> (CombescureData, OmegaField, PrincipalData) {
    let tol = tols();
    let seed = CurvedCoeffs { n: 2 };
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let (psi, nu, beta) = generate_admissible_triple(&l, 0.0, 1.0, 2, 1).unwrap();
    let init = CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..2).map(|i| nu.row(i).iter().cloned().collect()).collect(),
        beta0: vec![beta.row(0).iter().cloned().collect()],
    };
    let comb =
        integrate_system_rstar(&seed, grid, &grid.center(), &l, &init, &[0, 1], &tol).unwrap();
    let om0 = omega_base_value(&comb, &grid.center(), &tol).unwrap();
    let omega = integrate_omega(&comb, &seed, &om0, &grid.center(), &[0, 1]).unwrap();
    let (data, _) = ribaucour_core::ribaucour::transformed_principal_data(
        &seed, &comb, &omega, &tol,
    )
    .unwrap();
    (comb, omega, data)
}

fn horizontal_pipeline(grid: &Grid) -> (CombescureData, OmegaField, PTransformSpec, PrincipalData) {
    let tol = tols();
    let c = 1.0;
    let n = 2;
    let seed = horizontal_seed(n, c, grid).unwrap();
    let seedc = HorizontalCoeffs { n, c };
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[1.5])).unwrap(),
        variant: PVariant::Horizontal,
        c,
        init_phi: vec![0.4],
        init_gamma: vec![vec![0.8], vec![0.6]],
    };
    let comb = integrate_system_p(&seedc, grid, &grid.center(), &spec, &order(n), &tol).unwrap();
    let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
    let (_, data, _) =
        apply_p_transform(&seed.frame, &seedc, &comb, &omega, &spec, false, &tol).unwrap();
    (comb, omega, spec, data)
}

#[test]
fn criterion_5_curvature_preservation() {
    let start = Instant::now();
    let grid = Grid::centered(2, 1.0, 1e-2).unwrap();
    let cutoff = 5e-2;
    let mut detail = String::new();
    let mut worst = 0.0_f64;

    // flat cases: scalar P in {1, 2} and the non-diagonalizable transform
    for p in [1.0, 2.0] {
        let data = scalar_transform_data(p, &grid);
        let curv = numeric_sectional_curvature(&data, cutoff);
        assert!(curv.evaluated() > 0);
        let dev = curv.max_deviation(0.0);
        detail.push_str(&format!("flat P={p}: {dev:.3e}; "));
        worst = worst.max(dev);
    }
    let (_, _, _, data) = nondiag_pipeline(&grid);
    let curv = numeric_sectional_curvature(&data, cutoff);
    assert!(curv.evaluated() > 0);
    let dev = curv.max_deviation(0.0);
    detail.push_str(&format!("flat nondiag: {dev:.3e}; "));
    worst = worst.max(dev);

    // the curved L-route (c = 0 in the unit sphere)
    let (_, _, data) = curved_l_pipeline(&grid);
    let curv = numeric_sectional_curvature(&data, cutoff);
    assert!(curv.evaluated() > 0);
    let dev = curv.max_deviation(0.0);
    detail.push_str(&format!("curved L: {dev:.3e}; "));
    worst = worst.max(dev);

    // the c = 1 horizontal fixture
    let (_, _, _, data) = horizontal_pipeline(&grid);
    let curv = numeric_sectional_curvature(&data, cutoff);
    assert!(curv.evaluated() > 0);
    let dev = curv.max_deviation(1.0);
    detail.push_str(&format!("horizontal c=1: {dev:.3e}; "));
    worst = worst.max(dev);

    let elapsed = start.elapsed();
    assert!(worst <= 1e-3, "max curvature deviation {worst}");
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?}");
    println!("criterion 5 (curvature preservation): PASS - {detail}{elapsed:?}");
}

#[test]
fn criterion_6_structural_invariants() {
    let start = Instant::now();
    let tol = tols();
    let grid = Grid::centered(2, 1.0, 1e-2).unwrap();
    let mut worst_15 = 0.0_f64;
    let mut worst_21 = 0.0_f64;
    let mut worst_t = 0.0_f64;

    // P runs: scalar, non-diagonalizable, horizontal
    let n = 2;
    let seed = VacuumCoeffs { n };
    for (pm, variant, phi0, g0) in [
        (
            DMatrix::from_row_slice(1, 1, &[1.0]),
            PVariant::FlatLagrangian,
            vec![-1.0],
            vec![1.0],
        ),
        (
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]),
            PVariant::PStar,
            vec![-1.0, -1.0],
            vec![1.0, 0.0],
        ),
    ] {
        let spec = PTransformSpec {
            p: analyze_operator(pm).unwrap(),
            variant,
            c: 0.0,
            init_phi: phi0,
            init_gamma: vec![g0; n],
        };
        let comb =
            integrate_system_p(&seed, &grid, &grid.center(), &spec, &order(n), &tol).unwrap();
        let omega = omega_from_lyapunov(&comb, &spec, &tol).unwrap();
        let (r15, r21) = omega_invariants(&omega, &comb).unwrap();
        worst_15 = worst_15.max(r15);
        worst_21 = worst_21.max(r21);
        worst_t = worst_t.max(t_omega_defect(&omega, &spec).unwrap());
    }
    let (comb, omega, spec, _) = horizontal_pipeline(&grid);
    let (r15, r21) = omega_invariants(&omega, &comb).unwrap();
    worst_15 = worst_15.max(r15);
    worst_21 = worst_21.max(r21);
    worst_t = worst_t.max(t_omega_defect(&omega, &spec).unwrap());

    // the L run over the curved fixture (integrated Omega)
    let (comb, omega, _) = curved_l_pipeline(&grid);
    let (r15, r21) = omega_invariants(&omega, &comb).unwrap();
    worst_15 = worst_15.max(r15);
    worst_21 = worst_21.max(r21);

    let elapsed = start.elapsed();
    assert!(worst_15 <= 1e-8, "Gram identity {worst_15}");
    assert!(worst_21 <= 1e-8, "operator identity {worst_21}");
    assert!(worst_t <= 1e-10, "T Omega symmetry {worst_t}");
    println!(
        "criterion 6 (structural invariants): PASS - Gram {worst_15:.3e}, operator {worst_21:.3e}, T-symmetry {worst_t:.3e}, {elapsed:?}"
    );
}

fn scalar_p_comb(p: f64, grid: &Grid) -> CombescureData {
    let tol = tols();
    let spec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[p])).unwrap(),
        variant: PVariant::PStar,
        c: 0.0,
        init_phi: vec![-p],
        init_gamma: vec![vec![1.0]; 2],
    };
    integrate_system_p(&VacuumCoeffs { n: 2 }, grid, &grid.center(), &spec, &[0, 1], &tol).unwrap()
}

fn scalar_l_comb(lval: f64, grid: &Grid) -> CombescureData {
    let tol = tols();
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[lval])).unwrap();
    let (psi, nu, beta) = generate_admissible_triple(&l, 0.0, 1.0, 2, 1).unwrap();
    let init = CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..2).map(|i| nu.row(i).iter().cloned().collect()).collect(),
        beta0: vec![beta.row(0).iter().cloned().collect()],
    };
    integrate_system_rstar(
        &CurvedCoeffs { n: 2 },
        grid,
        &grid.center(),
        &l,
        &init,
        &[0, 1],
        &tol,
    )
    .unwrap()
}

#[test]
fn criterion_7_bianchi_path_independence() {
    let start = Instant::now();
    let tol = tols();
    let mut detail = String::new();

    // P-cubes over the vacuum, k = 2 and k = 3
    let gp = Grid::centered(2, 1.0, 1e-2).unwrap();
    let vseed = vacuum_seed(2, &gp).unwrap();
    for k in [2usize, 3] {
        let scalars: Vec<CombescureData> = (0..k)
            .map(|i| scalar_p_comb(1.0 + i as f64, &gp))
            .collect();
        let cube = build_cube_p(&scalars, &vseed.frame, &VacuumCoeffs { n: 2 }, &tol).unwrap();
        let (gap, skipped) = path_independence_defect(&cube, &vseed.frame, &tol).unwrap();
        assert!(gap <= 1e-8, "P-cube k = {k} path gap {gap}");
        assert_eq!(skipped, 0);
        detail.push_str(&format!("P k={k}: {gap:.3e}; "));
        if k == 3 {
            // all 2^3 vertex families: curvature + Lagrangian checks
            assert_eq!(cube.vertices.len(), 7);
            for vertex in cube.vertices.values() {
                assert!(
                    check_lagrangian(&vertex.data) <= 1e-8,
                    "vertex {:?} symmetry",
                    vertex.subset
                );
                assert!(
                    sphere_deviation_data(&vertex.data) <= 1e-10,
                    "vertex {:?} sphere",
                    vertex.subset
                );
                let curv = numeric_sectional_curvature(&vertex.data, 1e-1);
                assert!(curv.evaluated() > 0);
                assert!(
                    curv.max_deviation(0.0) <= 1e-3,
                    "vertex {:?} curvature {}",
                    vertex.subset,
                    curv.max_deviation(0.0)
                );
            }
        }
    }

    // L-cubes over the curved fixture, k = 2 and k = 3 (half-width window
    // keeps the composite metric away from its degenerate set)
    let gl = Grid::centered(2, 0.5, 1e-2).unwrap();
    let cseed = curved_seed(2, &gl).unwrap();
    for k in [2usize, 3] {
        let values = [0.5, 0.25, 0.75];
        let scalars: Vec<CombescureData> =
            values[..k].iter().map(|&l| scalar_l_comb(l, &gl)).collect();
        let cube = build_cube_l(&scalars, &cseed.frame, &CurvedCoeffs { n: 2 }, &tol).unwrap();
        let (gap, skipped) = path_independence_defect(&cube, &cseed.frame, &tol).unwrap();
        assert!(gap <= 1e-8, "L-cube k = {k} path gap {gap}");
        assert_eq!(skipped, 0);
        detail.push_str(&format!("L k={k}: {gap:.3e}; "));
        for vertex in cube.vertices.values() {
            let curv = numeric_sectional_curvature(&vertex.data, 1e-1);
            if curv.evaluated() > 0 {
                assert!(
                    curv.max_deviation(0.0) <= 1e-3,
                    "L vertex {:?} curvature {}",
                    vertex.subset,
                    curv.max_deviation(0.0)
                );
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?}");
    println!("criterion 7 (bianchi path independence): PASS - {detail}{elapsed:?}");
}

#[test]
fn criterion_8_inverse_round_trip() {
    let start = Instant::now();
    let tol = tols();
    let mut detail = String::new();

    // seed 1: the curved fixture through system R*
    let g = Grid::centered(2, 1.0, 1e-2).unwrap();
    let cseed = curved_seed(2, &g).unwrap();
    let (comb, omega, _) = curved_l_pipeline(&g);
    let out = apply_vectorial_ribaucour(&cseed.frame, &comb, &omega, true, &tol).unwrap();
    let gap = round_trip_gap(&cseed.frame, &comb, &omega, &out);
    assert!(gap <= 1e-8, "curved round trip {gap}");
    detail.push_str(&format!("curved: {gap:.3e}; "));

    // seed 2: the vacuum through system R
    let vseed = vacuum_seed(2, &g).unwrap();
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let (psi, nu, beta) = generate_admissible_triple(&l, 0.0, 0.0, 2, 2).unwrap();
    let init = CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..2).map(|i| nu.row(i).iter().cloned().collect()).collect(),
        beta0: (0..2).map(|r| beta.row(r).iter().cloned().collect()).collect(),
    };
    let comb =
        integrate_system_r(&vseed.data, &g, &g.center(), &l, &init, &[0, 1], &tol).unwrap();
    let om0 = omega_base_value(&comb, &g.center(), &tol).unwrap();
    let omega = integrate_omega(&comb, &vseed.data, &om0, &g.center(), &[0, 1]).unwrap();
    let out = apply_vectorial_ribaucour(&vseed.frame, &comb, &omega, true, &tol).unwrap();
    let gap = round_trip_gap(&vseed.frame, &comb, &omega, &out);
    assert!(gap <= 1e-8, "vacuum round trip {gap}");
    detail.push_str(&format!("vacuum: {gap:.3e}; "));

    // seed 3: a transformed (non-degenerate) Lagrangian seed
    let tol3 = tols();
    let n = 2;
    let pspec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(1, 1, &[1.0])).unwrap(),
        variant: PVariant::FlatLagrangian,
        c: 0.0,
        init_phi: vec![-1.0],
        init_gamma: vec![vec![1.0]; n],
    };
    let pcomb =
        integrate_system_p(&vseed.data, &g, &g.center(), &pspec, &order(n), &tol3).unwrap();
    let pomega = omega_from_lyapunov(&pcomb, &pspec, &tol3).unwrap();
    let (pout, pdata, dbox) =
        apply_p_transform(&vseed.frame, &vseed.data, &pcomb, &pomega, &pspec, true, &tol3)
            .unwrap();
    // align the frame with the data box
    let frame3 = pout
        .field
        .restrict(&dbox.box_lo, &dbox.box_hi)
        .unwrap();
    let g3 = pdata.grid.clone();
    let l = analyze_operator(DMatrix::from_row_slice(1, 1, &[0.5])).unwrap();
    let (psi, nu, beta) = generate_admissible_triple(&l, 0.0, 0.0, 2, 2).unwrap();
    let init = CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..2).map(|i| nu.row(i).iter().cloned().collect()).collect(),
        beta0: (0..2).map(|r| beta.row(r).iter().cloned().collect()).collect(),
    };
    let comb = integrate_system_r(&pdata, &g3, &g3.center(), &l, &init, &[0, 1], &tol).unwrap();
    let om0 = omega_base_value(&comb, &g3.center(), &tol).unwrap();
    let omega = integrate_omega(&comb, &pdata, &om0, &g3.center(), &[0, 1]).unwrap();
    let out = apply_vectorial_ribaucour(&frame3, &comb, &omega, true, &tol).unwrap();
    let gap = round_trip_gap(&frame3, &comb, &omega, &out);
    assert!(gap <= 1e-8, "transformed-seed round trip {gap}");
    detail.push_str(&format!("transformed seed: {gap:.3e}; "));

    let elapsed = start.elapsed();
    println!("criterion 8 (inverse round trip): PASS - {detail}{elapsed:?}");
}

fn round_trip_gap(
    seed_frame: &ribaucour_core::geomgrid::ImmersionField,
    comb: &CombescureData,
    omega: &OmegaField,
    out: &ribaucour_core::ribaucour::TransformOutput,
) -> f64 {
    let tol = tols();
    let comb_r = comb.restrict(&out.box_lo, &out.box_hi).unwrap();
    let omega_r = omega.restrict(&out.box_lo, &out.box_hi).unwrap();
    let (inv_comb, inv_omega) = inverse_transform_data(&comb_r, &omega_r).unwrap();
    let back = apply_vectorial_ribaucour(&out.field, &inv_comb, &inv_omega, false, &tol).unwrap();
    let mut gap = 0.0_f64;
    for (sub, &mid) in back.index_map.iter().enumerate() {
        let orig = out.index_map[mid];
        for (a, b) in back.field.f.at(sub).iter().zip(seed_frame.f.at(orig)) {
            gap = gap.max((a - b).abs());
        }
    }
    gap
}

#[test]
fn criterion_9_grid_convergence() {
    let start = Instant::now();
    // the non-diagonalizable pipeline error must drop by >= 8x when the
    // spacing halves (fourth-order integration, tolerance factor 2)
    let coarse_grid = Grid::centered(2, 1.0, 1e-2).unwrap();
    let fine_grid = Grid::centered(2, 1.0, 5e-3).unwrap();
    let (coarse, _, _, _) = nondiag_pipeline(&coarse_grid);
    let (fine, _, _, _) = nondiag_pipeline(&fine_grid);
    let ratio = coarse / fine;
    let elapsed = start.elapsed();
    assert!(
        ratio >= 8.0,
        "error ratio {ratio} (coarse {coarse:.3e}, fine {fine:.3e})"
    );
    println!(
        "criterion 9 (grid convergence): PASS - error {coarse:.3e} -> {fine:.3e}, ratio {ratio:.1}, {elapsed:?}"
    );
}
