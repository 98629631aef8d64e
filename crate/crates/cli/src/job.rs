//! Job specifications and runners.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use ribaucour_core::bianchi::{
    build_cube_l, build_cube_p, omega_diagonal_defect, path_independence_defect,
};
use ribaucour_core::export;
use ribaucour_core::fixtures::{curved_seed, horizontal_seed, CurvedSeed, HorizontalSeed};
use ribaucour_core::geomgrid::{
    numeric_sectional_curvature, residual_system, sphere_deviation_data, sphere_deviation_field,
    Grid, ImmersionField, PrincipalData, PrincipalKind, ScalarField,
};
use ribaucour_core::lagrangian::{
    apply_p_transform, apply_pstar_transform, check_horizontal, check_lagrangian,
    integrate_system_p, omega_from_lyapunov, pstar_conservation_defect, t_omega_defect,
    PTransformSpec, PVariant,
};
use ribaucour_core::matrixeq::{
    analyze_operator, generate_admissible_triple, solve_lyapunov_with, solve_sylvester_system_with,
    Operator, SylvesterSpec,
};
use ribaucour_core::ribaucour::{
    apply_vectorial_ribaucour, integrate_omega, integrate_system_r, integrate_system_rstar,
    inverse_transform_data, omega_base_value, omega_invariants, residual_comb, CombInit,
    CombescureData, OmegaField,
};
use ribaucour_core::vacuum::{
    nondiag_closed_form, scalar_p_closed_form, vacuum_seed, VacuumSeed,
};
use ribaucour_core::Tolerances;

use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Obj,
}

/// Report thresholds; override with `--tol name=value`.
#[derive(Debug, Clone, Copy)]
pub struct CheckTols {
    pub data_residual: f64,
    pub comb_residual: f64,
    pub omega: f64,
    pub t_omega: f64,
    pub curvature: f64,
    pub roundtrip: f64,
    pub sphere: f64,
    pub closed_form: f64,
    pub lagrangian: f64,
    pub v_cutoff: f64,
}

impl Default for CheckTols {
    fn default() -> Self {
        CheckTols {
            data_residual: 1e-6,
            comb_residual: 1e-6,
            omega: 1e-8,
            t_omega: 1e-10,
            curvature: 1e-3,
            roundtrip: 1e-8,
            sphere: 1e-10,
            closed_form: 1e-8,
            lagrangian: 1e-8,
            v_cutoff: 5e-2,
        }
    }
}

impl CheckTols {
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match name {
            "data_residual" => self.data_residual = value,
            "comb_residual" => self.comb_residual = value,
            "omega" => self.omega = value,
            "t_omega" => self.t_omega = value,
            "curvature" => self.curvature = value,
            "roundtrip" => self.roundtrip = value,
            "sphere" => self.sphere = value,
            "closed_form" => self.closed_form = value,
            "lagrangian" => self.lagrangian = value,
            "v_cutoff" => self.v_cutoff = value,
            _ => return false,
        }
        true
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub lo: Option<Vec<f64>>,
    #[serde(default)]
    pub hi: Option<Vec<f64>>,
    #[serde(default)]
    pub steps: Option<Vec<usize>>,
    #[serde(default)]
    pub half: Option<f64>,
    #[serde(default)]
    pub spacing: Option<f64>,
}

impl GridSpec {
    pub fn build(&self, n: usize) -> anyhow::Result<Grid> {
        if let (Some(lo), Some(hi), Some(steps)) = (&self.lo, &self.hi, &self.steps) {
            return Ok(Grid::new(lo.clone(), hi.clone(), steps.clone())?);
        }
        let half = self.half.unwrap_or(1.0);
        let spacing = self.spacing.unwrap_or(1e-2);
        Ok(Grid::centered(n, half, spacing)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    /// Flat Lagrangian vacuum in C^n.
    Vacuum { n: usize },
    /// Flat degenerate seed in the unit sphere (c = 0, c~ = 1).
    Curved { n: usize },
    /// Horizontal degenerate seed in the curvature-c sphere.
    Horizontal { n: usize, c: f64 },
}

pub enum BuiltSeed {
    Vacuum(VacuumSeed),
    Curved(CurvedSeed),
    Horizontal(HorizontalSeed),
}

impl BuiltSeed {
    pub fn data(&self) -> &PrincipalData {
        match self {
            BuiltSeed::Vacuum(s) => &s.data,
            BuiltSeed::Curved(s) => &s.data,
            BuiltSeed::Horizontal(s) => &s.data,
        }
    }
    pub fn frame(&self) -> &ImmersionField {
        match self {
            BuiltSeed::Vacuum(s) => &s.frame,
            BuiltSeed::Curved(s) => &s.frame,
            BuiltSeed::Horizontal(s) => &s.frame,
        }
    }
}

impl SeedSpec {
    pub fn n(&self) -> usize {
        match self {
            SeedSpec::Vacuum { n } | SeedSpec::Curved { n } | SeedSpec::Horizontal { n, .. } => *n,
        }
    }

    pub fn build(&self, grid: &Grid) -> anyhow::Result<BuiltSeed> {
        Ok(match self {
            SeedSpec::Vacuum { n } => BuiltSeed::Vacuum(vacuum_seed(*n, grid)?),
            SeedSpec::Curved { n } => BuiltSeed::Curved(curved_seed(*n, grid)?),
            SeedSpec::Horizontal { n, c } => BuiltSeed::Horizontal(horizontal_seed(*n, *c, grid)?),
        })
    }
}

fn matrix(rows: &[Vec<f64>]) -> anyhow::Result<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        bail!("matrix must have at least one row");
    }
    let c = rows[0].len();
    if rows.iter().any(|row| row.len() != c) {
        bail!("matrix rows have unequal lengths");
    }
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    Ok(DMatrix::from_row_slice(r, c, &flat))
}

fn matrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    serde_json::json!(rows)
}

// ---------------------------------------------------------------------------
// lyapunov

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovJob {
    pub p: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

pub fn run_lyapunov(job: &LyapunovJob, tol: &Tolerances) -> anyhow::Result<(Report, serde_json::Value)> {
    let p = analyze_operator(matrix(&job.p)?)?;
    let c = matrix(&job.c)?;
    let sol = solve_lyapunov_with(&p, &c, tol)?;
    let residual = (p.entries.transpose() * &sol.x + &sol.x * &p.entries - &c).amax();
    let mut report = Report::new("lyapunov");
    report.check("lyapunov residual", residual, tol.lin * (1.0 + c.amax()));
    report.finalize();
    let out = serde_json::json!({
        "solution": matrix_json(&sol.x),
        "residual": residual,
        "conditioning_warning": sol.conditioning_warning,
    });
    Ok((report, out))
}

// ---------------------------------------------------------------------------
// sylvester

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SylvesterJob {
    pub a: Vec<Vec<f64>>,
    pub c: f64,
    pub c_tilde: f64,
    pub psi: Vec<f64>,
    pub nu: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

pub fn run_sylvester(job: &SylvesterJob, tol: &Tolerances) -> anyhow::Result<(Report, serde_json::Value)> {
    let spec = SylvesterSpec {
        a: analyze_operator(matrix(&job.a)?)?,
        c: job.c,
        c_tilde: job.c_tilde,
        psi: DVector::from_row_slice(&job.psi),
        nu: matrix(&job.nu)?,
        beta0: matrix(&job.beta)?,
    };
    let verdict = solve_sylvester_system_with(&spec, tol)?;
    let mut report = Report::new("sylvester");
    if let Some(x) = &verdict.solution {
        report.check("symmetric equation residual", verdict.residual_sym, tol.lin * 10.0);
        report.check("operator equation residual", verdict.residual_op, tol.lin * 10.0);
        if let Some(cf) = verdict.closed_form_residual {
            report.check("explicit symmetric-A solution gap", cf, tol.lin);
        }
        let _ = x;
    }
    report.finalize();
    let out = serde_json::json!({
        "status": format!("{:?}", verdict.status),
        "kernel_dim": verdict.kernel_dim,
        "solution": verdict.solution.as_ref().map(matrix_json),
    });
    Ok((report, out))
}

// ---------------------------------------------------------------------------
// transform

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub phi: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    #[serde(default)]
    pub beta: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RouteSpec {
    /// L-route: systems R / R* with an explicit or generated initial triple.
    L {
        l: Vec<Vec<f64>>,
        #[serde(default)]
        init: Option<InitSpec>,
    },
    /// P-route reductions.
    P {
        variant: PVariant,
        p: Vec<Vec<f64>>,
        init_phi: Vec<f64>,
        init_gamma: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
pub struct TransformJob {
    pub seed: SeedSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(flatten)]
    pub route: RouteSpec,
}

fn default_grid() -> GridSpec {
    GridSpec {
        lo: None,
        hi: None,
        steps: None,
        half: None,
        spacing: None,
    }
}

pub struct TransformArtifacts {
    pub field: ImmersionField,
    pub data: PrincipalData,
}

pub fn run_transform(
    job: &TransformJob,
    tol: &Tolerances,
    checks: &CheckTols,
) -> anyhow::Result<(Report, TransformArtifacts)> {
    let n = job.seed.n();
    let grid = job.grid.build(n)?;
    let seed = job.seed.build(&grid)?;
    let mut report = Report::new("transform");

    let artifacts = match &job.route {
        RouteSpec::L { l, init } => {
            let op = analyze_operator(matrix(l)?)?;
            let (comb, omega) = run_l_route(&seed, &grid, &op, init.as_ref(), tol)?;
            let (r15, r21) = omega_invariants(&omega, &comb)?;
            report.check("omega symmetrized identity", r15, checks.omega);
            report.check("omega operator identity", r21, checks.omega);
            let crep = residual_comb(&comb, seed.data());
            report.check("linear system residual", crep.max(), checks.comb_residual);

            let out = apply_vectorial_ribaucour(seed.frame(), &comb, &omega, true, tol)?;
            let (data, _dbox) = ribaucour_core::ribaucour::transformed_principal_data(
                seed.data(),
                &comb,
                &omega,
                tol,
            )?;
            let drep = residual_system(&data)?;
            report.check("transformed data residual", drep.max(), checks.data_residual);
            let curv = numeric_sectional_curvature(&data, checks.v_cutoff);
            if curv.evaluated() > 0 {
                report.check(
                    "sectional curvature deviation",
                    curv.max_deviation(data.c),
                    checks.curvature,
                );
            }
            // round trip through the inverse transform
            let comb_r = comb.restrict(&out.box_lo, &out.box_hi)?;
            let omega_r = omega.restrict(&out.box_lo, &out.box_hi)?;
            let (inv_comb, inv_omega) = inverse_transform_data(&comb_r, &omega_r)?;
            let back = apply_vectorial_ribaucour(&out.field, &inv_comb, &inv_omega, false, tol)?;
            let mut gap = 0.0_f64;
            for (sub, &mid) in back.index_map.iter().enumerate() {
                let orig = out.index_map[mid];
                for (a, b) in back.field.f.at(sub).iter().zip(seed.frame().f.at(orig)) {
                    gap = gap.max((a - b).abs());
                }
            }
            report.check("inverse round trip", gap, checks.roundtrip);
            TransformArtifacts {
                field: out.field,
                data,
            }
        }
        RouteSpec::P {
            variant,
            p,
            init_phi,
            init_gamma,
        } => {
            let pspec = PTransformSpec {
                p: analyze_operator(matrix(p)?)?,
                variant: *variant,
                c: match variant {
                    PVariant::Horizontal => seed.data().c,
                    _ => 0.0,
                },
                init_phi: init_phi.clone(),
                init_gamma: init_gamma.clone(),
            };
            let comb = integrate_system_p(seed.data(), &grid, &grid.center(), &pspec, &order(n), tol)?;
            let omega = omega_from_lyapunov(&comb, &pspec, tol)?;
            let crep = residual_comb(&comb, seed.data());
            report.check("linear system residual", crep.max(), checks.comb_residual);
            let (r15, r21) = omega_invariants(&omega, &comb)?;
            report.check("omega symmetrized identity", r15, checks.omega);
            report.check("omega operator identity", r21, checks.omega);
            report.check("T omega symmetry", t_omega_defect(&omega, &pspec)?, checks.t_omega);
            // cross-check the algebraic Omega against its integrated version
            let o2 = integrate_omega(&comb, seed.data(), &omega.base_value, &grid.center(), &order(n))?;
            let mut cross = 0.0_f64;
            for node in grid.iter_flat() {
                for (a, b) in omega.omega.at(node).iter().zip(o2.omega.at(node)) {
                    cross = cross.max((a - b).abs());
                }
            }
            report.check("omega algebraic vs integrated", cross, checks.omega);

            let (out, data, _dbox) = match variant {
                PVariant::PStar => apply_pstar_transform(
                    seed.frame(),
                    seed.data(),
                    &comb,
                    &omega,
                    &pspec,
                    true,
                    tol,
                )?,
                _ => apply_p_transform(
                    seed.frame(),
                    seed.data(),
                    &comb,
                    &omega,
                    &pspec,
                    true,
                    tol,
                )?,
            };
            let drep = residual_system(&data)?;
            report.check("transformed data residual", drep.max(), checks.data_residual);
            match variant {
                PVariant::Horizontal => {
                    report.check("horizontality", check_horizontal(&data), checks.lagrangian);
                }
                _ => {
                    report.check("h symmetry", check_lagrangian(&data), checks.lagrangian);
                }
            }
            if *variant == PVariant::PStar {
                report.check("sphere containment", sphere_deviation_data(&data), checks.sphere);
                report.check(
                    "sphere containment (immersion)",
                    sphere_deviation_field(&out.field),
                    checks.roundtrip,
                );
                report.check(
                    "conservation of phi + sum v_i P^t gamma_i",
                    pstar_conservation_defect(&comb, seed.data(), &pspec),
                    checks.omega,
                );
            }
            let curv = numeric_sectional_curvature(&data, checks.v_cutoff);
            if curv.evaluated() > 0 {
                report.check(
                    "sectional curvature deviation",
                    curv.max_deviation(data.c),
                    checks.curvature,
                );
            }
            TransformArtifacts {
                field: out.field,
                data,
            }
        }
    };
    report.finalize();
    Ok((report, artifacts))
}

fn order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn l_init(
    seed: &BuiltSeed,
    op: &Operator,
    init: Option<&InitSpec>,
    grid: &Grid,
) -> anyhow::Result<CombInit> {
    if let Some(spec) = init {
        return Ok(CombInit {
            phi0: spec.phi.clone(),
            gamma0: spec.gamma.clone(),
            beta0: spec.beta.clone(),
        });
    }
    let data = seed.data();
    let (psi, nu, beta) = generate_admissible_triple(op, data.c, data.c_tilde, data.n, data.p)?;
    let _ = grid;
    Ok(CombInit {
        phi0: psi.iter().cloned().collect(),
        gamma0: (0..nu.nrows())
            .map(|i| nu.row(i).iter().cloned().collect())
            .collect(),
        beta0: (0..beta.nrows())
            .map(|r| beta.row(r).iter().cloned().collect())
            .collect(),
    })
}

fn run_l_route(
    seed: &BuiltSeed,
    grid: &Grid,
    op: &Operator,
    init: Option<&InitSpec>,
    tol: &Tolerances,
) -> anyhow::Result<(CombescureData, OmegaField)> {
    let n = seed.data().n;
    let init = l_init(seed, op, init, grid)?;
    let comb = match seed.data().kind {
        PrincipalKind::LagrangianPair | PrincipalKind::FlatPair => {
            integrate_system_r(seed.data(), grid, &grid.center(), op, &init, &order(n), tol)?
        }
        PrincipalKind::CurvedTriple => {
            integrate_system_rstar(seed.data(), grid, &grid.center(), op, &init, &order(n), tol)?
        }
        other => bail!("L-route does not support seed kind {other:?}; use the P route"),
    };
    let om0 = omega_base_value(&comb, &grid.center(), tol)?;
    let omega = integrate_omega(&comb, seed.data(), &om0, &grid.center(), &order(n))?;
    Ok((comb, omega))
}

// ---------------------------------------------------------------------------
// cube

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarStepSpec {
    pub value: f64,
    #[serde(default)]
    pub init: Option<InitSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeJob {
    pub seed: SeedSpec,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    pub kind: CubeKind,
    pub scalars: Vec<ScalarStepSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CubeKind {
    L,
    P,
}

pub struct CubeArtifacts {
    pub cube: ribaucour_core::bianchi::BianchiCube,
    pub manifest: serde_json::Value,
}

pub fn run_cube(
    job: &CubeJob,
    tol: &Tolerances,
    checks: &CheckTols,
) -> anyhow::Result<(Report, CubeArtifacts)> {
    let n = job.seed.n();
    let grid = job.grid.build(n)?;
    let seed = job.seed.build(&grid)?;
    let mut report = Report::new("cube");

    let mut scalars = Vec::new();
    for step in &job.scalars {
        match job.kind {
            CubeKind::L => {
                let op = analyze_operator(DMatrix::from_row_slice(1, 1, &[step.value]))?;
                let init = l_init(&seed, &op, step.init.as_ref(), &grid)?;
                let comb = match seed.data().kind {
                    PrincipalKind::CurvedTriple => integrate_system_rstar(
                        seed.data(),
                        &grid,
                        &grid.center(),
                        &op,
                        &init,
                        &order(n),
                        tol,
                    )?,
                    _ => integrate_system_r(
                        seed.data(),
                        &grid,
                        &grid.center(),
                        &op,
                        &init,
                        &order(n),
                        tol,
                    )?,
                };
                scalars.push(comb);
            }
            CubeKind::P => {
                let horizontal = matches!(
                    seed.data().kind,
                    PrincipalKind::HorizontalPair | PrincipalKind::HorizontalTriple
                );
                let init = step
                    .init
                    .clone()
                    .ok_or_else(|| anyhow!("P-cube scalar steps need explicit init"))?;
                let pspec = PTransformSpec {
                    p: analyze_operator(DMatrix::from_row_slice(1, 1, &[step.value]))?,
                    variant: if horizontal {
                        PVariant::Horizontal
                    } else {
                        PVariant::PStar
                    },
                    c: if horizontal { seed.data().c } else { 0.0 },
                    init_phi: init.phi.clone(),
                    init_gamma: init.gamma.clone(),
                };
                scalars.push(integrate_system_p(
                    seed.data(),
                    &grid,
                    &grid.center(),
                    &pspec,
                    &order(n),
                    tol,
                )?);
            }
        }
    }

    let cube = match job.kind {
        CubeKind::L => build_cube_l(&scalars, seed.frame(), seed.data(), tol)?,
        CubeKind::P => build_cube_p(&scalars, seed.frame(), seed.data(), tol)?,
    };
    report.check("omega diagonal identity", omega_diagonal_defect(&cube), checks.t_omega);
    let (pi, skipped) = path_independence_defect(&cube, seed.frame(), tol)?;
    report.check("path independence", pi, checks.roundtrip);
    report.note("path independence skipped nodes", skipped as f64);

    let mut vertex_rows = Vec::new();
    for vertex in cube.vertices.values() {
        let drep = residual_system(&vertex.data)?;
        let label = format!("{:?}", vertex.subset.iter().map(|i| i + 1).collect::<Vec<_>>());
        report.check(
            &format!("vertex {label} data residual"),
            drep.max(),
            checks.data_residual,
        );
        let curv = numeric_sectional_curvature(&vertex.data, 1e-1);
        if curv.evaluated() > 0 {
            report.check(
                &format!("vertex {label} curvature"),
                curv.max_deviation(vertex.data.c),
                checks.curvature,
            );
        }
        let class = match vertex.data.kind {
            PrincipalKind::HorizontalTriple | PrincipalKind::HorizontalPair => {
                check_horizontal(&vertex.data)
            }
            PrincipalKind::LagrangianPair => check_lagrangian(&vertex.data),
            _ => 0.0,
        };
        if vertex.data.kind == PrincipalKind::LagrangianPair
            || vertex.data.kind == PrincipalKind::HorizontalTriple
        {
            report.check(&format!("vertex {label} class check"), class, checks.lagrangian);
        }
        vertex_rows.push(serde_json::json!({
            "subset": vertex.subset.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "data_residual": drep.max(),
            "class_check": class,
            "box_lo": vertex.data_box.box_lo,
            "box_hi": vertex.data_box.box_hi,
        }));
    }
    report.finalize();
    let manifest = serde_json::json!({
        "values": cube.values,
        "vertices": vertex_rows,
        "path_independence": pi,
        "path_independence_skipped": skipped,
    });
    Ok((report, CubeArtifacts { cube, manifest }))
}

// ---------------------------------------------------------------------------
// vacuum demo

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumDemoJob {
    #[serde(default = "default_demo_n")]
    pub n: usize,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_demo_p")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_true")]
    pub cube: bool,
}

fn default_demo_n() -> usize {
    2
}
fn default_demo_p() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_true() -> bool {
    true
}

impl Default for VacuumDemoJob {
    fn default() -> Self {
        VacuumDemoJob {
            n: 2,
            grid: default_grid(),
            p_values: default_demo_p(),
            cube: true,
        }
    }
}

pub struct DemoArtifacts {
    pub seed: VacuumSeed,
    pub scalars: Vec<(f64, ImmersionField)>,
    pub nondiag: ImmersionField,
    pub cube: Option<CubeArtifacts>,
}

pub fn run_vacuum_demo(
    job: &VacuumDemoJob,
    tol: &Tolerances,
    checks: &CheckTols,
) -> anyhow::Result<(Report, DemoArtifacts)> {
    let n = job.n;
    let grid = job.grid.build(n)?;
    let seed = vacuum_seed(n, &grid)?;
    let mut report = Report::new("vacuum-demo");

    // scalar transforms vs their closed forms
    let mut scalars = Vec::new();
    for &p in &job.p_values {
        let pspec = PTransformSpec {
            p: analyze_operator(DMatrix::from_row_slice(1, 1, &[p]))?,
            variant: PVariant::PStar,
            c: 0.0,
            init_phi: vec![-p],
            init_gamma: vec![vec![1.0]; n],
        };
        let comb = integrate_system_p(&seed.data, &grid, &grid.center(), &pspec, &order(n), tol)?;
        let omega = omega_from_lyapunov(&comb, &pspec, tol)?;
        let (out, data, _) =
            apply_pstar_transform(&seed.frame, &seed.data, &comb, &omega, &pspec, false, tol)?;
        let oracle = scalar_p_closed_form(p, &grid, n)?;
        let mut gap = 0.0_f64;
        for (sub, &node) in out.index_map.iter().enumerate() {
            for (a, b) in out.field.f.at(sub).iter().zip(oracle.f.at(node)) {
                gap = gap.max((a - b).abs());
            }
        }
        report.check(&format!("scalar P = {p} closed-form gap"), gap, checks.closed_form);
        report.check(
            &format!("scalar P = {p} sphere containment"),
            sphere_deviation_data(&data),
            checks.sphere,
        );
        scalars.push((p, out.field));
    }

    // non-diagonalizable transform vs its closed form
    let pspec = PTransformSpec {
        p: analyze_operator(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, -1.0, 1.0]))?,
        variant: PVariant::PStar,
        c: 0.0,
        init_phi: vec![-1.0, -1.0],
        init_gamma: vec![vec![1.0, 0.0]; n],
    };
    let comb = integrate_system_p(&seed.data, &grid, &grid.center(), &pspec, &order(n), tol)?;
    let omega = omega_from_lyapunov(&comb, &pspec, tol)?;
    let (out, data, _) =
        apply_pstar_transform(&seed.frame, &seed.data, &comb, &omega, &pspec, false, tol)?;
    let (oracle, flagged) = nondiag_closed_form(&grid, n)?;
    let mut gap = 0.0_f64;
    if flagged.is_empty() {
        for (sub, &node) in out.index_map.iter().enumerate() {
            for (a, b) in out.field.f.at(sub).iter().zip(oracle.f.at(node)) {
                gap = gap.max((a - b).abs());
            }
        }
    }
    report.check("non-diagonalizable closed-form gap", gap, checks.closed_form);
    report.check(
        "non-diagonalizable sphere containment",
        sphere_deviation_data(&data),
        checks.sphere,
    );
    report.check("non-diagonalizable h symmetry", check_lagrangian(&data), checks.lagrangian);

    // optional cube over the scalar transforms
    let cube = if job.cube && job.p_values.len() >= 2 {
        let cube_job = CubeJob {
            seed: SeedSpec::Vacuum { n },
            grid: job.grid.clone(),
            kind: CubeKind::P,
            scalars: job
                .p_values
                .iter()
                .map(|&p| ScalarStepSpec {
                    value: p,
                    init: Some(InitSpec {
                        phi: vec![-p],
                        gamma: vec![vec![1.0]; n],
                        beta: Vec::new(),
                    }),
                })
                .collect(),
        };
        let (cube_report, artifacts) = run_cube(&cube_job, tol, checks)?;
        for entry in cube_report.invariants {
            report.invariants.push(entry);
        }
        Some(artifacts)
    } else {
        None
    };

    report.finalize();
    Ok((
        report,
        DemoArtifacts {
            seed,
            scalars,
            nondiag: out.field,
            cube,
        },
    ))
}

// ---------------------------------------------------------------------------
// output writing

pub fn write_immersion(
    dir: &Path,
    name: &str,
    field: &ImmersionField,
    format: Format,
) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = match format {
        Format::Csv => {
            let p = dir.join(format!("{name}.csv"));
            std::fs::write(&p, export::vec_field_csv(&field.grid, "f", &field.f))?;
            p
        }
        Format::Json => {
            let p = dir.join(format!("{name}.json"));
            let cols: Vec<(String, ScalarField)> = (0..field.ambient_dim)
                .map(|c| {
                    (
                        format!("f_{c}"),
                        ScalarField(
                            (0..field.grid.len()).map(|node| field.f.at(node)[c]).collect(),
                        ),
                    )
                })
                .collect();
            let refs: Vec<(&str, &ScalarField)> =
                cols.iter().map(|(n, f)| (n.as_str(), f)).collect();
            std::fs::write(
                &p,
                serde_json::to_string(&export::fields_json(&field.grid, &refs))?,
            )?;
            p
        }
        Format::Obj => {
            let p = dir.join(format!("{name}.obj"));
            std::fs::write(&p, export::immersion_obj(field, &[0, 1, 2])?)?;
            p
        }
    };
    Ok(path)
}

pub fn write_data_fields(dir: &Path, name: &str, data: &PrincipalData) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut cols: Vec<(String, &ScalarField)> = Vec::new();
    for (i, f) in data.v.iter().enumerate() {
        cols.push((format!("v{}", i + 1), f));
    }
    for i in 0..data.n {
        for j in 0..data.n {
            if i != j {
                cols.push((format!("h{}{}", i + 1, j + 1), data.h(i, j)));
            }
        }
    }
    if let Some(rho) = &data.rho {
        for (i, f) in rho.iter().enumerate() {
            cols.push((format!("rho{}", i + 1), f));
        }
    }
    let refs: Vec<(&str, &ScalarField)> = cols.iter().map(|(n, f)| (n.as_str(), *f)).collect();
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, export::scalar_fields_csv(&data.grid, &refs))?;
    Ok(path)
}

pub fn parse_spec<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading spec {}", path.display()))?;
    let value: T = serde_json::from_str(&text).with_context(|| "parsing job spec")?;
    Ok(value)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyJob {
    /// Grid half-width for the pipeline checks (default 0.5).
    #[serde(default)]
    pub half: Option<f64>,
    /// Grid spacing (default 0.02).
    #[serde(default)]
    pub spacing: Option<f64>,
}

/// A fixed-seed verification battery over the solvers and the three pipeline
/// families, at a desk-scale grid.
pub fn run_verify(
    job: &VerifyJob,
    tol: &Tolerances,
    checks: &CheckTols,
) -> anyhow::Result<Report> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut report = Report::new("verify");

    // Lyapunov solves on shifted random spectra
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let k = rng.gen_range(1..=5);
        let mut m = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let p = analyze_operator(m.clone() + DMatrix::identity(k, k) * (2.0 + k as f64))?;
        let mut c = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                c[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let sol = solve_lyapunov_with(&p, &c, tol)?;
        let res = (p.entries.transpose() * &sol.x + &sol.x * &p.entries - &c).amax();
        worst = worst.max(res / (1.0 + c.amax()));
    }
    report.check("lyapunov residuals (50 random)", worst, tol.lin);

    // Sylvester admissible triples and the explicit symmetric solution
    let mut worst = 0.0_f64;
    for k in 2..=4 {
        let mut alphas = Vec::new();
        for i in 0..k {
            alphas.push(0.2 + 0.6 * (i as f64) / (k as f64 - 1.0));
        }
        let a = analyze_operator(DMatrix::from_diagonal(&DVector::from_vec(alphas)))?;
        let (psi, nu, beta) = generate_admissible_triple(&a, 0.0, 1.0, k, k)?;
        let spec = SylvesterSpec {
            a,
            c: 0.0,
            c_tilde: 1.0,
            psi,
            nu,
            beta0: beta,
        };
        let verdict = solve_sylvester_system_with(&spec, tol)?;
        if verdict.solution.is_none() {
            bail!("verification triple unexpectedly inadmissible");
        }
        worst = worst.max(verdict.residual_sym.max(verdict.residual_op));
        if let Some(cf) = verdict.closed_form_residual {
            worst = worst.max(cf);
        }
    }
    report.check("sylvester residuals (k = 2..4)", worst, tol.lin * 10.0);

    // scalar and non-diagonalizable vacuum pipelines at a coarse grid
    let demo = VacuumDemoJob {
        n: 2,
        grid: GridSpec {
            lo: None,
            hi: None,
            steps: None,
            half: Some(job.half.unwrap_or(0.5)),
            spacing: Some(job.spacing.unwrap_or(0.02)),
        },
        p_values: vec![1.0, 2.0],
        cube: true,
    };
    let mut coarse = *checks;
    // RK4 truncation scales as spacing^4; 0.02 doubles the spacing of the
    // reference tolerances
    coarse.closed_form = checks.closed_form * 16.0;
    coarse.curvature = checks.curvature;
    let (demo_report, _) = run_vacuum_demo(&demo, tol, &coarse)?;
    for entry in demo_report.invariants {
        report.invariants.push(entry);
    }

    // curved L-transform with generated initial data
    let tj = TransformJob {
        seed: SeedSpec::Curved { n: 2 },
        grid: GridSpec {
            lo: None,
            hi: None,
            steps: None,
            half: Some(job.half.unwrap_or(0.5)),
            spacing: Some(job.spacing.unwrap_or(0.02)),
        },
        route: RouteSpec::L {
            l: vec![vec![0.5]],
            init: None,
        },
    };
    let mut coarse = *checks;
    coarse.comb_residual *= 16.0;
    coarse.data_residual *= 16.0;
    coarse.curvature *= 16.0;
    let (t_report, _) = run_transform(&tj, tol, &coarse)?;
    for entry in t_report.invariants {
        report.invariants.push(entry);
    }

    report.finalize();
    Ok(report)
}
