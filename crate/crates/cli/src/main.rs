//! Batch front-end: parse a JSON job spec, run the requested pipeline, write
//! geometry files and a verification report.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 input error, 3 numerical
//! breakdown (singular Omega, divergence, spectrum clashes).

mod job;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use job::{CheckTols, Format};
use ribaucour_core::Tolerances;

#[derive(Parser)]
#[command(
    name = "ribaucour",
    about = "Constant-curvature submanifold construction via vectorial Ribaucour transforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON job specification.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Output directory for geometry files and the report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Tolerance overrides, repeatable: --tol name=value.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,

    /// Geometry output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve P^t X + X P = C from a JSON spec {"p": [[..]], "c": [[..]]}.
    Lyapunov,
    /// Solve the admissibility system from {"a", "c", "c_tilde", "psi", "nu", "beta"}.
    Sylvester,
    /// Run one transform pipeline (L or P route) over a seed.
    Transform,
    /// Build a Bianchi cube from scalar transforms.
    Cube,
    /// Vacuum showcase: seed, scalar transforms, the non-diagonalizable
    /// transform, and optionally a cube.
    VacuumDemo,
    /// Fixed-seed verification battery over solvers and pipelines.
    Verify,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| "expected name=value".to_string())?;
    let v: f64 = value.parse().map_err(|e| format!("bad value: {e}"))?;
    Ok((name.to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Input problems exit with 2, numerical breakdowns with 3.
fn classify(err: &anyhow::Error) -> u8 {
    use ribaucour_core::Error as E;
    if let Some(core) = err.downcast_ref::<E>() {
        return match core {
            E::SpectrumClash { .. }
            | E::SingularOperator { .. }
            | E::SingularOmega(_)
            | E::IntegrationDiverged(_)
            | E::IntegrationDrift { .. }
            | E::OmegaInvariant(_)
            | E::EigenFailure(_)
            | E::EmptyDomain(_) => 3,
            _ => 2,
        };
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut tol = Tolerances::default();
    let mut checks = CheckTols::default();
    for (name, value) in &cli.tol {
        let known = tol.set(name, *value) | checks.set(name, *value);
        if !known {
            anyhow::bail!("unknown tolerance name: {name}");
        }
    }
    let spec_path = |what: &str| -> anyhow::Result<&PathBuf> {
        cli.spec
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("{what} requires --spec <file>"))
    };

    let report = match &cli.command {
        Command::Lyapunov => {
            let spec: job::LyapunovJob = job::parse_spec(spec_path("lyapunov")?)?;
            let (report, solution) = job::run_lyapunov(&spec, &tol)?;
            println!("{}", serde_json::to_string_pretty(&solution)?);
            report
        }
        Command::Sylvester => {
            let spec: job::SylvesterJob = job::parse_spec(spec_path("sylvester")?)?;
            let (report, solution) = job::run_sylvester(&spec, &tol)?;
            println!("{}", serde_json::to_string_pretty(&solution)?);
            report
        }
        Command::Transform => {
            let spec: job::TransformJob = job::parse_spec(spec_path("transform")?)?;
            let (mut report, artifacts) = job::run_transform(&spec, &tol, &checks)?;
            if let Some(dir) = &cli.out {
                let p = job::write_immersion(dir, "immersion", &artifacts.field, cli.format)?;
                report.outputs.push(p.display().to_string());
                let p = job::write_data_fields(dir, "data", &artifacts.data)?;
                report.outputs.push(p.display().to_string());
            }
            print_summary(&report);
            report
        }
        Command::Cube => {
            let spec: job::CubeJob = job::parse_spec(spec_path("cube")?)?;
            let (mut report, artifacts) = job::run_cube(&spec, &tol, &checks)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                for vertex in artifacts.cube.vertices.values() {
                    let label: Vec<String> =
                        vertex.subset.iter().map(|i| (i + 1).to_string()).collect();
                    let name = format!("vertex_{}", label.join(""));
                    let p = job::write_immersion(dir, &name, &vertex.output.field, cli.format)?;
                    report.outputs.push(p.display().to_string());
                }
                let mp = dir.join("manifest.json");
                std::fs::write(&mp, serde_json::to_string_pretty(&artifacts.manifest)?)?;
                report.outputs.push(mp.display().to_string());
            }
            print_summary(&report);
            report
        }
        Command::VacuumDemo => {
            let spec: job::VacuumDemoJob = match &cli.spec {
                Some(path) => job::parse_spec(path)?,
                None => job::VacuumDemoJob::default(),
            };
            let (mut report, artifacts) = job::run_vacuum_demo(&spec, &tol, &checks)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                let p = job::write_immersion(dir, "seed", &artifacts.seed.frame, cli.format)?;
                report.outputs.push(p.display().to_string());
                for (pval, field) in &artifacts.scalars {
                    let name = format!("scalar_p{pval}");
                    let p = job::write_immersion(dir, &name, field, cli.format)?;
                    report.outputs.push(p.display().to_string());
                }
                let p = job::write_immersion(dir, "nondiag", &artifacts.nondiag, cli.format)?;
                report.outputs.push(p.display().to_string());
                if let Some(cube) = &artifacts.cube {
                    let mp = dir.join("cube_manifest.json");
                    std::fs::write(&mp, serde_json::to_string_pretty(&cube.manifest)?)?;
                    report.outputs.push(mp.display().to_string());
                }
            }
            print_summary(&report);
            report
        }
        Command::Verify => {
            let spec: job::VerifyJob = match &cli.spec {
                Some(path) => job::parse_spec(path)?,
                None => job::VerifyJob::default(),
            };
            let report = job::run_verify(&spec, &tol, &checks)?;
            print_summary(&report);
            report
        }
    };

    if let Some(dir) = &cli.out {
        report.write(dir)?;
    }
    Ok(report.all_pass())
}

fn print_summary(report: &report::Report) {
    for entry in &report.invariants {
        if entry.tolerance.is_finite() {
            println!(
                "{}: {:.3e} (tol {:.1e}) {}",
                entry.name,
                entry.residual,
                entry.tolerance,
                if entry.pass { "PASS" } else { "FAIL" }
            );
        } else {
            println!("{}: {:.3e}", entry.name, entry.residual);
        }
    }
    println!(
        "{}: {}",
        report.command,
        if report.all_pass() { "ok" } else { "invariant failure" }
    );
}
