use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kerr_core::fv::Solver;
use kerr_core::riemann66::solve_riemann66;
use kerr_core::riemann_tm::solve_riemann_tm;
use kerr_core::scenarios::{
    self, compare_runs, convergence_study, ExactSolution, InitialData, Reference, ScenarioConfig, SnapshotData,
};
use kerr_core::{KerrError, Vec2, Vec3};

/// Exact Riemann solvers and finite-volume runs for the Kerr model.
#[derive(Parser)]
#[command(name = "kerr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Riemann problem of a config and print its wave fan.
    Riemann {
        #[command(flatten)]
        source: Source,
        /// Write fan.csv and the exact profile at the end time here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario and write snapshots and metadata.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        /// Print the resolved config and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Convergence study of a 1D Riemann scenario.
    Converge {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exact solution the errors refer to.
        #[arg(long, default_value = "full", value_parser = parse_reference)]
        reference: Reference,
    },
    /// Distance between the final snapshots of two run directories.
    Compare { run_a: PathBuf, run_b: PathBuf },
}

#[derive(Args)]
struct Source {
    /// JSON scenario config.
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Built-in scenario: riemann1d, contact_family_m<k>, quadrant2d, pulse2d.
    #[arg(long)]
    builtin: Option<String>,
    /// Cell counts: `N` or `N,M` (for `converge`, the list of 1D counts).
    #[arg(long, value_delimiter = ',')]
    cells: Vec<usize>,
    /// godunov6, godunovTM or kerr_debye.
    #[arg(long)]
    solver: Option<Solver>,
    /// Spatial order, 1 or 2.
    #[arg(long)]
    order: Option<u8>,
}

fn parse_reference(s: &str) -> Result<Reference, String> {
    match s {
        "full" => Ok(Reference::Full),
        "tm" => Ok(Reference::Tm),
        _ => Err(format!("unknown reference `{s}` (full or tm)")),
    }
}

fn builtin(name: &str, solver: Solver) -> kerr_core::Result<ScenarioConfig> {
    let bad = || KerrError::Config {
        field: "builtin".into(),
        message: format!("unknown scenario `{name}`"),
    };
    Ok(match name {
        "riemann1d" => scenarios::riemann1d(400, solver),
        "quadrant2d" => scenarios::quadrant2d(100, solver)?,
        "pulse2d" => scenarios::pulse2d(180, 80, 45e-6, 20e-6, 150e-15, solver),
        _ => {
            let m = name
                .strip_prefix("contact_family_m")
                .and_then(|m| m.parse::<u32>().ok())
                .ok_or_else(bad)?;
            scenarios::contact_family(m, 400, solver)
        }
    })
}

impl Source {
    /// Loads the config and applies the overrides; `cells` is applied
    /// only when it names a single grid.
    fn resolve(&self, apply_cells: bool) -> anyhow::Result<ScenarioConfig> {
        let mut cfg = match (&self.config, &self.builtin) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ScenarioConfig::from_json(&text)?
            }
            (None, Some(name)) => builtin(name, self.solver.unwrap_or_default())?,
            (None, None) => bail!(KerrError::Config {
                field: "config".into(),
                message: "pass --config PATH or --builtin NAME".into(),
            }),
        };
        if let Some(s) = self.solver {
            cfg.scheme.solver = s;
        }
        if let Some(o) = self.order {
            cfg.scheme.order = o;
        }
        if apply_cells {
            match self.cells[..] {
                [] => {}
                [n] => {
                    cfg.grid.nx = n;
                    if cfg.grid.ny.is_some() {
                        cfg.grid.ny = Some(n);
                    }
                }
                [n, m] if cfg.grid.ny.is_some() => {
                    cfg.grid.nx = n;
                    cfg.grid.ny = Some(m);
                }
                _ => bail!(KerrError::Config {
                    field: "cells".into(),
                    message: "expected N for 1D grids or N[,M] for 2D grids".into(),
                }),
            }
        }
        if let (Some(name), None) = (&self.builtin, &self.config) {
            let cells = match cfg.grid.ny {
                Some(ny) => format!("{}x{ny}", cfg.grid.nx),
                None => cfg.grid.nx.to_string(),
            };
            cfg.name = format!("{name}_{cells}_{}", cfg.scheme.solver.name());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn riemann(source: &Source, out: Option<&Path>) -> anyhow::Result<()> {
    let cfg = source.resolve(true)?;
    let InitialData::Riemann { left, right, .. } = &cfg.initial_data else {
        bail!(KerrError::Config {
            field: "initial_data".into(),
            message: "the riemann verb needs Riemann data".into(),
        });
    };
    let m = &cfg.material;
    let (a, b) = (left.to_state(m), right.to_state(m));
    let (fan_csv, exact) = if cfg.scheme.solver == Solver::GodunovTm {
        let fan = solve_riemann_tm(&a.to_tm(), &b.to_tm(), Vec2::new(1.0, 0.0), m)?;
        (fan.to_csv(), ExactSolution::tm(&cfg)?)
    } else {
        let fan = solve_riemann66(&a, &b, Vec3::E1, m)?;
        (fan.to_csv(), ExactSolution::full(&cfg)?)
    };
    print!("{fan_csv}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("fan.csv"), &fan_csv)?;
        let grid = cfg.grid.build()?;
        let t = cfg.end_time_s;
        let field = kerr_core::fv::CellField::from_fn(&grid, |x, _| exact.sample(x, t, m));
        let mut text = format!("# exact solution at t = {t:.16e}\n");
        text.push_str(&kerr_core::fv::snapshot_csv(&field, &grid, m, false));
        std::fs::write(dir.join("exact.csv"), text)?;
    }
    Ok(())
}

fn run(source: &Source, out: &Path, print_config: bool) -> anyhow::Result<ExitCode> {
    let cfg = source.resolve(true)?;
    if print_config {
        println!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }
    let run = scenarios::run_scenario(&cfg)?;
    run.write_to_dir(out)?;
    if let Some((snap, err)) = &run.failure {
        eprintln!(
            "error: {err}; last good state (t = {:e}) written to last_good.csv",
            snap.time_s
        );
        return Ok(ExitCode::from(3));
    }
    eprintln!(
        "{}: {} steps of {:e} s, output in {}",
        cfg.name,
        run.metadata.steps,
        run.metadata.dt_s,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn converge(source: &Source, out: Option<&Path>, reference: Reference) -> anyhow::Result<()> {
    let cfg = source.resolve(false)?;
    let cells = if source.cells.is_empty() {
        vec![400, 800, 1600]
    } else {
        source.cells.clone()
    };
    let table = convergence_study(&cfg, &cells, reference)?;
    let csv = table.to_csv();
    print!("{csv}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("convergence.csv"), csv)?;
    }
    Ok(())
}

fn compare(a: &Path, b: &Path) -> anyhow::Result<()> {
    let load = |dir: &Path| -> anyhow::Result<SnapshotData> {
        let path = dir.join("final.csv");
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(SnapshotData::parse_csv(&text)?)
    };
    let report = compare_runs(&load(a)?, &load(b)?)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<KerrError>() {
        Some(KerrError::Config { .. } | KerrError::GridMismatch(_)) => ExitCode::from(2),
        Some(KerrError::BlowUp { .. }) => ExitCode::from(3),
        _ => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Riemann { source, out } => riemann(source, out.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Run {
            source,
            out,
            print_config,
        } => run(source, out, *print_config),
        Command::Converge { source, out, reference } => {
            converge(source, out.as_deref(), *reference).map(|_| ExitCode::SUCCESS)
        }
        Command::Compare { run_a, run_b } => compare(run_a, run_b).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        exit_code(&e)
    })
}
