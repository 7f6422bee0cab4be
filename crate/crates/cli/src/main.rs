use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pens::config::{parse_config, Phase, RunConfig};
use pens::diagnostics::fit_decay;
use pens::io::{load_any_snapshot, read_timeseries, write_table, write_timeseries, AnySnapshot, KineticSnapshot};
use pens::presets::{preset, PRESET_NAMES};
use pens::run::{heat_table, kinetic_table, run_fluid, run_heat, run_kinetic};
use pens::verify::check_config;

#[derive(Parser)]
#[command(name = "pens", version, about = "Coupled pressureless Euler / Navier-Stokes simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Named preset (see `pens presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a key, e.g. `--set time.t_end=5`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write its time series.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory, created if missing.
        #[arg(long, default_value = "pens-out")]
        out: PathBuf,
    },
    /// Run the acceptance checks belonging to a preset.
    Check {
        #[command(flatten)]
        source: Source,
        /// Which preset's checks to apply to a `--config` file.
        #[arg(long)]
        criteria: Option<String>,
    },
    /// Fit `value ~ C (1 + t)^(-alpha)` to a CSV column.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        /// Fit window `t0,t1`.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Fit the square of the column.
        #[arg(long)]
        square: bool,
    },
    /// Print the canonical form of a configuration.
    Dump {
        #[command(flatten)]
        source: Source,
    },
    /// List preset names.
    Presets,
    /// Summarize a snapshot file.
    Inspect { snapshot: PathBuf },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected t0,t1")?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn load(source: &Source) -> Result<(Option<String>, RunConfig)> {
    let (name, base) = match (&source.preset, &source.config) {
        (Some(name), None) => {
            let c = preset(name).with_context(|| format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", ")))?;
            (Some(name.clone()), c)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (None, parse_config(&text).with_context(|| format!("in {}", path.display()))?)
        }
        _ => bail!("give exactly one of --preset or --config"),
    };
    Ok((name, base.with_overrides(&source.overrides)?))
}

fn run(config: &RunConfig, out: &Path) -> Result<bool> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.txt"), config.dump())?;
    match config.phase {
        Phase::Kinetic => {
            let runs = run_kinetic(config)?;
            write_table(&out.join("kinetic.csv"), &kinetic_table(&runs))?;
            if config.output.snapshot_every > 0 {
                for r in &runs {
                    KineticSnapshot::from_state(&r.final_state).save(&out.join(format!("kinetic_eps{}.bin", r.epsilon)))?;
                }
            }
            for r in &runs {
                println!(
                    "eps {}: deviation {:.4e}, final moment error rho {:.4e} u {:.4e}",
                    r.epsilon,
                    r.deviation_end,
                    r.errors.last().map_or(f64::NAN, |e| e.rho),
                    r.errors.last().map_or(f64::NAN, |e| e.u)
                );
            }
            Ok(true)
        }
        Phase::Heat => {
            let study = run_heat(config)?;
            write_table(&out.join("heat.csv"), &heat_table(&study))?;
            println!(
                "evolver error at t = sigma^2: {:.3e} (whole space), {:.3e} (periodic)",
                study.evolver_error, study.periodic_error
            );
            Ok(true)
        }
        _ => {
            let snapshots = (config.output.snapshot_every > 0).then_some(out);
            let r = run_fluid(config, snapshots)?;
            let csv = out.join("timeseries.csv");
            write_timeseries(&csv, &r.header, &r.records)?;
            println!("{} steps to t = {}, {} records in {}", r.steps, r.last.t, r.records.len(), csv.display());
            if let Some(e) = &r.failure {
                eprintln!("run failed: {e}");
                return Ok(false);
            }
            for p in &r.probe {
                println!(
                    "probe {:?}: predicted {:.6}, computed {:.6}",
                    &p.position[..config.grid.dim],
                    p.predicted,
                    p.computed
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { source, out } => {
            let (_, config) = load(&source)?;
            run(&config, &out)
        }
        Command::Check { source, criteria } => {
            let (name, config) = load(&source)?;
            let Some(name) = criteria.or(name) else {
                bail!("--config needs --criteria <preset name> to choose the checks");
            };
            let checks = check_config(&name, &config)?;
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Fit {
            csv,
            column,
            window,
            square,
        } => {
            let table = read_timeseries(&csv)?;
            let mut series = table
                .series(&column)
                .with_context(|| format!("{} has no column {column:?} (or no t column)", csv.display()))?;
            if square {
                for p in &mut series {
                    p.1 *= p.1;
                }
            }
            let fit = fit_decay(&column, &series, window)?;
            println!(
                "{}{}: alpha {:.6}, C {:.6e}, log residual {:.3e}, {} samples on [{}, {}]",
                column,
                if square { "^2" } else { "" },
                fit.alpha,
                fit.constant,
                fit.residual,
                fit.samples,
                window.0,
                window.1
            );
            Ok(true)
        }
        Command::Dump { source } => {
            let (_, config) = load(&source)?;
            print!("{}", config.dump());
            Ok(true)
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(true)
        }
        Command::Inspect { snapshot } => {
            match load_any_snapshot(&snapshot)? {
                AnySnapshot::Fluid(s) => {
                    let rho = s.rho_field();
                    println!(
                        "fluid snapshot: d = {}, N = {}, L = {}, t = {}, rho in [{:.6}, {:.6}], mass {:.12e}",
                        s.grid.dim(),
                        s.grid.n(),
                        s.grid.length(),
                        s.t,
                        rho.min(),
                        rho.max(),
                        rho.integral()
                    );
                }
                AnySnapshot::Kinetic(s) => {
                    println!(
                        "kinetic snapshot: Nx = {}, Nxi = {}, L = {}, Xi = {}, eps = {}, t = {}",
                        s.nx, s.nxi, s.length, s.xi_max, s.epsilon, s.t
                    );
                }
            }
            Ok(true)
        }
    }
}
