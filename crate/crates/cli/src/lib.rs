#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Command-line front end: reads a JSON run configuration, runs one
//! scenario and writes data files, optional SVG plots and `summary.json`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a physics check
//! failed.

pub mod config;
pub mod error;
pub mod plot;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

pub use config::{parse_config, RunConfig, Scenario};
pub use error::CliError;
pub use run::{execute, Check, RunReport, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mompic", version, about = "Momentum-picture quantum trajectories and invariant checks")]
struct Cli {
    #[command(subcommand)]
    scenario: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local energy constancy over a region
    FieldScan(Overrides),
    /// One trajectory
    Evolve(Overrides),
    /// Seeded ensemble and density histograms
    Ensemble(Overrides),
    /// Wavefunction from a momentum line integral
    Reconstruct(Overrides),
    /// Two-electron invariants
    Twobody(Overrides),
    /// Finite-difference eigenstates
    Oracle(Overrides),
}

impl Command {
    fn parts(&self) -> (&'static str, &Overrides) {
        match self {
            Command::FieldScan(o) => ("field-scan", o),
            Command::Evolve(o) => ("evolve", o),
            Command::Ensemble(o) => ("ensemble", o),
            Command::Reconstruct(o) => ("reconstruct", o),
            Command::Twobody(o) => ("twobody", o),
            Command::Oracle(o) => ("oracle", o),
        }
    }
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON run configuration; the scenario's defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (ensemble)
    #[arg(long)]
    seed: Option<u64>,
    /// Time step (evolve, ensemble, twobody)
    #[arg(long)]
    dt: Option<f64>,
    /// Final time (evolve, ensemble)
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<config::Format>,
    /// Also write SVG plots
    #[arg(long)]
    svg: bool,
    /// Print the effective configuration and exit
    #[arg(long)]
    print_config: bool,
}

fn apply(cfg: &mut RunConfig, o: &Overrides) -> Result<(), CliError> {
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    if let Some(f) = o.format {
        cfg.format = f;
    }
    cfg.svg |= o.svg;
    if let Some(dt) = o.dt {
        if !(dt > 0.0) {
            return Err(CliError::Usage(format!("--dt must be > 0, got {dt}")));
        }
    }
    if let Some(t) = o.t_end {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--t-end must be > 0, got {t}")));
        }
    }
    match &mut cfg.scenario {
        Scenario::Evolve(e) => {
            if let Some(dt) = o.dt {
                e.integrator.dt = dt;
            }
            if let Some(t) = o.t_end {
                e.integrator.t_end = t;
            }
        }
        Scenario::Ensemble(e) => {
            if let Some(dt) = o.dt {
                e.ensemble.integrator.dt = dt;
            }
            if let Some(t) = o.t_end {
                e.ensemble.integrator.t_end = t;
            }
            if let Some(s) = o.seed {
                e.ensemble.seed.master_seed = s;
            }
        }
        Scenario::Twobody(t) => {
            if let Some(dt) = o.dt {
                t.dt = dt;
            }
        }
        _ => {}
    }
    let name = cfg.scenario.name();
    let takes_time = matches!(cfg.scenario, Scenario::Evolve(_) | Scenario::Ensemble(_));
    if o.seed.is_some() && !matches!(cfg.scenario, Scenario::Ensemble(_)) {
        return Err(CliError::Usage(format!("--seed does not apply to {name}")));
    }
    if o.t_end.is_some() && !takes_time {
        return Err(CliError::Usage(format!("--t-end does not apply to {name}")));
    }
    if o.dt.is_some() && !(takes_time || matches!(cfg.scenario, Scenario::Twobody(_))) {
        return Err(CliError::Usage(format!("--dt does not apply to {name}")));
    }
    Ok(())
}

/// SHA-256 of the effective configuration's JSON.
pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn load(scenario: &'static str, o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let cfg = parse_config(&text, path)?;
            if cfg.scenario.name() != scenario {
                return Err(CliError::Usage(format!(
                    "{} describes a `{}` run, not `{scenario}`",
                    path.display(),
                    cfg.scenario.name()
                )));
            }
            cfg
        }
        None => config::example(scenario).expect("every subcommand has an example"),
    };
    apply(&mut cfg, o)?;
    Ok(cfg)
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (scenario, overrides) = cli.scenario.parts();
    let cfg = match load(scenario, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if overrides.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return EXIT_OK;
    }
    match execute(&cfg) {
        Ok(report) => {
            for c in &report.checks {
                eprintln!(
                    "{}: {} (value {:e}, tolerance {:e})",
                    c.name,
                    if c.passed { "pass" } else { "FAIL" },
                    c.value,
                    c.tolerance
                );
            }
            match report.status {
                Status::Ok => EXIT_OK,
                Status::InvariantViolation => EXIT_INVARIANT,
                Status::Error => EXIT_USAGE,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
