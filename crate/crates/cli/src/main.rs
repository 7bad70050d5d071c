//! `qwork`: work statistics of driven bosonic modes from a scenario file.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 invalid configuration or
//! usage, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Format;
use output::{write_table, Provenance};

#[derive(Debug, Parser)]
#[command(name = "qwork", version, about = "Work statistics of driven bosonic modes")]
struct Cli {
    /// Scenario file (JSON); the bundled default scenario if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a configuration leaf, e.g. `--set evaluation.t=6`.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    set: Vec<String>,

    /// Output format, overriding `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output file, overriding `output.path`; standard output otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drive functionals ζ, ξ, α, η, z, θ over the time grid.
    Drive,
    /// Characteristic functions on the ν grid.
    Cf,
    /// Discrete work distributions.
    Dist,
    /// Transition weights q_s(n, z).
    Weights(WeightArgs),
    /// Work cumulants.
    Moments,
    /// Jarzynski equality check.
    Jarzynski,
    /// Casimir energies and free-energy differences.
    Casimir,
    /// Closed forms against the Fock-space oracle.
    Verify,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct WeightArgs {
    /// Initial occupation n.
    #[arg(long)]
    n: Option<u32>,
    /// Largest rapidity on the grid.
    #[arg(long = "z-max")]
    z_max: Option<f64>,
    /// Number of grid points in [0, z_max].
    #[arg(long = "z-points")]
    z_points: Option<usize>,
    #[arg(long = "s-min")]
    s_min: Option<i64>,
    #[arg(long = "s-max")]
    s_max: Option<i64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Drive => "drive",
            Command::Cf => "cf",
            Command::Dist => "dist",
            Command::Weights(_) => "weights",
            Command::Moments => "moments",
            Command::Jarzynski => "jarzynski",
            Command::Casimir => "casimir",
            Command::Verify => "verify",
        }
    }

    /// Subcommand flags expressed as configuration overrides.
    fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Command::Weights(w) = self {
            let mut put = |key: &str, v: Option<String>| {
                if let Some(v) = v {
                    out.push(format!("evaluation.weights.{key}={v}"));
                }
            };
            put("n", w.n.map(|v| v.to_string()));
            put("z_max", w.z_max.map(|v| format!("{v:?}")));
            put("z_points", w.z_points.map(|v| v.to_string()));
            put("s_min", w.s_min.map(|v| v.to_string()));
            put("s_max", w.s_max.map(|v| v.to_string()));
        }
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.set.clone();
    overrides.extend(cli.command.overrides());
    let loaded = match config::load(cli.config.as_deref(), &overrides) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("qwork: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = &loaded.config;
    let result = match cli.command {
        Command::Drive => commands::drive(cfg),
        Command::Cf => commands::cf(cfg),
        Command::Dist => commands::dist(cfg),
        Command::Weights(_) => commands::weights(cfg),
        Command::Moments => commands::moments(cfg),
        Command::Jarzynski => commands::jarzynski_cmd(cfg),
        Command::Casimir => commands::casimir(cfg),
        Command::Verify => commands::verify(cfg),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("qwork: {} failed: {e}", cli.command.name());
            return ExitCode::from(3);
        }
    };
    let format = cli.format.unwrap_or(cfg.output.format);
    let prov = Provenance {
        command: cli.command.name(),
        config_sha256: loaded.sha256.clone(),
    };
    let path = cli.output.or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    let written = match &path {
        Some(p) => File::create(p).and_then(|f| write_table(f, format, &prov, &report.table)),
        None => write_table(io::stdout().lock(), format, &prov, &report.table),
    };
    if let Err(e) = written {
        eprintln!("qwork: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if let Some(msg) = report.failure {
        eprintln!("qwork: {} failed: {msg}", cli.command.name());
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
