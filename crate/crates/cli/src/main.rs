//! `orbivortex`: solves, scans and checks for abelian vortices on tori,
//! spheres and footballs.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::Overrides;

/// Exit status for malformed input.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "orbivortex", version, about = "Abelian vortices on orbifold Riemann surfaces")]
struct Cli {
    /// Worker threads for parallel scans and probes; overrides ORBIVORTEX_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    a: Option<i64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// One value `n` or two values `n_theta,n_phi`.
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,
    /// Report path; overrides `output.report`.
    #[arg(long)]
    report: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            a: self.a,
            tau: self.tau,
            eps: self.eps,
            seed: self.seed,
            resolution: self.resolution.clone(),
            report: self.report.clone(),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SeifertArgs {
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, value_delimiter = ',', conflicts_with = "d")]
    beta: Option<Vec<i64>>,
    /// Cone orders.
    #[arg(long, value_delimiter = ',')]
    m: Vec<i64>,
    /// Weight of the circle action; defaults to the least common multiple of
    /// the cone orders.
    #[arg(long)]
    a: Option<i64>,
    /// Degree as `p`, `p/q` or a decimal, instead of `b` and `beta`.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Orbifold volume; defaults to `4 pi`.
    #[arg(long)]
    vol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    genus: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the vortex equations for a divisor.
    Solve(RunArgs),
    /// Exact degree and moduli status of a Seifert invariant.
    Seifert(SeifertArgs),
    /// Energy identity and invariance checks on smooth configurations.
    EnergyCheck(RunArgs),
    /// Solve along a decreasing family of eps.
    Adiabatic(RunArgs),
    /// Solve across a grid of tau.
    Scan(RunArgs),
    /// Round-trip random divisors.
    Probe(RunArgs),
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("ORBIVORTEX_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Failure::Usage(format!("ORBIVORTEX_THREADS must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Seifert(a) => commands::seifert(a),
        Command::EnergyCheck(a) => commands::energy_check(a),
        Command::Adiabatic(a) => commands::adiabatic(a),
        Command::Scan(a) => commands::scan(a),
        Command::Probe(a) => commands::probe(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("orbivortex: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
