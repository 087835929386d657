//! Subcommand implementations. Each returns the process exit status.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use orbivortex_core::fields::{
    energy, energy_identity, gauge_apply, topological_r, ActionData, GaugeConfig, GaugeTransform,
};
use orbivortex_core::moduli::{symmetric_product_probe, threshold_scan, ProbeSummary, ThresholdScan};
use orbivortex_core::sampling::{random_config, random_one_form, random_phase};
use orbivortex_core::seifert::{
    associated_bundle_seifert, format_rational, lifting_cokernel, moduli_status, orbifold_degree,
    parse_rational, Emptiness, SeifertData,
};
use orbivortex_core::solver::{
    adiabatic_family, critical_tau, feasibility, residual_check, solve_taubes, AdiabaticTable,
    Feasibility, ResidualCheck, SolveReport, SolveStatus,
};

use crate::config::{ConfigError, EnergyMode, Resolved, RunConfig};
use crate::report::{to_json, write_atomic, Envelope};
use crate::{RunArgs, SeifertArgs, EXIT_USAGE};

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or flags.
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(_) | Failure::Io(_) => EXIT_FAILED,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn config_failure(path: &Path, e: ConfigError) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn load(args: &RunArgs) -> Result<Resolved, Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| config_failure(&args.config, e))?;
    cfg.apply(&args.overrides())
        .map_err(|e| config_failure(&args.config, e))?;
    cfg.resolve(&text).map_err(|e| config_failure(&args.config, e))
}

fn required<T>(args: &RunArgs, value: Option<T>, key: &str) -> Result<T, Failure> {
    value.ok_or_else(|| {
        config_failure(
            &args.config,
            ConfigError::plain(format!("missing key \"{key}\"")),
        )
    })
}

fn emit<T: Serialize>(command: &str, r: &Resolved, result: T) -> Result<(), Failure> {
    let text = to_json(&Envelope::new(command, Some(&r.config), result));
    if let Some(path) = &r.config.output.report {
        write_atomic(Path::new(path), &text)
            .map_err(|e| Failure::Io(format!("cannot write {path}: {e}")))?;
    }
    print!("{text}");
    Ok(())
}

fn numerical(e: impl fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::MaxIterations | SolveStatus::Diverged => EXIT_FAILED,
    }
}

#[derive(Serialize)]
struct SolveOutput {
    status: SolveStatus,
    feasibility: Feasibility,
    tau_star: f64,
    report: SolveReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_check: Option<ResidualCheck>,
}

pub fn solve(args: &RunArgs) -> Result<u8, Failure> {
    let r = load(args)?;
    let d = r.divisor().map_err(|e| config_failure(&args.config, e))?;
    let s = &r.surface;
    let scaled = ActionData {
        a: r.action.a,
        tau: r.action.tau / (r.options.eps * r.options.eps),
    };
    let (sol, report) = solve_taubes(s, &d, &r.action, &r.options).map_err(numerical)?;
    let check = sol.as_ref().map(|sol| residual_check(s, sol, &r.action));
    if let (Some(sol), Some(dir)) = (&sol, &r.config.output.fields_dir) {
        for (name, field) in [("u", &sol.u), ("h", &sol.h), ("fsq", &sol.fsq), ("phi", &sol.phi)] {
            let path = Path::new(dir).join(format!("{name}.csv"));
            write_atomic(&path, &s.to_csv(field))
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    let status = report.status;
    let out = SolveOutput {
        status,
        feasibility: feasibility(&scaled, d.degree(), s.volume()),
        tau_star: critical_tau(r.action.a, d.degree(), s.volume() / (r.options.eps * r.options.eps)),
        report,
        residual_check: check,
    };
    emit("solve", &r, out)?;
    Ok(status_code(status))
}

#[derive(Serialize)]
struct AssociatedOutput {
    b: i64,
    beta: Vec<i64>,
    mult: Vec<i64>,
    degree: String,
}

#[derive(Serialize)]
struct SeifertOutput {
    tool: &'static str,
    version: &'static str,
    degree: String,
    status: Emptiness,
    dimension: Option<i64>,
    threshold: f64,
    boundary: bool,
    a: i64,
    tau: f64,
    vol: f64,
    associated: AssociatedOutput,
    lifting_cokernel: String,
}

pub fn seifert(args: &SeifertArgs) -> Result<u8, Failure> {
    let usage = |e: &dyn fmt::Display| Failure::Usage(e.to_string());
    let degree = match &args.d {
        Some(text) => {
            parse_rational(text).ok_or_else(|| Failure::Usage(format!("cannot parse degree {text:?}")))?
        }
        None => {
            let beta = args.beta.clone().unwrap_or_else(|| vec![0; args.m.len()]);
            let data = SeifertData::new(args.b, beta, args.m.clone()).map_err(|e| usage(&e))?;
            orbifold_degree(&data).map_err(|e| usage(&e))?
        }
    };
    if let Some(i) = args.m.iter().position(|&m| m < 1) {
        return Err(Failure::Usage(format!("cone order at position {i} must be positive")));
    }
    let a = args.a.unwrap_or_else(|| args.m.iter().fold(1_i64, |l, &m| l.lcm(&m)));
    let vol = args.vol.unwrap_or(4.0 * PI);
    let assoc = associated_bundle_seifert(a, &degree, &args.m).map_err(|e| usage(&e))?;
    let status = moduli_status(a, &degree, args.tau, vol).map_err(|e| usage(&e))?;
    let assoc_degree = orbifold_degree(&assoc).map_err(|e| usage(&e))?;
    let out = SeifertOutput {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        degree: format_rational(&degree),
        status: status.status,
        dimension: status.complex_dimension,
        threshold: status.threshold,
        boundary: status.boundary,
        a,
        tau: args.tau,
        vol,
        associated: AssociatedOutput {
            b: assoc.b,
            beta: assoc.beta,
            mult: assoc.mult,
            degree: format_rational(&assoc_degree),
        },
        lifting_cokernel: lifting_cokernel(args.genus, a as u64).to_string(),
    };
    print!("{}", to_json(&out));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EnergyRow {
    sample: usize,
    energy: f64,
    bogomolny: f64,
    r: f64,
    r_topological: f64,
    discrepancy: f64,
    relative_discrepancy: f64,
    /// Relative change of the energy under a random gauge transformation.
    gauge_drift: f64,
    /// Change of `R` under a random connection perturbation, relative to the energy.
    r_drift: f64,
}

#[derive(Serialize)]
struct EnergyOutput {
    mode: EnergyMode,
    rows: Vec<EnergyRow>,
    max_relative_discrepancy: f64,
    max_gauge_drift: f64,
    max_r_drift: f64,
}

fn energy_row(
    r: &Resolved,
    cfg: &GaugeConfig,
    rng: &mut ChaCha8Rng,
    sample: usize,
) -> Result<EnergyRow, Failure> {
    let s = &r.surface;
    let act = &r.action;
    let eps = r.options.eps;
    let id = energy_identity(s, cfg, act).map_err(numerical)?;
    let scale = id.lhs.abs().max(f64::MIN_POSITIVE);
    let g = GaugeTransform::from_phase(s, &random_phase(s, rng));
    let e0 = energy(s, cfg, act, eps).map_err(numerical)?;
    let e1 = energy(s, &gauge_apply(&g, cfg, act).map_err(numerical)?, act, eps).map_err(numerical)?;
    let beta = random_one_form(s, rng, 0.5);
    let moved = GaugeConfig::new(cfg.alpha.add(&beta), cfg.u.clone(), cfg.n);
    let r0 = topological_r(s, cfg, act).map_err(numerical)?;
    let r1 = topological_r(s, &moved, act).map_err(numerical)?;
    Ok(EnergyRow {
        sample,
        energy: id.lhs,
        bogomolny: id.bogomolny,
        r: id.r,
        r_topological: id.r_topological,
        discrepancy: id.discrepancy,
        relative_discrepancy: id.discrepancy.abs() / scale,
        gauge_drift: (e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE),
        r_drift: (r1 - r0).abs() / scale,
    })
}

pub fn energy_check(args: &RunArgs) -> Result<u8, Failure> {
    let r = load(args)?;
    let ec = required(args, r.config.energy_check.clone(), "energy_check")?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.config.seed);
    let s = &r.surface;
    let mut rows = Vec::new();
    for k in 0..ec.samples {
        let cfg = match ec.mode {
            EnergyMode::Trivial => GaugeConfig::trivial(s.len(), 0),
            EnergyMode::Random => random_config(s, &mut rng, 1.0),
        };
        rows.push(energy_row(&r, &cfg, &mut rng, k)?);
    }
    let max = |f: fn(&EnergyRow) -> f64| rows.iter().map(f).fold(0.0_f64, f64::max);
    let out = EnergyOutput {
        mode: ec.mode,
        max_relative_discrepancy: max(|r| r.relative_discrepancy),
        max_gauge_drift: max(|r| r.gauge_drift),
        max_r_drift: max(|r| r.r_drift),
        rows,
    };
    emit("energy-check", &r, out)?;
    Ok(EXIT_OK)
}

fn family_code<'a>(statuses: impl Iterator<Item = &'a SolveStatus>) -> u8 {
    statuses.map(|s| status_code(*s)).fold(EXIT_OK, |acc, c| match (acc, c) {
        (EXIT_FAILED, _) | (_, EXIT_FAILED) => EXIT_FAILED,
        (EXIT_INFEASIBLE, _) | (_, EXIT_INFEASIBLE) => EXIT_INFEASIBLE,
        _ => EXIT_OK,
    })
}

pub fn adiabatic(args: &RunArgs) -> Result<u8, Failure> {
    let r = load(args)?;
    let d = r.divisor().map_err(|e| config_failure(&args.config, e))?;
    let eps_list = required(args, r.config.eps_list.clone(), "eps_list")?;
    let table: AdiabaticTable = adiabatic_family(
        &r.surface,
        &d,
        &r.action,
        &r.options,
        &eps_list,
        r.config.delta,
    )
    .map_err(numerical)?;
    let code = family_code(table.rows.iter().map(|row| &row.status));
    emit("adiabatic", &r, table)?;
    Ok(code)
}

fn scan_csv(scan: &ThresholdScan) -> String {
    let mut out = String::from("tau,status,residual\n");
    for row in &scan.rows {
        out.push_str(&format!("{:.16e},{},{:.16e}\n", row.tau, row.status.name(), row.residual));
    }
    out
}

pub fn scan(args: &RunArgs) -> Result<u8, Failure> {
    let r = load(args)?;
    let d = r.divisor().map_err(|e| config_failure(&args.config, e))?;
    let grid = required(args, r.config.tau_grid.clone(), "tau_grid")?;
    let scan = threshold_scan(&r.surface, &d, r.action.a, &grid, &r.options).map_err(numerical)?;
    if let Some(path) = &r.config.output.table {
        write_atomic(Path::new(path), &scan_csv(&scan))
            .map_err(|e| Failure::Io(format!("cannot write {path}: {e}")))?;
    }
    let failed = scan
        .rows
        .iter()
        .any(|row| matches!(row.status, SolveStatus::MaxIterations | SolveStatus::Diverged));
    emit("scan", &r, scan)?;
    Ok(if failed { EXIT_FAILED } else { EXIT_OK })
}

pub fn probe(args: &RunArgs) -> Result<u8, Failure> {
    let r = load(args)?;
    let p = required(args, r.config.probe.clone(), "probe")?;
    let summary: ProbeSummary = symmetric_product_probe(
        &r.surface,
        &r.action,
        p.degree,
        p.samples,
        r.config.seed,
        &r.options,
    )
    .map_err(numerical)?;
    emit("probe", &r, summary)?;
    Ok(EXIT_OK)
}
