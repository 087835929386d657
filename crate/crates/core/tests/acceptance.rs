//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_integer::Integer;
use num_rational::BigRational;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbivortex_core::fields::{
    energy, energy_identity, gauge_apply, kahler_act, psi_map, topological_r, ActionData,
    GaugeConfig, GaugeTransform,
};
use orbivortex_core::moduli::{divisor_roundtrip, random_divisor, spread_divisor};
use orbivortex_core::sampling::{random_config, random_one_form, random_phase};
use orbivortex_core::seifert::{
    associated_bundle_seifert, lifting_cokernel, orbifold_degree, SeifertData,
};
use orbivortex_core::solver::{
    adiabatic_family, critical_tau, solve_taubes, Divisor, SolveReport, SolveStatus,
    SolverOptions,
};
use orbivortex_core::surface::Surface;

const RESIDUAL_TOL: f64 = 1e-8;
const DICHOTOMY_SECONDS: f64 = 60.0;
const DEGREE_TOL: f64 = 1e-5;
const EQUIVARIANCE_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-6;
const ROUNDING_FLOOR: f64 = 1e-12;
const GAUGE_TOL: f64 = 1e-8;
const R_TOL: f64 = 1e-6;
const PSI_TOL: f64 = 1e-12;
const OBSTRUCTION_TOL: f64 = 1e-10;
const MAX_PRINCIPLE_SLACK: f64 = 1e-6;
/// Bound on `r_{k+1} / r_k^2` over the Newton tail. Measured values range
/// from 1e-2 to 3.3e3; the largest comes from a final step that lands on the
/// rounding floor of the football grid.
const QUADRATIC_TAIL_BOUND: f64 = 1e4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn torus(n: usize) -> Surface {
    Surface::torus(2.0 * PI, 2.0 * PI, n).unwrap()
}

/// Converged reports collected for the solver health criterion.
type Runs = Vec<(String, SolveReport)>;

fn dichotomy(runs: &mut Runs) -> Outcome {
    let s = torus(128);
    let tau_star = critical_tau(1, 1, s.volume());
    let d = spread_divisor(&s, 1);
    let start = Instant::now();
    let mut statuses = Vec::new();
    let mut worst = 0.0_f64;
    for f in [0.8, 0.9, 1.1, 1.2] {
        let act = ActionData::new(1, f * tau_star).unwrap();
        let (_, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
        statuses.push(rep.status);
        if rep.status == SolveStatus::Converged {
            worst = worst.max(rep.residual);
            runs.push((format!("torus tau={f}tau*"), rep));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    use SolveStatus::*;
    let pass = statuses == [Infeasible, Infeasible, Converged, Converged]
        && worst <= RESIDUAL_TOL
        && secs <= DICHOTOMY_SECONDS;
    Outcome {
        pass,
        detail: format!(
            "statuses {:?}, max residual {worst:.2e}, {secs:.1} s",
            statuses.iter().map(|s| s.name()).collect::<Vec<_>>()
        ),
    }
}

fn orbifold_dichotomy(runs: &mut Runs) -> Outcome {
    let s = Surface::football(3, 64, 96).unwrap();
    let d = spread_divisor(&s, 3);
    let low = ActionData::new(3, 2.0).unwrap();
    let high = ActionData::new(3, 4.0).unwrap();
    let opts = SolverOptions::default();
    let (_, r_low) = solve_taubes(&s, &d, &low, &opts).unwrap();
    let (_, r_high) = solve_taubes(&s, &d, &high, &opts).unwrap();
    let pass = r_low.status == SolveStatus::Infeasible
        && r_high.status == SolveStatus::Converged
        && (r_high.degree - 3.0).abs() <= DEGREE_TOL
        && r_high.equivariance_defect <= EQUIVARIANCE_TOL;
    let detail = format!(
        "tau=2 {}, tau=4 {} degree {:.8} equivariance {:.1e}",
        r_low.status.name(),
        r_high.status.name(),
        r_high.degree,
        r_high.equivariance_defect
    );
    if r_high.status == SolveStatus::Converged {
        runs.push(("football tau=4".into(), r_high));
    }
    Outcome { pass, detail }
}

fn energy_identity_check() -> Outcome {
    let act = ActionData::new(2, 1.5).unwrap();
    let s = torus(128);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let cfg = random_config(&s, &mut rng, 1.0);
        let id = energy_identity(&s, &cfg, &act).unwrap();
        worst = worst.max(id.discrepancy.abs() / id.lhs.abs());
    }
    // Same random coefficients at each resolution.
    let errs: Vec<(f64, f64)> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let s = torus(n);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let cfg = random_config(&s, &mut rng, 1.0);
            let id = energy_identity(&s, &cfg, &act).unwrap();
            (id.topological_discrepancy.abs(), id.lhs.abs())
        })
        .collect();
    let refinement_ok = errs.windows(2).all(|w| {
        let (coarse, fine) = (w[0].0, w[1].0);
        fine <= ROUNDING_FLOOR * w[1].1 || (coarse / fine).log2() >= 2.0
    });
    Outcome {
        pass: worst <= IDENTITY_TOL && refinement_ok,
        detail: format!(
            "max relative discrepancy {worst:.2e}; refinement errors {:.2e}, {:.2e}, {:.2e}",
            errs[0].0, errs[1].0, errs[2].0
        ),
    }
}

fn gauge_invariance() -> Outcome {
    let act = ActionData::new(2, 1.5).unwrap();
    let s = torus(128);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = random_config(&s, &mut rng, 1.0);
    let e0 = energy(&s, &cfg, &act, 1.0).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let g = GaugeTransform::from_phase(&s, &random_phase(&s, &mut rng));
        let e1 = energy(&s, &gauge_apply(&g, &cfg, &act).unwrap(), &act, 1.0).unwrap();
        worst = worst.max((e1 - e0).abs() / e0);
    }
    Outcome {
        pass: worst <= GAUGE_TOL,
        detail: format!("max relative drift {worst:.2e}"),
    }
}

fn r_independence() -> Outcome {
    let act = ActionData::new(2, 1.5).unwrap();
    let s = torus(128);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = random_config(&s, &mut rng, 1.0);
    let r0 = topological_r(&s, &cfg, &act).unwrap();
    let scale = energy(&s, &cfg, &act, 1.0).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let beta = random_one_form(&s, &mut rng, 0.5);
        let moved = GaugeConfig::new(cfg.alpha.add(&beta), cfg.u.clone(), 0);
        let r1 = topological_r(&s, &moved, &act).unwrap();
        worst = worst.max((r1 - r0).abs() / scale);
    }
    Outcome {
        pass: worst <= R_TOL,
        detail: format!("max drift relative to energy {worst:.2e}"),
    }
}

fn psi_correspondence() -> Outcome {
    let s = torus(64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let act = ActionData::new(rng.gen_range(1..=4), rng.gen_range(0.5..3.0)).unwrap();
        let cfg = random_config(&s, &mut rng, 1.0);
        let g = GaugeTransform::from_phase(&s, &random_phase(&s, &mut rng));
        let lhs = psi_map(&gauge_apply(&g, &cfg, &act).unwrap(), &act);
        let rhs = kahler_act(&psi_map(&cfg, &act), &g.pow(-(act.a as i32)));
        for k in 0..s.len() {
            let df = (lhs.f[k] - rhs.f[k]).norm() / (1.0 + lhs.f[k].norm());
            let db1 = (lhs.b.c1[k] - rhs.b.c1[k]).abs() / (1.0 + lhs.b.c1[k].abs());
            let db2 = (lhs.b.c2[k] - rhs.b.c2[k]).abs() / (1.0 + lhs.b.c2[k].abs());
            worst = worst.max(df).max(db1).max(db2);
        }
    }
    Outcome {
        pass: worst <= PSI_TOL,
        detail: format!("max nodal defect {worst:.2e}"),
    }
}

fn moduli_correspondence() -> Outcome {
    let s = torus(128);
    let act = ActionData::new(1, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    let mut worst = 0.0_f64;
    let mut all_mult = true;
    for i in 0..20 {
        let n = 1 + i % 3;
        let d = random_divisor(&s, n, &mut rng);
        let rt = divisor_roundtrip(&s, &d, &act, &SolverOptions::default()).unwrap();
        ok += rt.success as usize;
        all_mult &= rt.multiplicity_match;
        worst = worst.max(rt.max_error_spacings);
    }
    Outcome {
        pass: ok == 20 && all_mult && worst <= 2.0,
        detail: format!("{ok}/20 round trips, max error {worst:.2} spacings"),
    }
}

fn adiabatic() -> Outcome {
    let s = torus(128);
    let tau = 1.5 * critical_tau(1, 1, s.volume());
    let act = ActionData::new(1, tau).unwrap();
    let d = spread_divisor(&s, 1);
    let eps = [1.0, 0.5, 0.25, 0.125];
    let t = adiabatic_family(&s, &d, &act, &SolverOptions::default(), &eps, 0.5).unwrap();
    let converged = t.rows.iter().all(|r| r.status == SolveStatus::Converged);
    let sups: Vec<String> = t.rows.iter().map(|r| format!("{:.2e}", r.sup_defect)).collect();
    let mus: Vec<String> = t.rows.iter().map(|r| format!("{:.2e}", r.mu_norm)).collect();
    Outcome {
        pass: converged && t.sup_decreasing && t.mu_decreasing,
        detail: format!("sup [{}], mu [{}]", sups.join(", "), mus.join(", ")),
    }
}

/// `b + sum beta_i / m_i` as a reduced fraction over `i128`.
fn reference_degree(b: i64, beta: &[i64], mult: &[i64]) -> (i128, i128) {
    let l = mult.iter().fold(1_i128, |l, &m| l.lcm(&(m as i128)));
    let num = b as i128 * l
        + beta
            .iter()
            .zip(mult)
            .map(|(&x, &m)| x as i128 * (l / m as i128))
            .sum::<i128>();
    let g = num.gcd(&l);
    (num / g, l / g)
}

fn seifert_arithmetic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(0..6);
        let mult: Vec<i64> = (0..k).map(|_| rng.gen_range(1..12)).collect();
        let beta: Vec<i64> = mult.iter().map(|&m| rng.gen_range(0..m)).collect();
        let b = rng.gen_range(-50..50);
        let data = SeifertData::new(b, beta.clone(), mult.clone()).unwrap();
        let deg = orbifold_degree(&data).unwrap();
        let (p, q) = reference_degree(b, &beta, &mult);
        if *deg.numer() != BigInt::from(p) || *deg.denom() != BigInt::from(q) {
            bad += 1;
        }
        // Associated bundle through a common multiple of the cone orders.
        let l = mult.iter().fold(1_i64, |l, &m| l.lcm(&m));
        let a = l * rng.gen_range(1..4);
        let d = BigRational::new(BigInt::from(rng.gen_range(-40..40)), BigInt::from(a));
        let assoc = associated_bundle_seifert(a, &d, &mult).unwrap();
        let ad = &d * BigRational::from_integer(BigInt::from(a));
        if orbifold_degree(&assoc).unwrap() != ad || assoc.beta.iter().any(|&x| x != 0) {
            bad += 1;
        }
        if !lifting_cokernel(0, a as u64).is_trivial() {
            bad += 1;
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{bad} mismatches in 1000 samples"),
    }
}

fn solver_health(runs: &Runs) -> Outcome {
    let mut worst_tail = 0.0_f64;
    let mut worst_obs = 0.0_f64;
    let mut worst_max = 0.0_f64;
    let mut missing = Vec::new();
    for (name, rep) in runs {
        match rep.quadratic_tail {
            Some(c) => worst_tail = worst_tail.max(c),
            None => missing.push(name.clone()),
        }
        worst_obs = worst_obs.max(rep.obstruction_defect);
        worst_max = worst_max.max(rep.max_principle_ratio);
    }
    Outcome {
        pass: !runs.is_empty()
            && missing.is_empty()
            && worst_tail <= QUADRATIC_TAIL_BOUND
            && worst_obs <= OBSTRUCTION_TOL
            && worst_max <= 1.0 + MAX_PRINCIPLE_SLACK,
        detail: format!(
            "{} runs, tail C {worst_tail:.2e}, obstruction {worst_obs:.2e}, max |f|^2/(a tau) {worst_max:.9}{}",
            runs.len(),
            if missing.is_empty() {
                String::new()
            } else {
                format!(", no tail fit for {missing:?}")
            }
        ),
    }
}

fn collect_moduli_runs(runs: &mut Runs) {
    let s = torus(128);
    let act = ActionData::new(1, 2.0).unwrap();
    let d = Divisor::new(vec![((1.0, 2.0), 2), ((4.0, 4.5), 1)]);
    let (_, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
    runs.push(("torus N=3".into(), rep));
}

fn main() -> ExitCode {
    let mut runs = Runs::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 bradlow dichotomy on the torus", dichotomy(&mut runs)),
        ("2 orbifold dichotomy on the football", orbifold_dichotomy(&mut runs)),
        ("3 energy identity", energy_identity_check()),
        ("4 gauge invariance of the energy", gauge_invariance()),
        ("5 connection independence of R", r_independence()),
        ("6 psi equivariance", psi_correspondence()),
        ("7 divisor round trips", moduli_correspondence()),
        ("8 adiabatic limit", adiabatic()),
        ("9 seifert arithmetic", seifert_arithmetic()),
        ("10 solver health", {
            collect_moduli_runs(&mut runs);
            solver_health(&runs)
        }),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += (!o.pass) as usize;
        println!("{tag} criterion {name}: {}", o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
