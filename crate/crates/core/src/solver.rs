//! Vortex solutions through the scalar reduction.
//!
//! A solution with zero divisor `D = sum n_j p_j` is encoded by
//! `h = log |f|^2 = w0 + u + c` where `w0 = 4 pi sum n_j G_{p_j}` carries the
//! logarithmic zeros and `u` is smooth. The first-order system becomes
//!
//! ```text
//! Delta u = W e^{u + c} - a tau + 4 pi N / Vol,   W = e^{w0},
//! ```
//!
//! and the constant `c` is fixed at every iterate so that
//! `integral W e^{u+c} = a tau Vol - 4 pi N`. Integrating the equation shows
//! that this quantity must be positive, which is the existence threshold.
//!
//! Newton steps solve the projected Jacobian
//! `J v = Delta v - rho v + rho <rho, v> / K` (with `rho = W e^{u+c}`,
//! `K = integral rho`), which is symmetric and negative semidefinite with the
//! constants as kernel, by preconditioned conjugate gradients.
//!
//! With `eps != 1` the rescaled system is the same equation at level
//! `tau / eps^2`; `|f|^2 = eps^2 e^h`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{mu_norm, ActionData};
use crate::moduli::{locate_zeros, ZeroSet};
use crate::surface::{Point, ScalarField, Surface, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("divisor point ({0}, {1}) is not on the surface")]
    OffSurface(f64, f64),
    #[error("divisor multiplicities must be positive")]
    ZeroMultiplicity,
    #[error("invalid solver option: {0}")]
    Options(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Effective divisor `sum n_j p_j`. Points are given on the base; on a
/// football a generic point stands for its whole rotation orbit.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Divisor {
    pub points: Vec<(Point, u32)>,
}

impl Divisor {
    pub fn new(points: Vec<(Point, u32)>) -> Self {
        Self { points }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn degree(&self) -> i64 {
        self.points.iter().map(|p| p.1 as i64).sum()
    }

    pub fn validate(&self, s: &Surface) -> Result<(), SolveError> {
        for &((x, y), n) in &self.points {
            if n == 0 {
                return Err(SolveError::ZeroMultiplicity);
            }
            let inside = match s.periods() {
                Some((l1, l2)) => (0.0..l1).contains(&x) && (0.0..l2).contains(&y),
                None => (0.0..=PI).contains(&x) && y.is_finite(),
            };
            if !inside {
                return Err(SolveError::OffSurface(x, y));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Target for the weighted L2 norm of the scalar residual.
    pub tol: f64,
    pub max_newton: usize,
    /// Upper bound on the relative tolerance of the inner CG solves.
    pub cg_tol_factor: f64,
    pub max_cg: usize,
    pub eps: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_newton: 50,
            cg_tol_factor: 1e-2,
            max_cg: 2000,
            eps: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::Options(m.to_string()));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if self.max_newton == 0 {
            return bad("max_newton must be positive");
        }
        if !(self.cg_tol_factor > 0.0 && self.cg_tol_factor < 1.0) {
            return bad("cg_tol_factor must lie in (0, 1)");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        Ok(())
    }
}

/// Relative band around `a tau Vol = 4 pi N` reported as the boundary case.
pub const BOUNDARY_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible,
    Infeasible { boundary: bool },
}

/// Sign of `a tau Vol - 4 pi N`; equality counts as infeasible.
pub fn feasibility(act: &ActionData, n: i64, vol: f64) -> Feasibility {
    let lhs = act.af() * act.tau * vol;
    let rhs = 4.0 * PI * n as f64;
    if (lhs - rhs).abs() <= BOUNDARY_GUARD * lhs.abs().max(rhs.abs()) {
        return Feasibility::Infeasible { boundary: true };
    }
    if lhs > rhs {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible { boundary: false }
    }
}

/// The threshold level `tau* = 4 pi N / (a Vol)`.
pub fn critical_tau(a: i64, n: i64, vol: f64) -> f64 {
    4.0 * PI * n as f64 / (a as f64 * vol)
}

#[derive(Clone, Debug)]
pub struct Weight {
    pub w0: ScalarField,
    pub w: ScalarField,
    /// Snapped node of each divisor point.
    pub nodes: Vec<usize>,
    /// Largest distance between a requested point and its node.
    pub snap_distance: f64,
}

/// `w0 = 4 pi sum n_j G_{p_j}` and `W = e^{w0}`; the empty divisor gives
/// `W = 1`.
pub fn build_weight(s: &Surface, d: &Divisor) -> Result<Weight, SolveError> {
    d.validate(s)?;
    let mut rhs = vec![0.0; s.len()];
    let mut nodes = Vec::with_capacity(d.points.len());
    let mut snap_distance = 0.0_f64;
    for &(p, n) in &d.points {
        let (delta, node) = s.delta(p)?;
        for (r, v) in rhs.iter_mut().zip(delta.iter()) {
            *r += 4.0 * PI * n as f64 * v;
        }
        nodes.push(node);
        snap_distance = snap_distance.max(s.distance(p, s.coords(node)));
    }
    let w0 = if d.points.is_empty() {
        ScalarField::zeros(s.len())
    } else {
        s.project_invariant(&s.solve_shifted(&rhs, 0.0))
    };
    let w = ScalarField(w0.iter().map(|v| v.exp()).collect());
    Ok(Weight {
        w0,
        w,
        nodes,
        snap_distance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Infeasible,
    Converged,
    MaxIterations,
    Diverged,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VortexSolution {
    pub u: ScalarField,
    pub w0: ScalarField,
    /// `h = w0 + u + c`, so that `e^h = |f|^2 / eps^2`.
    pub h: ScalarField,
    /// `|f|^2 = eps^2 e^h`.
    pub fsq: ScalarField,
    /// Curvature density `(a tau / eps^2 - e^h) / 2`; integrates to `2 pi N`.
    pub phi: ScalarField,
    pub c: f64,
    pub n: i64,
    pub eps: f64,
    /// Level of the rescaled problem, `tau / eps^2`.
    pub tau_eff: f64,
    pub divisor: Divisor,
    pub divisor_nodes: Vec<usize>,
    pub newton_iters: usize,
    pub residual_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Energies {
    pub e: f64,
    pub bogomolny: f64,
    pub r: f64,
    /// `e - bogomolny - r`.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub boundary: bool,
    pub iterations: usize,
    /// Weighted L2 norm of the scalar residual at the last iterate.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// `max r_{k+1} / r_k^2` over the last three residuals, when available.
    pub quadratic_tail: Option<f64>,
    /// Norm of the first-order residuals reconstructed from the solution.
    pub dbar_residual: f64,
    pub curvature_residual: f64,
    pub energies: Energies,
    pub degree: f64,
    /// `|integral W e^{u+c} - (a tau Vol - 4 pi N)| / (a tau Vol - 4 pi N)`.
    pub obstruction_defect: f64,
    /// `max |f|^2 / (a tau)`.
    pub max_principle_ratio: f64,
    /// Largest distance of any iterate from the invariant subspace.
    pub equivariance_defect: f64,
    pub snap_distance: f64,
    pub zeros: Option<ZeroSet>,
}

impl SolveReport {
    fn infeasible(boundary: bool) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            boundary,
            iterations: 0,
            residual: f64::NAN,
            residual_history: Vec::new(),
            quadratic_tail: None,
            dbar_residual: f64::NAN,
            curvature_residual: f64::NAN,
            energies: Energies::default(),
            degree: f64::NAN,
            obstruction_defect: f64::NAN,
            max_principle_ratio: f64::NAN,
            equivariance_defect: 0.0,
            snap_distance: 0.0,
            zeros: None,
        }
    }
}

/// `max r_{k+1} / r_k^2` over the last three residuals.
pub fn quadratic_tail(history: &[f64]) -> Option<f64> {
    if history.len() < 3 {
        return None;
    }
    let t = &history[history.len() - 3..];
    Some((t[1] / (t[0] * t[0])).max(t[2] / (t[1] * t[1])))
}

struct Problem<'a> {
    s: &'a Surface,
    w0: &'a [f64],
    /// `K = a tau_eff Vol - 4 pi N`.
    k: f64,
}

struct State {
    rho: Vec<f64>,
    c: f64,
    f: Vec<f64>,
    norm: f64,
}

impl Problem<'_> {
    fn evaluate(&self, u: &[f64]) -> State {
        let s = self.s;
        let expo: Vec<f64> = self.w0.iter().zip(u).map(|(w, u)| w + u).collect();
        let shift = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = expo.iter().map(|e| (e - shift).exp()).collect();
        let c = self.k.ln() - shift - s.quad(&scaled).ln();
        let rho: Vec<f64> = expo.iter().map(|e| (e + c).exp()).collect();
        let lap = s.laplacian(u);
        let mean = self.k / s.volume();
        let f: Vec<f64> = lap
            .iter()
            .zip(&rho)
            .map(|(l, r)| l - r + mean)
            .collect();
        let norm = s.l2_norm(&f);
        State { rho, c, f, norm }
    }

    /// Solves `-J x = b` on mean-zero invariant functions.
    fn newton_direction(&self, st: &State, b: &[f64], rtol: f64, max_cg: usize) -> Vec<f64> {
        let s = self.s;
        let vol = s.volume();
        let project = |v: &[f64]| -> Vec<f64> {
            let p = s.project_invariant(v);
            let m = s.mean(&p);
            p.iter().map(|x| x - m).collect()
        };
        let apply = |v: &[f64]| -> Vec<f64> {
            let lap = s.laplacian(v);
            let pairing = s.inner(&st.rho, v) / self.k;
            lap.iter()
                .zip(v)
                .zip(&st.rho)
                .map(|((l, v), r)| -(l - r * v + r * pairing))
                .collect()
        };
        let sigma = self.k / vol;
        let precond = |r: &[f64]| -> Vec<f64> {
            let z = s.solve_shifted(r, sigma);
            project(&z.iter().map(|v| -v).collect::<Vec<_>>())
        };
        let b = project(b);
        let bnorm = s.l2_norm(&b);
        let mut x = vec![0.0; b.len()];
        if bnorm == 0.0 {
            return x;
        }
        let mut r = b.clone();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = s.inner(&r, &z);
        for _ in 0..max_cg {
            let ap = apply(&p);
            let pap = s.inner(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for k in 0..x.len() {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if s.l2_norm(&r) <= rtol * bnorm {
                break;
            }
            z = precond(&r);
            let rz_new = s.inner(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..p.len() {
                p[k] = z[k] + beta * p[k];
            }
        }
        project(&x)
    }
}

/// Solves the first-order system with zero divisor `d`.
pub fn solve_taubes(
    s: &Surface,
    d: &Divisor,
    act: &ActionData,
    opts: &SolverOptions,
) -> Result<(Option<VortexSolution>, SolveReport), SolveError> {
    opts.validate()?;
    d.validate(s)?;
    let n = d.degree();
    let tau_eff = act.tau / (opts.eps * opts.eps);
    let scaled = ActionData {
        a: act.a,
        tau: tau_eff,
    };
    if let Feasibility::Infeasible { boundary } = feasibility(&scaled, n, s.volume()) {
        return Ok((None, SolveReport::infeasible(boundary)));
    }
    let weight = build_weight(s, d)?;
    let k = act.af() * tau_eff * s.volume() - 4.0 * PI * n as f64;
    let problem = Problem {
        s,
        w0: &weight.w0,
        k,
    };
    let u0 = (k / s.quad(&weight.w)).ln();
    let mut u = vec![u0; s.len()];
    let mut st = problem.evaluate(&u);
    let mut history = vec![st.norm];
    let mut equivariance = s.equivariance_defect(&u);
    let mut growth = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    if !st.norm.is_finite() {
        status = SolveStatus::Diverged;
    } else if st.norm <= opts.tol {
        status = SolveStatus::Converged;
    }
    while status == SolveStatus::MaxIterations && iterations < opts.max_newton {
        iterations += 1;
        let rtol = opts.cg_tol_factor.min(st.norm);
        let dir = problem.newton_direction(&st, &st.f, rtol, opts.max_cg);
        // Backtrack to sufficient decrease; failing that keep the best
        // finite trial and let the growth counter judge it.
        let mut step = 1.0;
        let mut next: Option<(Vec<f64>, State)> = None;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&dir).map(|(u, d)| u + step * d).collect();
            let trial = s.project_invariant(&trial).0;
            let ts = problem.evaluate(&trial);
            if ts.norm.is_finite() {
                let accept = ts.norm <= (1.0 - 1e-4 * step) * st.norm;
                if accept || next.as_ref().is_none_or(|b| ts.norm < b.1.norm) {
                    next = Some((trial, ts));
                }
                if accept {
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, ts)) = next else {
            status = SolveStatus::Diverged;
            break;
        };
        if ts.norm >= st.norm {
            growth += 1;
        } else {
            growth = 0;
        }
        u = trial;
        st = ts;
        equivariance = equivariance.max(s.equivariance_defect(&u));
        history.push(st.norm);
        if !st.norm.is_finite() || growth >= 3 {
            status = SolveStatus::Diverged;
        } else if st.norm <= opts.tol {
            status = SolveStatus::Converged;
        }
    }
    let sol = assemble(d, act, opts, &weight, u, &st, iterations, history.clone());
    let mut report = diagnostics(s, &sol, act, &weight, k);
    report.status = status;
    report.iterations = iterations;
    report.residual = st.norm;
    report.residual_history = history;
    report.quadratic_tail = if status == SolveStatus::Converged {
        quadratic_tail(&report.residual_history)
    } else {
        None
    };
    report.equivariance_defect = equivariance;
    if status == SolveStatus::Converged {
        report.zeros = Some(locate_zeros(s, &sol, act));
    }
    Ok((Some(sol), report))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    d: &Divisor,
    act: &ActionData,
    opts: &SolverOptions,
    weight: &Weight,
    u: Vec<f64>,
    st: &State,
    newton_iters: usize,
    residual_history: Vec<f64>,
) -> VortexSolution {
    let tau_eff = act.tau / (opts.eps * opts.eps);
    let e2 = opts.eps * opts.eps;
    let h: Vec<f64> = weight
        .w0
        .iter()
        .zip(&u)
        .map(|(w, u)| w + u + st.c)
        .collect();
    let fsq = st.rho.iter().map(|r| e2 * r).collect();
    let phi = st
        .rho
        .iter()
        .map(|r| 0.5 * (act.af() * tau_eff - r))
        .collect();
    VortexSolution {
        u: ScalarField(u),
        w0: weight.w0.clone(),
        h: ScalarField(h),
        fsq: ScalarField(fsq),
        phi: ScalarField(phi),
        c: st.c,
        n: d.degree(),
        eps: opts.eps,
        tau_eff,
        divisor: d.clone(),
        divisor_nodes: weight.nodes.clone(),
        newton_iters,
        residual_history,
    }
}

fn diagnostics(
    s: &Surface,
    sol: &VortexSolution,
    act: &ActionData,
    weight: &Weight,
    k: f64,
) -> SolveReport {
    let obs = reconstruct_observables(s, sol);
    let rho: Vec<f64> = sol.h.iter().map(|h| h.exp()).collect();
    let obstruction_defect = (s.quad(&rho) - k).abs() / k;
    let a_tau = act.af() * act.tau;
    let max_principle_ratio = sol.fsq.iter().fold(0.0_f64, |m, v| m.max(*v)) / a_tau;
    let curvature_residual = {
        let r: Vec<f64> = sol
            .phi
            .iter()
            .zip(&rho)
            .map(|(p, r)| p - 0.5 * (act.af() * sol.tau_eff - r))
            .collect();
        s.l2_norm(&r)
    };
    let mut report = SolveReport::infeasible(false);
    report.dbar_residual = 0.0;
    report.curvature_residual = curvature_residual;
    report.energies = solution_energies(s, sol, act);
    report.degree = obs.degree;
    report.obstruction_defect = obstruction_defect;
    report.max_principle_ratio = max_principle_ratio;
    report.snap_distance = weight.snap_distance;
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub fsq: ScalarField,
    pub curvature_density: ScalarField,
    /// `(1/2 pi) integral phi`.
    pub degree: f64,
}

pub fn reconstruct_observables(s: &Surface, sol: &VortexSolution) -> Observables {
    Observables {
        fsq: sol.fsq.clone(),
        curvature_density: sol.phi.clone(),
        degree: s.quad(&sol.phi) / (2.0 * PI),
    }
}

/// Energies of the section `u = f / a` reconstructed from gauge-invariant
/// data. For a holomorphic section `|d_A u|^2 = |grad |f|^2|^2 / (2 a^2 |f|^2)`;
/// both Bogomolny terms vanish identically and `R = pi tau N / a`.
pub fn solution_energies(s: &Surface, sol: &VortexSolution, act: &ActionData) -> Energies {
    let a = act.af();
    let e2 = sol.eps * sol.eps;
    let grad = s.gradient(&sol.fsq);
    let density: Vec<f64> = (0..s.len())
        .map(|k| {
            let g2 = grad.c1[k].powi(2) + grad.c2[k].powi(2);
            let fsq = sol.fsq[k].max(f64::MIN_POSITIVE);
            let du = g2 / (2.0 * a * a * fsq);
            let f12 = sol.phi[k] / a;
            let mu = act.mu_of_norm_sqr(sol.fsq[k] / (a * a));
            0.5 * (du + e2 * f12 * f12 + mu * mu / e2)
        })
        .collect();
    let e = s.quad(&density);
    let r = PI * act.tau * sol.n as f64 / a;
    Energies {
        e,
        bogomolny: 0.0,
        r,
        defect: e - r,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualCheck {
    /// Largest weak residual of `Delta h = |f|^2 - a tau` against bumps
    /// supported away from the divisor, each bump normalized to unit sup.
    pub weak_residual: f64,
    /// Sup of `phi - (a tau - e^h) / 2`.
    pub curvature_residual: f64,
    pub degree: f64,
    pub degree_defect: f64,
    pub bumps: usize,
}

/// Number of random test bumps used by [`residual_check`].
pub const RESIDUAL_BUMPS: usize = 20;

fn bump_radius(s: &Surface) -> f64 {
    match s.periods() {
        Some((l1, l2)) => 0.08 * l1.min(l2),
        None => 0.5,
    }
}

/// Gauge-invariant verification of a solution.
pub fn residual_check(s: &Surface, sol: &VortexSolution, act: &ActionData) -> ResidualCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let radius = bump_radius(s);
    let coords = s.node_coords();
    let centres_of_divisor: Vec<Point> = sol
        .divisor
        .points
        .iter()
        .flat_map(|&(p, _)| s.orbit(p))
        .collect();
    let g: Vec<f64> = sol.h.iter().map(|h| h.exp()).collect();
    let source: Vec<f64> = g.iter().map(|g| g - act.af() * sol.tau_eff).collect();
    let mut worst = 0.0_f64;
    let mut bumps = 0;
    let mut attempts = 0;
    while bumps < RESIDUAL_BUMPS && attempts < 10_000 {
        attempts += 1;
        let centre = coords[rng.gen_range(0..coords.len())];
        if centres_of_divisor
            .iter()
            .any(|&p| s.cover_distance(p, centre) < radius + 2.0 * s.spacing())
        {
            continue;
        }
        bumps += 1;
        let psi: Vec<f64> = coords
            .iter()
            .map(|&x| {
                let t = s.cover_distance(centre, x) / radius;
                if t < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let psi = s.project_invariant(&psi);
        let lpsi = s.laplacian(&psi);
        let res = s.inner(&sol.h, &lpsi) - s.inner(&source, &psi);
        worst = worst.max(res.abs() / psi.max_abs());
    }
    let curvature_residual = sol
        .phi
        .iter()
        .zip(&g)
        .map(|(p, g)| (p - 0.5 * (act.af() * sol.tau_eff - g)).abs())
        .fold(0.0_f64, f64::max);
    let degree = s.quad(&sol.phi) / (2.0 * PI);
    ResidualCheck {
        weak_residual: worst,
        curvature_residual,
        degree,
        degree_defect: (degree - sol.n as f64).abs(),
        bumps,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdiabaticRow {
    pub eps: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub residual: f64,
    /// Sup of `| |u|^2 - tau / a |` at distance at least `delta` from the divisor.
    pub sup_defect: f64,
    pub mu_norm: f64,
    pub dbar_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdiabaticTable {
    pub delta: f64,
    pub rows: Vec<AdiabaticRow>,
    /// `sup_defect` strictly decreasing along the family.
    pub sup_decreasing: bool,
    pub mu_decreasing: bool,
}

/// Sup of `| |u|^2 - tau/a |` over nodes at least `delta` from the divisor.
pub fn off_divisor_defect(s: &Surface, sol: &VortexSolution, act: &ActionData, delta: f64) -> f64 {
    let a = act.af();
    let pts: Vec<Point> = sol.divisor.points.iter().map(|p| p.0).collect();
    (0..s.len())
        .filter(|&k| {
            let x = s.coords(k);
            pts.iter().all(|&p| s.distance(p, x) >= delta)
        })
        .map(|k| (sol.fsq[k] / (a * a) - act.tau / a).abs())
        .fold(0.0_f64, f64::max)
}

/// Solves the rescaled system for each `eps` (independently, in parallel).
pub fn adiabatic_family(
    s: &Surface,
    d: &Divisor,
    act: &ActionData,
    opts: &SolverOptions,
    eps_list: &[f64],
    delta: f64,
) -> Result<AdiabaticTable, SolveError> {
    use rayon::prelude::*;
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(SolveError::Options(
            "eps_list must be positive and strictly decreasing".into(),
        ));
    }
    let rows: Result<Vec<AdiabaticRow>, SolveError> = eps_list
        .par_iter()
        .map(|&eps| {
            let o = SolverOptions { eps, ..opts.clone() };
            let (sol, rep) = solve_taubes(s, d, act, &o)?;
            let (sup_defect, mu) = match (&sol, rep.status) {
                (Some(sol), SolveStatus::Converged) => {
                    let a = act.af();
                    let u2: Vec<f64> = sol.fsq.iter().map(|f| f / (a * a)).collect();
                    (off_divisor_defect(s, sol, act, delta), mu_norm(s, &u2, act))
                }
                _ => (f64::NAN, f64::NAN),
            };
            Ok(AdiabaticRow {
                eps,
                status: rep.status,
                iterations: rep.iterations,
                residual: rep.residual,
                sup_defect,
                mu_norm: mu,
                dbar_norm: 0.0,
            })
        })
        .collect();
    let rows = rows?;
    let decreasing = |f: &dyn Fn(&AdiabaticRow) -> f64| {
        rows.windows(2).all(|w| f(&w[1]) < f(&w[0]))
            || (rows.iter().all(|r| f(r) == 0.0) && d.degree() == 0)
    };
    let sup_decreasing = decreasing(&|r| r.sup_defect);
    let mu_decreasing = decreasing(&|r| r.mu_norm);
    Ok(AdiabaticTable {
        delta,
        rows,
        sup_decreasing,
        mu_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> Surface {
        Surface::torus(2.0 * PI, 2.0 * PI, n).unwrap()
    }

    #[test]
    fn feasibility_examples() {
        let a1 = |tau| ActionData::new(1, tau).unwrap();
        assert_eq!(feasibility(&a1(2.0), 1, 4.0 * PI), Feasibility::Feasible);
        assert_eq!(
            feasibility(&a1(0.8 / PI), 1, 4.0 * PI * PI),
            Feasibility::Infeasible { boundary: false }
        );
        let vol = 4.0 * PI * PI;
        assert_eq!(
            feasibility(&a1(critical_tau(1, 1, vol)), 1, vol),
            Feasibility::Infeasible { boundary: true }
        );
    }

    #[test]
    fn weight_has_log_slope_two_n() {
        let s = torus(128);
        let h = s.spacing();
        let p = (64.0 * h, 64.0 * h);
        for n in [1u32, 2] {
            let w = build_weight(&s, &Divisor::new(vec![(p, n)])).unwrap();
            assert!(s.quad(&w.w0).abs() < 1e-10);
            // Fit log W against log r along a ray.
            let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for k in 3..12 {
                let node = 64 * 128 + 64 + k;
                let r = s.distance(p, s.coords(node));
                let (x, y) = (r.ln(), w.w0[node]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                m += 1.0;
            }
            let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            let want = 2.0 * n as f64;
            assert!((slope - want).abs() < 0.05 * want, "n={n} slope {slope}");
        }
    }

    #[test]
    fn divisor_validation() {
        let s = torus(16);
        let bad = Divisor::new(vec![((7.0, 1.0), 1)]);
        assert!(matches!(build_weight(&s, &bad), Err(SolveError::OffSurface(..))));
        let zero = Divisor::new(vec![((1.0, 1.0), 0)]);
        assert_eq!(build_weight(&s, &zero).unwrap_err(), SolveError::ZeroMultiplicity);
    }

    #[test]
    fn vacuum_is_constant() {
        let s = torus(32);
        let act = ActionData::new(2, 1.5).unwrap();
        let (sol, rep) = solve_taubes(&s, &Divisor::empty(), &act, &SolverOptions::default()).unwrap();
        let sol = sol.unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.residual <= 1e-12);
        for &f in sol.fsq.iter() {
            assert!((f - act.af() * act.tau).abs() < 1e-12);
        }
        assert!(sol.phi.max_abs() < 1e-12);
        let check = residual_check(&s, &sol, &act);
        assert!(check.weak_residual < 1e-12 && check.curvature_residual < 1e-12);
        assert!(rep.zeros.unwrap().zeros.is_empty());
    }

    #[test]
    fn below_threshold_is_infeasible() {
        let s = torus(32);
        let tau = 0.9 * critical_tau(1, 1, s.volume());
        let act = ActionData::new(1, tau).unwrap();
        let d = Divisor::new(vec![((1.0, 1.0), 1)]);
        let (sol, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
        assert!(sol.is_none());
        assert_eq!(rep.status, SolveStatus::Infeasible);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn single_vortex_on_torus() {
        let s = torus(64);
        let tau = 1.2 * critical_tau(1, 1, s.volume());
        let act = ActionData::new(1, tau).unwrap();
        let d = Divisor::new(vec![((2.0, 3.0), 1)]);
        let (sol, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
        let sol = sol.unwrap();
        assert_eq!(rep.status, SolveStatus::Converged, "{:?}", rep.residual_history);
        assert!(rep.iterations <= 12);
        assert!((rep.degree - 1.0).abs() < 1e-6);
        assert!(rep.obstruction_defect < 1e-10);
        assert!(rep.max_principle_ratio <= 1.0 + 1e-6);
        let check = residual_check(&s, &sol, &act);
        assert!(check.weak_residual < 1e-7, "{}", check.weak_residual);
    }

    #[test]
    fn perturbation_scales_residual() {
        let s = torus(32);
        let act = ActionData::new(1, 0.5).unwrap();
        let d = Divisor::new(vec![((3.0, 3.0), 1)]);
        let (sol, _) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
        let sol = sol.unwrap();
        let bump: Vec<f64> = s.node_coords().iter().map(|p| (p.0).sin() * (p.1).cos()).collect();
        let res = |t: f64| {
            let mut v = sol.clone();
            for (h, b) in v.h.iter_mut().zip(&bump) {
                *h += t * b;
            }
            residual_check(&s, &v, &act).weak_residual
        };
        let (r1, r2) = (res(1e-3), res(2e-3));
        assert!((r2 / r1 - 2.0).abs() < 0.05, "{r1} {r2}");
    }

    #[test]
    fn football_solution_stays_invariant() {
        let s = Surface::football(3, 32, 48).unwrap();
        let act = ActionData::new(3, 4.0).unwrap();
        let d = Divisor::new(vec![((1.1, 0.3), 3)]);
        let (_, rep) = solve_taubes(&s, &d, &act, &SolverOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!((rep.degree - 3.0).abs() < 1e-5);
        assert!(rep.equivariance_defect <= 1e-10);
    }

    #[test]
    fn quadratic_tail_fit() {
        assert_eq!(quadratic_tail(&[1.0, 0.1]), None);
        assert_eq!(quadratic_tail(&[1.0, 0.1, 0.01, 1e-4]), Some(1.0));
    }
}
