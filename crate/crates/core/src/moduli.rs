//! Probes of the correspondence between vortex solutions and effective
//! divisors: zero location, divisor round trips, threshold scans and random
//! sampling of the symmetric product.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::fields::ActionData;
use crate::solver::{
    critical_tau, feasibility, solve_taubes, Divisor, Feasibility, SolveError, SolveStatus,
    SolverOptions, VortexSolution,
};
use crate::surface::{Point, Surface};

/// Candidate zeros must have `|f|^2` below this fraction of its vacuum value.
/// Where `|f|^2 < a tau` the logarithm is superharmonic, so local minima there
/// only occur at zeros; the cut keeps nodes a fraction of a spacing off a
/// zero on coarse grids.
pub const ZERO_THRESHOLD: f64 = 0.1;
/// Points closer than this many grid spacings are one zero.
pub const MERGE_SPACINGS: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Zero {
    pub position: Point,
    pub node: usize,
    pub multiplicity: u32,
    /// Cell integral before rounding.
    pub raw_multiplicity: f64,
    /// `(1/2 pi)` times the curvature integral over the cell alone.
    pub curvature_flux: f64,
    /// Localization uncertainty in grid spacings.
    pub error_spacings: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub total: i64,
    pub expected: i64,
    pub sum_matches: bool,
    /// Largest `|raw - rounded|` over the zeros.
    pub max_rounding_defect: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut k = i;
        while self.0[k] != r {
            let next = self.0[k];
            self.0[k] = r;
            k = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }

    /// Groups in order of their smallest member.
    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

/// Zeros of `|f|^2` with multiplicities from vorticity cell integrals.
///
/// Candidates are discrete local minima of `|f|^2` below
/// `ZERO_THRESHOLD * a tau`; candidates within two grid spacings are merged.
/// Every node is assigned to the nearest zero, and the multiplicity is the
/// vorticity of that cell, `(1/2 pi) integral phi + (1/4 pi) integral Delta h`;
/// the second term accounts for the curvature flux leaving the cell. On a
/// football the zeros of one rotation orbit are reported once, with the
/// orbit's total.
pub fn locate_zeros(s: &Surface, sol: &VortexSolution, act: &ActionData) -> ZeroSet {
    let threshold = ZERO_THRESHOLD * act.af() * act.tau;
    let fsq = &sol.fsq;
    let candidates: Vec<usize> = (0..s.len())
        .filter(|&k| fsq[k] < threshold && s.neighbours(k).iter().all(|&j| fsq[k] <= fsq[j]))
        .collect();
    let merge = MERGE_SPACINGS * s.spacing();
    let coords: Vec<Point> = candidates.iter().map(|&k| s.coords(k)).collect();
    let mut uf = UnionFind::new(candidates.len());
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            if s.cover_distance(coords[i], coords[j]) <= merge {
                uf.union(i, j);
            }
        }
    }
    let clusters = uf.groups();
    // Representative of each cluster: smallest |f|^2, lowest index on ties.
    let reps: Vec<usize> = clusters
        .iter()
        .map(|g| {
            *g.iter()
                .min_by(|&&a, &&b| fsq[candidates[a]].total_cmp(&fsq[candidates[b]]).then(a.cmp(&b)))
                .expect("nonempty cluster")
        })
        .collect();
    let rep_coords: Vec<Point> = reps.iter().map(|&r| coords[r]).collect();
    let spread: Vec<f64> = clusters
        .iter()
        .zip(&reps)
        .map(|(g, &r)| {
            g.iter()
                .map(|&i| s.cover_distance(coords[i], coords[r]))
                .fold(0.0_f64, f64::max)
        })
        .collect();

    let lap_h = s.laplacian(&sol.h);
    let mut vorticity = vec![0.0; reps.len()];
    let mut flux = vec![0.0; reps.len()];
    if !reps.is_empty() {
        for k in 0..s.len() {
            let x = s.coords(k);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, &p) in rep_coords.iter().enumerate() {
                let d = s.cover_distance(p, x);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            let w = s.weights()[k];
            flux[best] += w * sol.phi[k] / (2.0 * PI);
            vorticity[best] += w * (sol.phi[k] / (2.0 * PI) + lap_h[k] / (4.0 * PI));
        }
    }

    // Merge clusters lying in one rotation orbit.
    let mut orbits = UnionFind::new(reps.len());
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if s.distance(rep_coords[i], rep_coords[j]) <= merge {
                orbits.union(i, j);
            }
        }
    }
    let h = s.spacing();
    let mut zeros = Vec::new();
    for group in orbits.groups() {
        let first = group[0];
        let raw: f64 = group.iter().map(|&i| vorticity[i]).sum();
        let curvature_flux: f64 = group.iter().map(|&i| flux[i]).sum();
        let rounded = raw.round();
        if rounded < 1.0 {
            continue;
        }
        zeros.push(Zero {
            position: rep_coords[first],
            node: candidates[reps[first]],
            multiplicity: rounded as u32,
            raw_multiplicity: raw,
            curvature_flux,
            error_spacings: spread[first] / h + 0.5_f64.sqrt(),
        });
    }
    let total: i64 = zeros.iter().map(|z| z.multiplicity as i64).sum();
    let max_rounding_defect = zeros
        .iter()
        .map(|z| (z.raw_multiplicity - z.multiplicity as f64).abs())
        .fold(0.0_f64, f64::max);
    ZeroSet {
        zeros,
        total,
        expected: sol.n,
        sum_matches: total == sol.n,
        max_rounding_defect,
    }
}

/// Merges divisor points closer than the zero-merging radius.
pub fn cluster_divisor(s: &Surface, d: &Divisor) -> Vec<(Point, u32)> {
    let merge = MERGE_SPACINGS * s.spacing();
    let mut uf = UnionFind::new(d.points.len());
    for i in 0..d.points.len() {
        for j in i + 1..d.points.len() {
            if s.distance(d.points[i].0, d.points[j].0) <= merge {
                uf.union(i, j);
            }
        }
    }
    uf.groups()
        .into_iter()
        .map(|g| (d.points[g[0]].0, g.iter().map(|&i| d.points[i].1).sum()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrip {
    pub status: SolveStatus,
    /// Largest distance between a prescribed and a located zero.
    pub max_position_error: f64,
    pub max_error_spacings: f64,
    pub multiplicity_match: bool,
    pub success: bool,
    pub located: Vec<(Point, u32)>,
}

/// Greedy nearest matching with ties broken by index order. Returns pairs
/// `(expected, located, distance)`.
fn greedy_match(s: &Surface, want: &[(Point, u32)], got: &[(Point, u32)]) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::new();
    for (i, w) in want.iter().enumerate() {
        for (j, g) in got.iter().enumerate() {
            pairs.push((s.distance(w.0, g.0), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_w = vec![false; want.len()];
    let mut used_g = vec![false; got.len()];
    let mut out = Vec::new();
    for (d, i, j) in pairs {
        if !used_w[i] && !used_g[j] {
            used_w[i] = true;
            used_g[j] = true;
            out.push((i, j, d));
        }
    }
    out
}

/// Solves for the divisor, locates the zeros and compares the multisets.
pub fn divisor_roundtrip(
    s: &Surface,
    d: &Divisor,
    act: &ActionData,
    opts: &SolverOptions,
) -> Result<RoundTrip, SolveError> {
    let (_, report) = solve_taubes(s, d, act, opts)?;
    let h = s.spacing();
    let Some(zs) = report.zeros else {
        return Ok(RoundTrip {
            status: report.status,
            max_position_error: f64::NAN,
            max_error_spacings: f64::NAN,
            multiplicity_match: false,
            success: false,
            located: Vec::new(),
        });
    };
    let want = cluster_divisor(s, d);
    let got: Vec<(Point, u32)> = zs.zeros.iter().map(|z| (z.position, z.multiplicity)).collect();
    let matched = greedy_match(s, &want, &got);
    let complete = matched.len() == want.len() && want.len() == got.len();
    let multiplicity_match =
        complete && matched.iter().all(|&(i, j, _)| want[i].1 == got[j].1);
    let max_position_error = matched.iter().map(|m| m.2).fold(0.0_f64, f64::max);
    let success = report.status == SolveStatus::Converged
        && multiplicity_match
        && max_position_error <= MERGE_SPACINGS * h;
    Ok(RoundTrip {
        status: report.status,
        max_position_error,
        max_error_spacings: max_position_error / h,
        multiplicity_match,
        success,
        located: got,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub tau: f64,
    pub status: SolveStatus,
    pub boundary: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub tau_star: f64,
    pub rows: Vec<ScanRow>,
    /// Number of status changes along the grid.
    pub flips: usize,
    /// Statuses are infeasible exactly below `tau_star` and converged above.
    pub consistent: bool,
}

/// `n` distinct, well separated points placed deterministically.
pub fn spread_divisor(s: &Surface, n: usize) -> Divisor {
    let points = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n.max(1) as f64;
            let p = match s.periods() {
                Some((l1, l2)) => (t * l1, ((0.37 + 0.61 * t) % 1.0) * l2),
                None => (0.3 + 0.5 * PI * t, (2.0 * PI * (0.13 + 0.41 * t / s.cone_order() as f64)) % (2.0 * PI)),
            };
            (p, 1)
        })
        .collect();
    Divisor::new(points)
}

/// Solves at each `tau` of an ascending grid, in parallel.
pub fn threshold_scan(
    s: &Surface,
    d: &Divisor,
    a: i64,
    tau_grid: &[f64],
    opts: &SolverOptions,
) -> Result<ThresholdScan, SolveError> {
    if tau_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SolveError::Options("tau grid must be strictly ascending".into()));
    }
    let rows: Result<Vec<ScanRow>, SolveError> = tau_grid
        .par_iter()
        .map(|&tau| {
            let act = ActionData::new(a, tau)
                .map_err(|e| SolveError::Options(e.to_string()))?;
            let (_, rep) = solve_taubes(s, d, &act, opts)?;
            Ok(ScanRow {
                tau,
                status: rep.status,
                boundary: rep.boundary,
                residual: rep.residual,
            })
        })
        .collect();
    let rows = rows?;
    let tau_star = critical_tau(a, d.degree(), s.volume() * opts.eps.powi(-2));
    let flips = rows.windows(2).filter(|w| w[0].status != w[1].status).count();
    let consistent = rows.iter().all(|r| {
        let act = ActionData { a, tau: r.tau / (opts.eps * opts.eps) };
        match feasibility(&act, d.degree(), s.volume()) {
            Feasibility::Feasible => r.status == SolveStatus::Converged,
            Feasibility::Infeasible { .. } => r.status == SolveStatus::Infeasible,
        }
    });
    Ok(ThresholdScan {
        tau_star,
        rows,
        flips,
        consistent,
    })
}

/// A uniformly distributed point of the base.
pub fn random_point<R: Rng + ?Sized>(s: &Surface, rng: &mut R) -> Point {
    match s.periods() {
        Some((l1, l2)) => (rng.gen_range(0.0..l1), rng.gen_range(0.0..l2)),
        None => {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let sector = 2.0 * PI / s.cone_order() as f64;
            (z.acos(), rng.gen_range(0.0..sector))
        }
    }
}

pub fn random_divisor<R: Rng + ?Sized>(s: &Surface, n: usize, rng: &mut R) -> Divisor {
    Divisor::new((0..n).map(|_| (random_point(s, rng), 1)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSample {
    pub divisor: Divisor,
    pub status: SolveStatus,
    pub success: bool,
    pub max_error_spacings: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub n: i64,
    pub samples: usize,
    pub feasible: bool,
    pub successes: usize,
    /// `None` when the degree is above the existence bound; serialized as
    /// `"n/a"`.
    #[serde(serialize_with = "rate_or_na")]
    pub success_rate: Option<f64>,
    pub max_error_spacings: f64,
    pub mean_error_spacings: f64,
    pub results: Vec<ProbeSample>,
}

fn rate_or_na<S: Serializer>(rate: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match rate {
        Some(r) => s.serialize_f64(*r),
        None => s.serialize_str("n/a"),
    }
}

/// Round trips for `samples` random degree-`n` divisors drawn from `seed`.
pub fn symmetric_product_probe(
    s: &Surface,
    act: &ActionData,
    n: usize,
    samples: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<ProbeSummary, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let divisors: Vec<Divisor> = (0..samples).map(|_| random_divisor(s, n, &mut rng)).collect();
    let scaled = ActionData {
        a: act.a,
        tau: act.tau / (opts.eps * opts.eps),
    };
    let feasible = feasibility(&scaled, n as i64, s.volume()) == Feasibility::Feasible;
    let results: Result<Vec<ProbeSample>, SolveError> = divisors
        .into_par_iter()
        .map(|d| {
            let rt = divisor_roundtrip(s, &d, act, opts)?;
            Ok(ProbeSample {
                divisor: d,
                status: rt.status,
                success: rt.success,
                max_error_spacings: rt.max_error_spacings,
            })
        })
        .collect();
    let results = results?;
    let successes = results.iter().filter(|r| r.success).count();
    let errors: Vec<f64> = results
        .iter()
        .filter(|r| r.status == SolveStatus::Converged)
        .map(|r| r.max_error_spacings)
        .collect();
    let max_error_spacings = errors.iter().cloned().fold(0.0_f64, f64::max);
    let mean_error_spacings = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    Ok(ProbeSummary {
        n: n as i64,
        samples,
        feasible,
        successes,
        success_rate: if feasible && samples > 0 {
            Some(successes as f64 / samples as f64)
        } else {
            None
        },
        max_error_spacings,
        mean_error_spacings,
        results,
    })
}
