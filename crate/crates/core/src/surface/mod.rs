//! Discrete base surfaces: flat tori, the round sphere and its `Z/m`
//! rotation quotients ("footballs" with two antipodal cone points).
//!
//! Football quotients are represented on the full covering sphere. Fields
//! are lifted to the cover and kept in the invariant subspace; quadrature
//! weights are the covering cell areas divided by `m`, so every integral is
//! an orbifold integral.
//!
//! Points are given in chart coordinates: `(x, y)` on a torus and
//! `(theta, phi)` (colatitude, azimuth) on spheres.

mod field;
mod sphere;
mod torus;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

pub use field::{ComplexField, ComplexOneForm, OneForm, ScalarField, TwoFormDensity};
use sphere::SphereGrid;
use torus::TorusGrid;

pub type Point = (f64, f64);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("torus resolution {0} is not a power of two >= 16")]
    TorusResolution(usize),
    #[error("torus periods must be positive and finite, got ({0}, {1})")]
    TorusPeriods(f64, f64),
    #[error("cone order must be at least 1")]
    ConeOrder,
    #[error("n_phi = {n_phi} is not divisible by the cone order {m}")]
    NotDivisible { m: usize, n_phi: usize },
    #[error("sphere grid needs n_theta >= 4 and an even n_phi >= 8, got {0}x{1}")]
    SphereResolution(usize, usize),
    #[error("field has {got} values, surface has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("field contains a non-finite value at node {0}")]
    NonFinite(usize),
    #[error("point ({0}, {1}) is not on the surface")]
    OffSurface(f64, f64),
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    Torus,
    Sphere,
    Football,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Torus => "torus",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Football => "football",
        }
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Torus(TorusGrid),
    Sphere(SphereGrid),
}

/// Green function of the Laplacian with its pole snapped to a grid node.
#[derive(Clone, Debug)]
pub struct Green {
    pub field: ScalarField,
    pub node: usize,
    /// Distance between the requested point and the node actually used.
    pub snap_distance: f64,
}

/// A field read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvField {
    pub kind: String,
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Surface {
    kind: SurfaceKind,
    m: usize,
    n1: usize,
    n2: usize,
    backend: Backend,
    weights: Vec<f64>,
    volume: f64,
}

impl Surface {
    /// Flat torus `[0, l1) x [0, l2)` with `n x n` nodes.
    pub fn torus(l1: f64, l2: f64, n: usize) -> Result<Self, SurfaceError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(SurfaceError::TorusResolution(n));
        }
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(SurfaceError::TorusPeriods(l1, l2));
        }
        let w = l1 * l2 / (n * n) as f64;
        Ok(Self {
            kind: SurfaceKind::Torus,
            m: 1,
            n1: n,
            n2: n,
            backend: Backend::Torus(TorusGrid::new(l1, l2, n)),
            weights: vec![w; n * n],
            volume: l1 * l2,
        })
    }

    /// Unit round sphere.
    pub fn sphere(n_theta: usize, n_phi: usize) -> Result<Self, SurfaceError> {
        Self::football(1, n_theta, n_phi)
    }

    /// Quotient of the unit sphere by rotation through `2 pi / m`; `m = 1`
    /// gives the smooth sphere.
    pub fn football(m: usize, n_theta: usize, n_phi: usize) -> Result<Self, SurfaceError> {
        if m == 0 {
            return Err(SurfaceError::ConeOrder);
        }
        if !n_phi.is_multiple_of(m) {
            return Err(SurfaceError::NotDivisible { m, n_phi });
        }
        if n_theta < 4 || n_phi < 8 || !n_phi.is_multiple_of(2) {
            return Err(SurfaceError::SphereResolution(n_theta, n_phi));
        }
        let grid = SphereGrid::new(n_theta, n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            weights.extend(std::iter::repeat_n(grid.cell_area[i] / m as f64, n_phi));
        }
        let cover: f64 = grid.cell_area.iter().sum::<f64>() * n_phi as f64;
        Ok(Self {
            kind: if m == 1 {
                SurfaceKind::Sphere
            } else {
                SurfaceKind::Football
            },
            m,
            n1: n_theta,
            n2: n_phi,
            backend: Backend::Sphere(grid),
            weights,
            volume: cover / m as f64,
        })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn cone_order(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Torus periods; `None` on spheres.
    pub fn periods(&self) -> Option<(f64, f64)> {
        match &self.backend {
            Backend::Torus(t) => Some((t.l1, t.l2)),
            Backend::Sphere(_) => None,
        }
    }

    /// Largest grid spacing in length units.
    pub fn spacing(&self) -> f64 {
        match &self.backend {
            Backend::Torus(t) => t.h1().max(t.h2()),
            Backend::Sphere(s) => s.dtheta.max(s.dphi),
        }
    }

    pub fn coords(&self, node: usize) -> Point {
        match &self.backend {
            Backend::Torus(t) => t.coords(node),
            Backend::Sphere(s) => s.coords(node),
        }
    }

    pub fn node_coords(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.coords(k)).collect()
    }

    fn check_len(&self, f: &[f64]) -> Result<(), SurfaceError> {
        if f.len() != self.len() {
            return Err(SurfaceError::Length {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Orbifold integral of `f`; rejects non-finite values.
    pub fn integrate(&self, f: &[f64]) -> Result<f64, SurfaceError> {
        self.check_len(f)?;
        if let Some(k) = f.iter().position(|v| !v.is_finite()) {
            return Err(SurfaceError::NonFinite(k));
        }
        Ok(self.quad(f))
    }

    /// Weighted sum without validation.
    pub fn quad(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.quad(f) / self.volume
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    pub fn laplacian(&self, f: &[f64]) -> ScalarField {
        ScalarField(match &self.backend {
            Backend::Torus(t) => t.laplacian(f),
            Backend::Sphere(s) => s.laplacian(f),
        })
    }

    /// `(Delta - sigma)^{-1} rhs` for `sigma >= 0`. With `sigma == 0` this is
    /// the pseudo-inverse: the mean of `rhs` is discarded and the result is
    /// mean-free.
    pub fn solve_shifted(&self, rhs: &[f64], sigma: f64) -> ScalarField {
        let data: Vec<f64> = if sigma == 0.0 {
            let mean = self.mean(rhs);
            rhs.iter().map(|v| v - mean).collect()
        } else {
            rhs.to_vec()
        };
        ScalarField(match &self.backend {
            Backend::Torus(t) => t.solve_shifted(&data, sigma),
            Backend::Sphere(s) => s.solve_shifted(&data, sigma),
        })
    }

    /// Node nearest to `p`.
    pub fn snap(&self, p: Point) -> Result<usize, SurfaceError> {
        if !(p.0.is_finite() && p.1.is_finite()) {
            return Err(SurfaceError::OffSurface(p.0, p.1));
        }
        match &self.backend {
            Backend::Torus(t) => Ok(t.snap(p.0, p.1)),
            Backend::Sphere(s) => {
                if !(0.0..=PI).contains(&p.0) {
                    return Err(SurfaceError::OffSurface(p.0, p.1));
                }
                Ok(s.snap(p.0, p.1))
            }
        }
    }

    /// True when `p` is one of the two cone points of a football.
    pub fn is_cone_point(&self, p: Point) -> bool {
        self.kind == SurfaceKind::Football && (p.0 == 0.0 || p.0 == PI)
    }

    /// Images of `p` under the rotation group (just `p` off footballs).
    pub fn orbit(&self, p: Point) -> Vec<Point> {
        if self.m == 1 || self.is_cone_point(p) {
            return vec![p];
        }
        (0..self.m)
            .map(|l| (p.0, (p.1 + 2.0 * PI * l as f64 / self.m as f64).rem_euclid(2.0 * PI)))
            .collect()
    }

    /// Node indices in the rotation orbit of `node`.
    pub fn orbit_nodes(&self, node: usize) -> Vec<usize> {
        if self.m == 1 {
            return vec![node];
        }
        let shift = self.n2 / self.m;
        let i = node / self.n2;
        let j = node % self.n2;
        (0..self.m)
            .map(|l| i * self.n2 + (j + l * shift) % self.n2)
            .collect()
    }

    /// Geodesic distance between points; on footballs the quotient distance.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        match &self.backend {
            Backend::Torus(t) => t.distance(a, b),
            Backend::Sphere(_) => self
                .orbit(b)
                .into_iter()
                .map(|q| SphereGrid::great_circle(a, q))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Distance on the covering surface (no orbit minimisation).
    pub fn cover_distance(&self, a: Point, b: Point) -> f64 {
        match &self.backend {
            Backend::Torus(t) => t.distance(a, b),
            Backend::Sphere(_) => SphereGrid::great_circle(a, b),
        }
    }

    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        match &self.backend {
            Backend::Torus(t) => t.neighbours(node),
            Backend::Sphere(s) => s.neighbours(node),
        }
    }

    /// Discrete delta at the node nearest `p`: unit orbifold integral. On a
    /// football it is spread over the orbit; at a cone point over the polar
    /// ring.
    pub fn delta(&self, p: Point) -> Result<(ScalarField, usize), SurfaceError> {
        let node = self.snap(p)?;
        let mut f = vec![0.0; self.len()];
        if self.is_cone_point(p) {
            let i = node / self.n2;
            let ring: f64 = self.weights[i * self.n2] * self.n2 as f64;
            for j in 0..self.n2 {
                f[i * self.n2 + j] = 1.0 / ring;
            }
        } else {
            let nodes = self.orbit_nodes(node);
            let w = self.weights[node] * nodes.len() as f64;
            for k in nodes {
                f[k] = 1.0 / w;
            }
        }
        Ok((ScalarField(f), node))
    }

    /// `G_p` with `Delta G_p = delta_p - 1/Vol` and zero mean.
    pub fn green_function(&self, p: Point) -> Result<Green, SurfaceError> {
        let (delta, node) = self.delta(p)?;
        let field = self.solve_shifted(&delta, 0.0);
        let snap_distance = self.distance(p, self.coords(node));
        Ok(Green {
            field,
            node,
            snap_distance,
        })
    }

    /// `*(f dvol) = f`.
    pub fn hodge_star(&self, omega: &TwoFormDensity) -> ScalarField {
        ScalarField(omega.0.clone())
    }

    /// Average over the rotation group; identity off footballs.
    pub fn project_invariant(&self, f: &[f64]) -> ScalarField {
        if self.m == 1 {
            return ScalarField(f.to_vec());
        }
        let shift = self.n2 / self.m;
        let mut out = vec![0.0; f.len()];
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let s: f64 = (0..self.m)
                    .map(|l| f[i * self.n2 + (j + l * shift) % self.n2])
                    .sum();
                out[i * self.n2 + j] = s / self.m as f64;
            }
        }
        ScalarField(out)
    }

    pub fn project_invariant_complex(&self, f: &[Complex64]) -> ComplexField {
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        ComplexField::from_parts(&self.project_invariant(&re), &self.project_invariant(&im))
    }

    /// Sup distance of `f` from its invariant projection.
    pub fn equivariance_defect(&self, f: &[f64]) -> f64 {
        let p = self.project_invariant(f);
        f.iter()
            .zip(p.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Frame components of `df`.
    pub fn gradient(&self, f: &[f64]) -> OneForm {
        let (c1, c2) = match &self.backend {
            Backend::Torus(t) => t.gradient(f),
            Backend::Sphere(s) => s.gradient(f),
        };
        OneForm { c1, c2 }
    }

    pub fn gradient_complex(&self, f: &[Complex64]) -> ComplexOneForm {
        match &self.backend {
            Backend::Torus(t) => {
                let (c1, c2) = t.gradient_complex(f);
                ComplexOneForm { c1, c2 }
            }
            Backend::Sphere(s) => {
                let re: Vec<f64> = f.iter().map(|z| z.re).collect();
                let im: Vec<f64> = f.iter().map(|z| z.im).collect();
                let (r1, r2) = s.gradient(&re);
                let (i1, i2) = s.gradient(&im);
                ComplexOneForm {
                    c1: ComplexField::from_parts(&r1, &i1).0,
                    c2: ComplexField::from_parts(&r2, &i2).0,
                }
            }
        }
    }

    /// Density of `d(alpha)` against `dvol`.
    pub fn curl(&self, alpha: &OneForm) -> ScalarField {
        ScalarField(match &self.backend {
            Backend::Torus(t) => t.curl(&alpha.c1, &alpha.c2),
            Backend::Sphere(s) => s.curl(&alpha.c1, &alpha.c2),
        })
    }

    /// Row-major CSV with a `# kind,n1,n2` header line.
    pub fn to_csv(&self, f: &[f64]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {},{},{}", self.kind.name(), self.n1, self.n2);
        for i in 0..self.n1 {
            let row: Vec<String> = (0..self.n2)
                .map(|j| format!("{:.16e}", f[i * self.n2 + j]))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<CsvField, SurfaceError> {
        let bad = |msg: String| SurfaceError::Csv(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| bad("missing '# kind,n1,n2' header".into()))?;
        let parts: Vec<&str> = header.split(',').collect();
        if parts.len() != 3 {
            return Err(bad(format!("malformed header '{header}'")));
        }
        let n1: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad n1 '{}'", parts[1])))?;
        let n2: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad n2 '{}'", parts[2])))?;
        let mut values = Vec::with_capacity(n1 * n2);
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let before = values.len();
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad number '{tok}'", row + 2)))?;
                values.push(v);
            }
            if values.len() - before != n2 {
                return Err(bad(format!("line {}: expected {n2} columns", row + 2)));
            }
        }
        if values.len() != n1 * n2 {
            return Err(bad(format!("expected {n1} rows, got {}", values.len() / n2.max(1))));
        }
        Ok(CsvField {
            kind: parts[0].trim().to_string(),
            n1,
            n2,
            values,
        })
    }
}
