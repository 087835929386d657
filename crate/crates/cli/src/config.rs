//! Run configuration: a JSON document validated before any computation.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use orbivortex_core::fields::ActionData;
use orbivortex_core::solver::{Divisor, SolverOptions};
use orbivortex_core::surface::Surface;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(text: &str, key: &str, message: impl Into<String>) -> Self {
        Self {
            line: key_line(text, key),
            column: None,
            message: message.into(),
        }
    }

    pub fn plain(message: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

/// First line mentioning `"key"`, 1-based.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceName {
    Torus,
    Sphere,
    Football,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Square(usize),
    Grid([usize; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub kind: SurfaceName,
    /// Cone order of a football.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub resolution: Resolution,
    /// Torus side lengths; defaults to `2 pi` each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    pub a: i64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_newton: usize,
    pub cg_tol_factor: f64,
    pub max_cg: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tol: d.tol,
            max_newton: d.max_newton,
            cg_tol_factor: d.cg_tol_factor,
            max_cg: d.max_cg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub samples: usize,
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMode {
    Trivial,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyCheckConfig {
    pub mode: EnergyMode,
    #[serde(default = "one")]
    pub samples: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path; the report always goes to stdout as well.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// Directory for CSV field dumps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields_dir: Option<String>,
    /// CSV table for scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    pub action: ActionConfig,
    /// Points `[x1, x2, multiplicity]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor: Option<Vec<(f64, f64, u32)>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "unit")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    /// Exclusion radius around the divisor for adiabatic sup norms.
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_check: Option<EnergyCheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn unit() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

/// Command-line values that replace configuration keys.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub a: Option<i64>,
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub resolution: Option<Vec<usize>>,
    pub report: Option<String>,
}

/// A configuration together with the objects it describes.
pub struct Resolved {
    pub config: RunConfig,
    pub surface: Surface,
    pub action: ActionData,
    pub options: SolverOptions,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string().split(" at line ").next().unwrap_or("").to_string(),
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(a) = o.a {
            self.action.a = a;
        }
        if let Some(tau) = o.tau {
            self.action.tau = tau;
        }
        if let Some(eps) = o.eps {
            self.eps = eps;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(r) = &o.resolution {
            self.surface.resolution = match r.as_slice() {
                [n] => Resolution::Square(*n),
                [a, b] => Resolution::Grid([*a, *b]),
                _ => return Err(ConfigError::plain("--resolution takes one or two integers")),
            };
        }
        if let Some(p) = &o.report {
            self.output.report = Some(p.clone());
        }
        Ok(())
    }

    /// Validates every precondition and builds the surface and action data.
    /// `text` is the source document, used to attach line numbers.
    pub fn resolve(self, text: &str) -> Result<Resolved, ConfigError> {
        let surface = self.build_surface().map_err(|m| ConfigError::at(text, "surface", m))?;
        let action = ActionData::new(self.action.a, self.action.tau)
            .map_err(|e| ConfigError::at(text, "action", e.to_string()))?;
        let options = SolverOptions {
            tol: self.solver.tol,
            max_newton: self.solver.max_newton,
            cg_tol_factor: self.solver.cg_tol_factor,
            max_cg: self.solver.max_cg,
            eps: self.eps,
        };
        options
            .validate()
            .map_err(|e| ConfigError::at(text, "solver", e.to_string()))?;
        if let Some(d) = &self.divisor {
            divisor_of(d)
                .validate(&surface)
                .map_err(|e| ConfigError::at(text, "divisor", e.to_string()))?;
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty()
                || list.iter().any(|e| !(*e > 0.0 && e.is_finite()))
                || list.windows(2).any(|w| !(w[1] < w[0]))
            {
                return Err(ConfigError::at(
                    text,
                    "eps_list",
                    "eps_list must be positive and strictly decreasing",
                ));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(ConfigError::at(text, "delta", "delta must be non-negative"));
        }
        if let Some(grid) = &self.tau_grid {
            if grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
                || grid.windows(2).any(|w| !(w[0] < w[1]))
            {
                return Err(ConfigError::at(
                    text,
                    "tau_grid",
                    "tau_grid must be positive and strictly ascending",
                ));
            }
        }
        Ok(Resolved {
            config: self,
            surface,
            action,
            options,
        })
    }

    fn build_surface(&self) -> Result<Surface, String> {
        let s = &self.surface;
        let err = |e: orbivortex_core::surface::SurfaceError| e.to_string();
        match s.kind {
            SurfaceName::Torus => {
                let n = match s.resolution {
                    Resolution::Square(n) => n,
                    Resolution::Grid([a, b]) if a == b => a,
                    Resolution::Grid(_) => return Err("torus grids are square".into()),
                };
                let [l1, l2] = s.periods.unwrap_or([2.0 * PI, 2.0 * PI]);
                if s.m.is_some() {
                    return Err("cone order m only applies to a football".into());
                }
                Surface::torus(l1, l2, n).map_err(err)
            }
            SurfaceName::Sphere | SurfaceName::Football => {
                if s.periods.is_some() {
                    return Err("periods only apply to a torus".into());
                }
                let (nt, np) = match s.resolution {
                    Resolution::Square(n) => (n, 2 * n),
                    Resolution::Grid([a, b]) => (a, b),
                };
                if s.kind == SurfaceName::Sphere {
                    if s.m.is_some() {
                        return Err("cone order m only applies to a football".into());
                    }
                    Surface::sphere(nt, np).map_err(err)
                } else {
                    let m = s.m.ok_or("a football needs its cone order m")?;
                    Surface::football(m, nt, np).map_err(err)
                }
            }
        }
    }
}

impl Resolved {
    pub fn divisor(&self) -> Result<Divisor, ConfigError> {
        match &self.config.divisor {
            Some(d) => Ok(divisor_of(d)),
            None => Err(ConfigError::plain("missing key \"divisor\"")),
        }
    }
}

fn divisor_of(d: &[(f64, f64, u32)]) -> Divisor {
    Divisor::new(d.iter().map(|&(x, y, n)| ((x, y), n)).collect())
}
