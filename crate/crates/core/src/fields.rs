//! Kinematics of the circle acting on `C` with weight `a`.
//!
//! Connections are `A = A_0 + alpha` where `A_0` is a fixed background of
//! constant curvature carrying the degree `N`, and `alpha = i (c1 e^1 + c2 e^2)`
//! is stored by its real coefficients. Imaginary quantities (moment map,
//! curvature, residual `r2`) are stored as the coefficient of `i`.
//!
//! Conventions:
//! - `d_A u = du - a i alpha u` (infinitesimal action `xi z -> a xi z`);
//! - `F_A = i (d alpha + 2 pi N / Vol) dvol`, so the degree is
//!   `N = (1/2 pi) * integral of the i-coefficient`;
//! - `mu(z) = (i/2)(a |z|^2 - tau)`;
//! - `<xi1, xi2> = -xi1 xi2` on `iR`, hence `|xi|^2 = -xi^2`.
//!
//! A section of a nontrivial bundle is not a global function in this chart
//! model, so derivative-based operations require `N = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::surface::{ComplexField, ComplexOneForm, OneForm, ScalarField, Surface, TwoFormDensity};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldsError {
    #[error("weight a must be >= 1 and tau > 0, got a = {a}, tau = {tau}")]
    InvalidAction { a: i64, tau: f64 },
    #[error("derivatives of sections need the trivial-bundle chart (N = 0), got N = {0}")]
    NontrivialBundle(i64),
    #[error("gauge transform has modulus {modulus} at node {node}")]
    NonUnitGauge { node: usize, modulus: f64 },
    #[error("eps must be positive and finite, got {0}")]
    InvalidEps(f64),
    #[error("field length {got} does not match surface size {expected}")]
    Length { expected: usize, got: usize },
}

/// Weight `a` and level `tau` of the circle action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActionData {
    pub a: i64,
    pub tau: f64,
}

impl ActionData {
    pub fn new(a: i64, tau: f64) -> Result<Self, FieldsError> {
        if a < 1 || !(tau > 0.0 && tau.is_finite()) {
            return Err(FieldsError::InvalidAction { a, tau });
        }
        Ok(Self { a, tau })
    }

    pub fn af(&self) -> f64 {
        self.a as f64
    }

    /// Coefficient of `i` in `mu(|z|^2)`.
    pub fn mu_of_norm_sqr(&self, r2: f64) -> f64 {
        0.5 * (self.af() * r2 - self.tau)
    }
}

/// Coefficient of `i` in `mu(z) = (i/2)(a|z|^2 - tau)`.
pub fn moment_map(z: Complex64, act: &ActionData) -> f64 {
    act.mu_of_norm_sqr(z.norm_sqr())
}

/// A pair `(alpha, u)` on a bundle of degree `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeConfig {
    pub alpha: OneForm,
    pub u: ComplexField,
    pub n: i64,
}

impl GaugeConfig {
    pub fn new(alpha: OneForm, u: ComplexField, n: i64) -> Self {
        Self { alpha, u, n }
    }

    /// `alpha = 0`, `u = 0` on a bundle of degree `n`.
    pub fn trivial(len: usize, n: i64) -> Self {
        Self {
            alpha: OneForm::zeros(len),
            u: ComplexField::zeros(len),
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn check(&self, s: &Surface) -> Result<(), FieldsError> {
        for got in [self.u.len(), self.alpha.c1.len(), self.alpha.c2.len()] {
            if got != s.len() {
                return Err(FieldsError::Length {
                    expected: s.len(),
                    got,
                });
            }
        }
        Ok(())
    }

    fn require_trivial(&self, s: &Surface) -> Result<(), FieldsError> {
        self.check(s)?;
        if self.n != 0 {
            return Err(FieldsError::NontrivialBundle(self.n));
        }
        Ok(())
    }
}

/// A circle-valued function with its Maurer-Cartan form
/// `gamma^{-1} d gamma = i mc`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    pub gamma: ComplexField,
    pub mc: OneForm,
}

/// Tolerance on `|gamma| = 1`.
pub const UNIT_TOL: f64 = 1e-12;

impl GaugeTransform {
    pub fn identity(len: usize) -> Self {
        Self {
            gamma: ComplexField::constant(len, Complex64::new(1.0, 0.0)),
            mc: OneForm::zeros(len),
        }
    }

    /// `gamma = exp(i chi)` for a real function `chi`.
    pub fn from_phase(s: &Surface, chi: &[f64]) -> Self {
        Self {
            gamma: ComplexField(chi.iter().map(|&c| Complex64::from_polar(1.0, c)).collect()),
            mc: s.gradient(chi),
        }
    }

    /// Wraps given unit values; the Maurer-Cartan form is `Im(conj(gamma) d gamma)`.
    pub fn from_values(s: &Surface, gamma: ComplexField) -> Result<Self, FieldsError> {
        if gamma.len() != s.len() {
            return Err(FieldsError::Length {
                expected: s.len(),
                got: gamma.len(),
            });
        }
        for (node, g) in gamma.iter().enumerate() {
            let modulus = g.norm();
            if !((modulus - 1.0).abs() <= UNIT_TOL) {
                return Err(FieldsError::NonUnitGauge { node, modulus });
            }
        }
        let dg = s.gradient_complex(&gamma);
        let mc = OneForm {
            c1: gamma.iter().zip(&dg.c1).map(|(g, d)| (g.conj() * d).im).collect(),
            c2: gamma.iter().zip(&dg.c2).map(|(g, d)| (g.conj() * d).im).collect(),
        };
        Ok(Self { gamma, mc })
    }

    /// `gamma^k`, with Maurer-Cartan form `k mc`.
    pub fn pow(&self, k: i32) -> Self {
        Self {
            gamma: ComplexField(self.gamma.iter().map(|g| g.powi(k)).collect()),
            mc: self.mc.scaled(k as f64),
        }
    }
}

/// `d_A u = du - a i alpha u`, frame components.
pub fn covariant_derivative(
    s: &Surface,
    cfg: &GaugeConfig,
    act: &ActionData,
) -> Result<ComplexOneForm, FieldsError> {
    cfg.require_trivial(s)?;
    let du = s.gradient_complex(&cfg.u);
    let a = act.af();
    let twist = |d: &[Complex64], c: &[f64]| -> Vec<Complex64> {
        d.iter()
            .zip(c)
            .zip(cfg.u.iter())
            .map(|((d, c), u)| d - I * (a * c) * u)
            .collect()
    };
    Ok(ComplexOneForm {
        c1: twist(&du.c1, &cfg.alpha.c1),
        c2: twist(&du.c2, &cfg.alpha.c2),
    })
}

/// Antiholomorphic part of a complex 1-form for the rotation `j e1 = e2`.
pub fn antiholomorphic_part(w: &ComplexOneForm) -> ComplexOneForm {
    let c1: Vec<Complex64> = w
        .c1
        .iter()
        .zip(&w.c2)
        .map(|(d1, d2)| 0.5 * (d1 + I * d2))
        .collect();
    let c2 = c1.iter().map(|z| -I * z).collect();
    ComplexOneForm { c1, c2 }
}

fn difference(a: &ComplexOneForm, b: &ComplexOneForm) -> ComplexOneForm {
    ComplexOneForm {
        c1: a.c1.iter().zip(&b.c1).map(|(x, y)| x - y).collect(),
        c2: a.c2.iter().zip(&b.c2).map(|(x, y)| x - y).collect(),
    }
}

/// `(d_A u + i d_A u j) / 2`.
pub fn dbar(s: &Surface, cfg: &GaugeConfig, act: &ActionData) -> Result<ComplexOneForm, FieldsError> {
    Ok(antiholomorphic_part(&covariant_derivative(s, cfg, act)?))
}

/// Holomorphic part `d_A u - dbar_A u`.
pub fn del(s: &Surface, cfg: &GaugeConfig, act: &ActionData) -> Result<ComplexOneForm, FieldsError> {
    let d = covariant_derivative(s, cfg, act)?;
    let db = antiholomorphic_part(&d);
    Ok(difference(&d, &db))
}

/// Coefficient of `i dvol` in `F_A`.
pub fn curvature(s: &Surface, cfg: &GaugeConfig) -> TwoFormDensity {
    let background = 2.0 * PI * cfg.n as f64 / s.volume();
    TwoFormDensity(s.curl(&cfg.alpha).iter().map(|v| v + background).collect())
}

/// `-(i / 2 pi) * integral of F_A`, which equals `N` on the nose.
pub fn degree(s: &Surface, cfg: &GaugeConfig) -> f64 {
    s.quad(&curvature(s, cfg)) / (2.0 * PI)
}

/// Real degree `d = N / a` of the underlying bundle.
pub fn real_degree(s: &Surface, cfg: &GaugeConfig, act: &ActionData) -> f64 {
    degree(s, cfg) / act.af()
}

fn check_eps(eps: f64) -> Result<(), FieldsError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(FieldsError::InvalidEps(eps))
    }
}

/// `1/2 * integral (|d_A u|^2 + eps^2 |F_A|^2 + eps^-2 |mu(u)|^2)`.
pub fn energy(s: &Surface, cfg: &GaugeConfig, act: &ActionData, eps: f64) -> Result<f64, FieldsError> {
    check_eps(eps)?;
    let d = covariant_derivative(s, cfg, act)?;
    let f = curvature(s, cfg);
    let e2 = eps * eps;
    let density: Vec<f64> = (0..s.len())
        .map(|k| {
            let mu = act.mu_of_norm_sqr(cfg.u[k].norm_sqr());
            0.5 * (d.c1[k].norm_sqr() + d.c2[k].norm_sqr() + e2 * f[k] * f[k] + mu * mu / e2)
        })
        .collect();
    Ok(s.quad(&density))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyIdentity {
    pub lhs: f64,
    pub bogomolny: f64,
    /// `integral ((d_A u)^* omega - <mu(u), F_A>)` from its density.
    pub r: f64,
    /// `lhs - bogomolny - r`.
    pub discrepancy: f64,
    /// Closed-form value of the topological term, `(tau/2) * integral of the
    /// i-coefficient of F_A`.
    pub r_topological: f64,
    /// `lhs - bogomolny - r_topological`; measures discretization error.
    pub topological_discrepancy: f64,
}

fn r_density(d: &ComplexOneForm, f: &[f64], u: &[Complex64], act: &ActionData) -> Vec<f64> {
    (0..u.len())
        .map(|k| (d.c1[k].conj() * d.c2[k]).im - act.mu_of_norm_sqr(u[k].norm_sqr()) * f[k])
        .collect()
}

/// Both sides of the Bogomolny splitting `E = bogomolny + R`.
pub fn energy_identity(
    s: &Surface,
    cfg: &GaugeConfig,
    act: &ActionData,
) -> Result<EnergyIdentity, FieldsError> {
    let lhs = energy(s, cfg, act, 1.0)?;
    let d = covariant_derivative(s, cfg, act)?;
    let db = antiholomorphic_part(&d);
    let f = curvature(s, cfg);
    let bog: Vec<f64> = (0..s.len())
        .map(|k| {
            let r2 = f[k] + act.mu_of_norm_sqr(cfg.u[k].norm_sqr());
            db.c1[k].norm_sqr() + db.c2[k].norm_sqr() + 0.5 * r2 * r2
        })
        .collect();
    let bogomolny = s.quad(&bog);
    let r = s.quad(&r_density(&d, &f, &cfg.u, act));
    let r_topological = 0.5 * act.tau * s.quad(&f);
    Ok(EnergyIdentity {
        lhs,
        bogomolny,
        r,
        discrepancy: lhs - bogomolny - r,
        r_topological,
        topological_discrepancy: lhs - bogomolny - r_topological,
    })
}

/// The topological term `R` evaluated from its density.
pub fn topological_r(s: &Surface, cfg: &GaugeConfig, act: &ActionData) -> Result<f64, FieldsError> {
    let d = covariant_derivative(s, cfg, act)?;
    let f = curvature(s, cfg);
    Ok(s.quad(&r_density(&d, &f, &cfg.u, act)))
}

/// `(alpha + mc, gamma^a u)`.
pub fn gauge_apply(
    g: &GaugeTransform,
    cfg: &GaugeConfig,
    act: &ActionData,
) -> Result<GaugeConfig, FieldsError> {
    if let Some((node, z)) = g
        .gamma
        .iter()
        .enumerate()
        .find(|(_, z)| !((z.norm() - 1.0).abs() <= UNIT_TOL))
    {
        return Err(FieldsError::NonUnitGauge {
            node,
            modulus: z.norm(),
        });
    }
    let a = act.a as i32;
    Ok(GaugeConfig {
        alpha: cfg.alpha.add(&g.mc),
        u: ComplexField(
            g.gamma
                .iter()
                .zip(cfg.u.iter())
                .map(|(g, u)| g.powi(a) * u)
                .collect(),
        ),
        n: cfg.n,
    })
}

/// A Kahler-vortex configuration `(B, f)`; `B` is stored by its
/// `i`-coefficients and lives on a bundle of degree `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerConfig {
    pub b: OneForm,
    pub f: ComplexField,
    pub n: i64,
}

/// `(theta, f) -> (-a theta, a f)`; the target bundle has degree `a N`.
pub fn psi_map(cfg: &GaugeConfig, act: &ActionData) -> KahlerConfig {
    let a = act.af();
    KahlerConfig {
        b: cfg.alpha.scaled(-a),
        f: ComplexField(cfg.u.iter().map(|u| u * a).collect()),
        n: act.a * cfg.n,
    }
}

/// Right action on Kahler configurations: `(B, f) g = (mc_g + B, g^{-1} f)`.
pub fn kahler_act(k: &KahlerConfig, g: &GaugeTransform) -> KahlerConfig {
    KahlerConfig {
        b: g.mc.add(&k.b),
        f: ComplexField(
            k.f.iter()
                .zip(g.gamma.iter())
                .map(|(f, g)| f / g)
                .collect(),
        ),
        n: k.n,
    }
}

/// Coefficient of `i dvol` in `F_B`.
pub fn kahler_curvature(s: &Surface, k: &KahlerConfig) -> TwoFormDensity {
    let background = -2.0 * PI * k.n as f64 / s.volume();
    TwoFormDensity(s.curl(&k.b).iter().map(|v| v + background).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub r1: ComplexOneForm,
    /// Coefficient of `i`.
    pub r2: ScalarField,
    pub r1_l2: f64,
    pub r1_sup: f64,
    pub r2_l2: f64,
    pub r2_sup: f64,
}

impl Residual {
    fn new(s: &Surface, r1: ComplexOneForm, r2: ScalarField) -> Self {
        let n1 = r1.norm_sqr();
        let r1_sup = n1.iter().fold(0.0_f64, |m, v| m.max(v.sqrt()));
        let r1_l2 = s.quad(&n1).sqrt();
        let r2_l2 = s.l2_norm(&r2);
        let r2_sup = r2.max_abs();
        Self {
            r1,
            r2,
            r1_l2,
            r1_sup,
            r2_l2,
            r2_sup,
        }
    }
}

/// `dbar_B f = 0` and `*F_B - (i/2)(|f|^2 - a tau) = 0`, with
/// `d_B f = df + i B f`.
pub fn kahler_residual(
    s: &Surface,
    k: &KahlerConfig,
    act: &ActionData,
) -> Result<Residual, FieldsError> {
    if k.n != 0 {
        return Err(FieldsError::NontrivialBundle(k.n));
    }
    let df = s.gradient_complex(&k.f);
    let twist = |d: &[Complex64], c: &[f64]| -> Vec<Complex64> {
        d.iter()
            .zip(c)
            .zip(k.f.iter())
            .map(|((d, c), f)| d + I * c * f)
            .collect()
    };
    let dbf = antiholomorphic_part(&ComplexOneForm {
        c1: twist(&df.c1, &k.b.c1),
        c2: twist(&df.c2, &k.b.c2),
    });
    let fb = kahler_curvature(s, k);
    let r2 = ScalarField(
        fb.iter()
            .zip(k.f.iter())
            .map(|(b, f)| b - 0.5 * (f.norm_sqr() - act.af() * act.tau))
            .collect(),
    );
    Ok(Residual::new(s, dbf, r2))
}

/// `r1 = dbar_A u`, `r2 = *F_A + eps^-2 mu(u)`.
pub fn sve_residual(
    s: &Surface,
    cfg: &GaugeConfig,
    act: &ActionData,
    eps: f64,
) -> Result<Residual, FieldsError> {
    check_eps(eps)?;
    let r1 = dbar(s, cfg, act)?;
    let f = curvature(s, cfg);
    let e2 = eps * eps;
    let r2 = ScalarField(
        f.iter()
            .zip(cfg.u.iter())
            .map(|(f, u)| f + act.mu_of_norm_sqr(u.norm_sqr()) / e2)
            .collect(),
    );
    Ok(Residual::new(s, r1, r2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PseudoholomorphicResidual {
    pub dbar_norm: f64,
    pub mu_norm: f64,
}

/// L2 norm of `|mu|` from values of `|u|^2`.
pub fn mu_norm(s: &Surface, u_norm_sqr: &[f64], act: &ActionData) -> f64 {
    let m: Vec<f64> = u_norm_sqr.iter().map(|&r| act.mu_of_norm_sqr(r)).collect();
    s.l2_norm(&m)
}

/// L2 norms of `dbar_A u` and `mu(u)`.
pub fn pseudoholomorphic_residual(
    s: &Surface,
    cfg: &GaugeConfig,
    act: &ActionData,
) -> Result<PseudoholomorphicResidual, FieldsError> {
    let db = dbar(s, cfg, act)?;
    Ok(PseudoholomorphicResidual {
        dbar_norm: s.quad(&db.norm_sqr()).sqrt(),
        mu_norm: mu_norm(s, &cfg.u.norm_sqr(), act),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_config, random_phase};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus(n: usize) -> Surface {
        Surface::torus(2.0 * PI, 2.0 * PI, n).unwrap()
    }

    fn act() -> ActionData {
        ActionData::new(2, 1.5).unwrap()
    }

    #[test]
    fn moment_map_values() {
        let act = act();
        assert_eq!(moment_map(Complex64::new(0.0, 0.0), &act), -0.75);
        let z = Complex64::from_polar((act.tau / act.af()).sqrt(), 0.3);
        assert!(moment_map(z, &act).abs() < 1e-15);
        let w = Complex64::new(0.3, -1.1);
        let rot = Complex64::from_polar(1.0, 2.1);
        assert!((moment_map(rot * w, &act) - moment_map(w, &act)).abs() < 1e-14);
    }

    #[test]
    fn action_data_is_validated() {
        assert!(ActionData::new(0, 1.0).is_err());
        assert!(ActionData::new(1, -1.0).is_err());
    }

    #[test]
    fn plane_wave_is_covariantly_constant() {
        let s = torus(32);
        let a = 3;
        let act = ActionData::new(a, 1.0).unwrap();
        let coords = s.node_coords();
        let u = ComplexField(coords.iter().map(|p| Complex64::from_polar(1.0, p.0)).collect());
        let alpha = OneForm {
            c1: vec![1.0 / a as f64; s.len()],
            c2: vec![0.0; s.len()],
        };
        let d = covariant_derivative(&s, &GaugeConfig::new(alpha, u, 0), &act).unwrap();
        assert!(d.norm_sqr().max_abs() < 1e-24);
    }

    #[test]
    fn plane_wave_dbar() {
        // du = i u e^1, so dbar u = (i u / 2)(e^1 - i e^2).
        let s = torus(32);
        let act = act();
        let coords = s.node_coords();
        let u = ComplexField(coords.iter().map(|p| Complex64::from_polar(1.0, p.0)).collect());
        let cfg = GaugeConfig::new(OneForm::zeros(s.len()), u.clone(), 0);
        let db = dbar(&s, &cfg, &act).unwrap();
        for k in 0..s.len() {
            let want = 0.5 * I * u[k];
            assert!((db.c1[k] - want).norm() < 1e-12);
            assert!((db.c2[k] + I * want).norm() < 1e-12);
        }
    }

    #[test]
    fn antiholomorphic_wave_is_its_own_dbar() {
        // c (e^1 - i e^2) is antiholomorphic, c (e^1 + i e^2) holomorphic.
        let n = 8;
        let c: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        let w = ComplexOneForm {
            c1: c.clone(),
            c2: c.iter().map(|z| -I * z).collect(),
        };
        let p = antiholomorphic_part(&w);
        assert_eq!(p, w);
        let h = ComplexOneForm {
            c1: c.clone(),
            c2: c.iter().map(|z| I * z).collect(),
        };
        assert!(antiholomorphic_part(&h).norm_sqr().max_abs() == 0.0);
    }

    #[test]
    fn split_is_orthogonal() {
        let s = torus(64);
        let act = act();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = random_config(&s, &mut rng, 1.0);
        let d = covariant_derivative(&s, &cfg, &act).unwrap();
        let db = dbar(&s, &cfg, &act).unwrap();
        let dl = del(&s, &cfg, &act).unwrap();
        // Antiholomorphic projection of the antiholomorphic part is itself.
        let again = antiholomorphic_part(&db);
        let (n, nb, nl) = (d.norm_sqr(), db.norm_sqr(), dl.norm_sqr());
        for k in 0..s.len() {
            assert!((n[k] - nb[k] - nl[k]).abs() < 1e-10 * (1.0 + n[k]));
            assert!((again.c1[k] - db.c1[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn trivial_pair_energy() {
        let s = torus(32);
        let act = act();
        let cfg = GaugeConfig::trivial(s.len(), 0);
        let e = energy(&s, &cfg, &act, 1.0).unwrap();
        let want = act.tau * act.tau * s.volume() / 8.0;
        assert!((e - want).abs() < 1e-12 * want);
        let id = energy_identity(&s, &cfg, &act).unwrap();
        assert!((id.bogomolny - want).abs() < 1e-12 * want);
        assert_eq!(id.r, 0.0);
        assert!(id.discrepancy.abs() < 1e-12 * want);
        let vacuum = GaugeConfig::new(
            OneForm::zeros(s.len()),
            ComplexField::constant(s.len(), Complex64::new((act.tau / act.af()).sqrt(), 0.0)),
            0,
        );
        assert!(energy(&s, &vacuum, &act, 1.0).unwrap() < 1e-25);
        let r = sve_residual(&s, &vacuum, &act, 1.0).unwrap();
        assert!(r.r1_sup < 1e-14 && r.r2_sup < 1e-14);
        let r = sve_residual(&s, &cfg, &act, 0.5).unwrap();
        assert!(r.r2.iter().all(|v| (v + act.tau / 2.0 * 4.0).abs() < 1e-14));
        let p = pseudoholomorphic_residual(&s, &cfg, &act).unwrap();
        assert!((p.mu_norm - act.tau / 2.0 * s.volume().sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nontrivial_bundle_rejects_derivatives() {
        let s = torus(16);
        let cfg = GaugeConfig::trivial(s.len(), 2);
        assert_eq!(
            energy(&s, &cfg, &act(), 1.0),
            Err(FieldsError::NontrivialBundle(2))
        );
        assert!((degree(&s, &cfg) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degree_ignores_alpha() {
        let s = Surface::football(3, 16, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cfg = random_config(&s, &mut rng, 1.0);
        cfg.n = 3;
        let act = ActionData::new(3, 4.0).unwrap();
        assert!((degree(&s, &cfg) - 3.0).abs() < 1e-10);
        assert!((real_degree(&s, &cfg, &act) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauge_transforms() {
        let s = torus(64);
        let act = act();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = random_config(&s, &mut rng, 1.0);
        let id = gauge_apply(&GaugeTransform::identity(s.len()), &cfg, &act).unwrap();
        assert_eq!(id, cfg);
        let c = Complex64::from_polar(1.0, 0.7);
        let g = GaugeTransform::from_values(&s, ComplexField::constant(s.len(), c)).unwrap();
        let moved = gauge_apply(&g, &cfg, &act).unwrap();
        assert_eq!(moved.alpha, cfg.alpha.add(&OneForm::zeros(s.len())));
        assert!((moved.u[5] - c * c * cfg.u[5]).norm() < 1e-15);
        let chi = random_phase(&s, &mut rng);
        let g = GaugeTransform::from_phase(&s, &chi);
        let e0 = energy(&s, &cfg, &act, 1.0).unwrap();
        let e1 = energy(&s, &gauge_apply(&g, &cfg, &act).unwrap(), &act, 1.0).unwrap();
        assert!((e1 - e0).abs() / e0.max(1.0) < 1e-8);
        let bad = GaugeTransform {
            gamma: ComplexField::constant(s.len(), Complex64::new(1.1, 0.0)),
            mc: OneForm::zeros(s.len()),
        };
        assert!(matches!(
            gauge_apply(&bad, &cfg, &act),
            Err(FieldsError::NonUnitGauge { .. })
        ));
    }

    #[test]
    fn maurer_cartan_from_values_matches_phase() {
        let s = torus(64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let chi = random_phase(&s, &mut rng);
        let g = GaugeTransform::from_phase(&s, &chi);
        let h = GaugeTransform::from_values(&s, g.gamma.clone()).unwrap();
        for k in 0..s.len() {
            assert!((g.mc.c1[k] - h.mc.c1[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn psi_equivariance_is_exact() {
        let s = torus(32);
        let act = ActionData::new(3, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = random_config(&s, &mut rng, 1.0);
        let g = GaugeTransform::from_phase(&s, &random_phase(&s, &mut rng));
        let lhs = psi_map(&gauge_apply(&g, &cfg, &act).unwrap(), &act);
        let rhs = kahler_act(&psi_map(&cfg, &act), &g.pow(-(act.a as i32)));
        for k in 0..s.len() {
            assert!((lhs.f[k] - rhs.f[k]).norm() <= 1e-12 * (1.0 + lhs.f[k].norm()));
            assert!((lhs.b.c1[k] - rhs.b.c1[k]).abs() <= 1e-12 * (1.0 + lhs.b.c1[k].abs()));
        }
        let zero = psi_map(&GaugeConfig::trivial(s.len(), 0), &act);
        assert!(zero.f.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn psi_maps_residuals() {
        let s = torus(32);
        let act = ActionData::new(2, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = random_config(&s, &mut rng, 1.0);
        let r = sve_residual(&s, &cfg, &act, 1.0).unwrap();
        let k = kahler_residual(&s, &psi_map(&cfg, &act), &act).unwrap();
        let a = act.af();
        assert!((k.r1_l2 - a * r.r1_l2).abs() < 1e-9 * (1.0 + r.r1_l2));
        assert!((k.r2_l2 - a * r.r2_l2).abs() < 1e-9 * (1.0 + r.r2_l2));
        let vacuum = GaugeConfig::new(
            OneForm::zeros(s.len()),
            ComplexField::constant(s.len(), Complex64::new((act.tau / a).sqrt(), 0.0)),
            0,
        );
        let k = kahler_residual(&s, &psi_map(&vacuum, &act), &act).unwrap();
        assert!(k.r1_sup < 1e-14 && k.r2_sup < 1e-12);
    }

    #[test]
    fn energy_identity_on_sphere_converges() {
        let act = act();
        let defect = |n: usize| {
            let s = Surface::sphere(n, 2 * n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let cfg = random_config(&s, &mut rng, 1.0);
            let id = energy_identity(&s, &cfg, &act).unwrap();
            assert!(id.discrepancy.abs() < 1e-10 * id.lhs);
            id.topological_discrepancy.abs()
        };
        let (c, f) = (defect(32), defect(64));
        assert!((c / f).log2() > 1.8, "{c} {f}");
    }
}
