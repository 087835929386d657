//! Random smooth test data: low-order trigonometric polynomials on tori and
//! ambient polynomials restricted to spheres.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::fields::GaugeConfig;
use crate::surface::{ComplexField, OneForm, Surface, SurfaceKind};

/// Highest torus wavenumber used.
const MAX_MODE: i32 = 3;
/// Highest total degree of sphere polynomials.
const MAX_DEGREE: i32 = 3;

/// A random smooth real function of unit-order amplitude.
pub fn random_smooth<R: Rng + ?Sized>(s: &Surface, rng: &mut R) -> Vec<f64> {
    let coords = s.node_coords();
    let f: Vec<f64> = match s.kind() {
        SurfaceKind::Torus => {
            let (l1, l2) = s.periods().unwrap_or((1.0, 1.0));
            let mut terms = Vec::new();
            for k1 in -MAX_MODE..=MAX_MODE {
                for k2 in 0..=MAX_MODE {
                    let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
                    let amp = rng.gen_range(-1.0..1.0) * decay;
                    let shift = rng.gen_range(0.0..2.0 * PI);
                    terms.push((k1 as f64 * 2.0 * PI / l1, k2 as f64 * 2.0 * PI / l2, amp, shift));
                }
            }
            coords
                .iter()
                .map(|&(x, y)| {
                    terms
                        .iter()
                        .map(|&(w1, w2, amp, shift)| amp * (w1 * x + w2 * y + shift).cos())
                        .sum()
                })
                .collect()
        }
        SurfaceKind::Sphere | SurfaceKind::Football => {
            let mut terms = Vec::new();
            for i in 0..=MAX_DEGREE {
                for j in 0..=MAX_DEGREE - i {
                    for k in 0..=MAX_DEGREE - i - j {
                        let amp = rng.gen_range(-1.0..1.0) / (1.0 + (i + j + k) as f64);
                        terms.push((i, j, k, amp));
                    }
                }
            }
            coords
                .iter()
                .map(|&(t, p)| {
                    let (x, y, z) = (t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                    terms
                        .iter()
                        .map(|&(i, j, k, amp)| amp * x.powi(i) * y.powi(j) * z.powi(k))
                        .sum()
                })
                .collect()
        }
    };
    s.project_invariant(&f).0
}

/// A random phase function for gauge transformations.
pub fn random_phase<R: Rng + ?Sized>(s: &Surface, rng: &mut R) -> Vec<f64> {
    random_smooth(s, rng).into_iter().map(|v| 2.0 * v).collect()
}

pub fn random_one_form<R: Rng + ?Sized>(s: &Surface, rng: &mut R, amplitude: f64) -> OneForm {
    let c1 = random_smooth(s, rng);
    let c2 = random_smooth(s, rng);
    OneForm { c1, c2 }.scaled(amplitude)
}

/// A random pair on the trivial bundle.
pub fn random_config<R: Rng + ?Sized>(s: &Surface, rng: &mut R, amplitude: f64) -> GaugeConfig {
    let alpha = random_one_form(s, rng, amplitude);
    let re = random_smooth(s, rng);
    let im = random_smooth(s, rng);
    let u: Vec<Complex64> = re
        .iter()
        .zip(&im)
        .map(|(&a, &b)| Complex64::new(a, b) * amplitude)
        .collect();
    GaugeConfig::new(alpha, ComplexField(u), 0)
}
