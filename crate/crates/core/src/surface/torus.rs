//! Flat periodic grid with Fourier-spectral operators.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::spectral::{mode_index, to_complex, Plan2d};

#[derive(Clone, Debug)]
pub(crate) struct TorusGrid {
    pub l1: f64,
    pub l2: f64,
    pub n: usize,
    plan: Plan2d,
    /// Angular wavenumbers along each axis, FFT bin order.
    k1: Vec<f64>,
    k2: Vec<f64>,
}

impl TorusGrid {
    pub fn new(l1: f64, l2: f64, n: usize) -> Self {
        let k = |l: f64| -> Vec<f64> {
            (0..n)
                .map(|j| 2.0 * PI / l * mode_index(j, n) as f64)
                .collect()
        };
        Self {
            l1,
            l2,
            n,
            plan: Plan2d::new(n, n),
            k1: k(l1),
            k2: k(l2),
        }
    }

    pub fn h1(&self) -> f64 {
        self.l1 / self.n as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / self.n as f64
    }

    /// Applies a Fourier multiplier `symbol(i1, i2)` to complex data.
    fn multiply<F>(&self, data: &[Complex64], symbol: F) -> Vec<Complex64>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let n = self.n;
        let mut buf = data.to_vec();
        self.plan.forward(&mut buf);
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] *= symbol(i, j);
            }
        }
        self.plan.inverse(&mut buf);
        buf
    }

    fn multiply_real<F>(&self, data: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        self.multiply(&to_complex(data), symbol)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    fn laplacian_symbol(&self, i: usize, j: usize) -> f64 {
        -(self.k1[i] * self.k1[i] + self.k2[j] * self.k2[j])
    }

    /// First-derivative wavenumber with the Nyquist bin removed.
    fn deriv_k(&self, axis: usize, idx: usize) -> f64 {
        if idx == self.n / 2 {
            return 0.0;
        }
        if axis == 0 {
            self.k1[idx]
        } else {
            self.k2[idx]
        }
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.multiply_real(f, |i, j| Complex64::new(self.laplacian_symbol(i, j), 0.0))
    }

    /// `(Delta - sigma)^{-1}`; with `sigma == 0` the mean mode is dropped.
    pub fn solve_shifted(&self, rhs: &[f64], sigma: f64) -> Vec<f64> {
        self.multiply_real(rhs, |i, j| {
            let s = self.laplacian_symbol(i, j) - sigma;
            if s == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / s, 0.0)
            }
        })
    }

    pub fn gradient_complex(&self, f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let d1 = self.multiply(f, |i, _| Complex64::new(0.0, self.deriv_k(0, i)));
        let d2 = self.multiply(f, |_, j| Complex64::new(0.0, self.deriv_k(1, j)));
        (d1, d2)
    }

    pub fn gradient(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d1 = self.multiply_real(f, |i, _| Complex64::new(0.0, self.deriv_k(0, i)));
        let d2 = self.multiply_real(f, |_, j| Complex64::new(0.0, self.deriv_k(1, j)));
        (d1, d2)
    }

    /// `d(c1 dx + c2 dy) = (d1 c2 - d2 c1) dx^dy`.
    pub fn curl(&self, c1: &[f64], c2: &[f64]) -> Vec<f64> {
        let (_, d2c1) = self.gradient(c1);
        let (d1c2, _) = self.gradient(c2);
        d1c2.iter().zip(&d2c1).map(|(a, b)| a - b).collect()
    }

    pub fn coords(&self, node: usize) -> (f64, f64) {
        let i = node / self.n;
        let j = node % self.n;
        (i as f64 * self.h1(), j as f64 * self.h2())
    }

    pub fn snap(&self, x: f64, y: f64) -> usize {
        let n = self.n as i64;
        let i = ((x / self.h1()).round() as i64).rem_euclid(n) as usize;
        let j = ((y / self.h2()).round() as i64).rem_euclid(n) as usize;
        i * self.n + j
    }

    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let wrap = |d: f64, l: f64| {
            let d = d.rem_euclid(l);
            d.min(l - d)
        };
        let dx = wrap(a.0 - b.0, self.l1);
        let dy = wrap(a.1 - b.1, self.l2);
        dx.hypot(dy)
    }

    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        let n = self.n as i64;
        let i = (node / self.n) as i64;
        let j = (node % self.n) as i64;
        let mut out = Vec::with_capacity(8);
        for di in -1..=1 {
            for dj in -1..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let ii = (i + di).rem_euclid(n) as usize;
                let jj = (j + dj).rem_euclid(n) as usize;
                out.push(ii * self.n + jj);
            }
        }
        out
    }
}
