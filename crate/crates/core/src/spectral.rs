//! Thin FFT plumbing over `rustfft` for the two grid layouts used here:
//! full 2-D periodic grids (torus) and per-ring azimuthal transforms
//! (latitude-longitude sphere).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed wavenumber index for FFT bin `j` of an `n`-point transform.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Forward/inverse plans for one transform length.
#[derive(Clone)]
pub struct Plan1d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Plan1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plan1d").field("n", &self.n).finish()
    }
}

impl Plan1d {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// In-place forward transform of every contiguous row of length `n`.
    pub fn forward_rows(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// In-place normalized inverse transform of every contiguous row.
    pub fn inverse_rows(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Row-major `n1 x n2` two-dimensional transform.
#[derive(Clone, Debug)]
pub struct Plan2d {
    n1: usize,
    n2: usize,
    rows: Plan1d,
    cols: Plan1d,
}

impl Plan2d {
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            rows: Plan1d::new(n2),
            cols: Plan1d::new(n1),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    fn transpose(&self, src: &[Complex64], dst: &mut [Complex64], r: usize, c: usize) {
        for i in 0..r {
            for j in 0..c {
                dst[j * r + i] = src[i * c + j];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n1 * self.n2);
        self.rows.forward_rows(data);
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        self.transpose(data, &mut t, self.n1, self.n2);
        self.cols.forward_rows(&mut t);
        self.transpose(&t, data, self.n2, self.n1);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n1 * self.n2);
        self.rows.inverse_rows(data);
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        self.transpose(data, &mut t, self.n1, self.n2);
        self.cols.inverse_rows(&mut t);
        self.transpose(&t, data, self.n2, self.n1);
    }
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn real_part(values: &[Complex64]) -> Vec<f64> {
    values.iter().map(|v| v.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_indices_wrap() {
        let got: Vec<i64> = (0..8).map(|j| mode_index(j, 8)).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn round_trip_2d() {
        let plan = Plan2d::new(4, 8);
        let orig: Vec<Complex64> = (0..32)
            .map(|k| Complex64::new(k as f64 * 0.5, (k % 3) as f64))
            .collect();
        let mut data = orig.clone();
        plan.forward(&mut data);
        plan.inverse(&mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
