//! Latitude-longitude grid on the unit sphere.
//!
//! Nodes sit at cell centres `theta_i = (i + 1/2) dtheta`, `phi_j = j dphi`,
//! so no node lies on a pole. The Laplacian is a finite-volume stencil in
//! colatitude (zero flux through the poles closes the stencil) combined with
//! an exact Fourier symbol in azimuth. Written against the exact cell areas
//! it is symmetric in the quadrature inner product.
//!
//! Gradients use centred differences in colatitude; the neighbour of a polar
//! ring across the pole is the same ring rotated by `pi`, with frame
//! components changing sign. The curl differences face averages instead and
//! sets the pole faces to zero.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::spectral::{mode_index, to_complex, Plan1d};

#[derive(Clone, Debug)]
pub(crate) struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub dtheta: f64,
    pub dphi: f64,
    pub theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    /// Exact area of each cell in ring `i` on the unit sphere.
    pub cell_area: Vec<f64>,
    /// Colatitude flux coefficients on the `n_theta + 1` ring faces.
    face: Vec<f64>,
    plan: Plan1d,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let dtheta = PI / n_theta as f64;
        let dphi = 2.0 * PI / n_phi as f64;
        let theta: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * dtheta).collect();
        let sin_theta = theta.iter().map(|t| t.sin()).collect();
        let cell_area = (0..n_theta)
            .map(|i| dphi * ((i as f64 * dtheta).cos() - ((i + 1) as f64 * dtheta).cos()))
            .collect();
        let face = (0..=n_theta)
            .map(|f| {
                if f == 0 || f == n_theta {
                    0.0
                } else {
                    dphi * (f as f64 * dtheta).sin() / dtheta
                }
            })
            .collect();
        Self {
            n_theta,
            n_phi,
            dtheta,
            dphi,
            theta,
            sin_theta,
            cell_area,
            face,
            plan: Plan1d::new(n_phi),
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    fn mode(&self, j: usize) -> f64 {
        mode_index(j, self.n_phi) as f64
    }

    fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf = to_complex(f);
        self.plan.forward_rows(&mut buf);
        buf
    }

    fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.plan.inverse_rows(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let hat = self.forward(f);
        let mut out = vec![Complex64::new(0.0, 0.0); hat.len()];
        let nt = self.n_theta;
        for j in 0..self.n_phi {
            let k2 = self.mode(j).powi(2);
            for i in 0..nt {
                let fi = hat[self.idx(i, j)];
                let up = if i + 1 < nt {
                    self.face[i + 1] * (hat[self.idx(i + 1, j)] - fi)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let down = if i > 0 {
                    self.face[i] * (fi - hat[self.idx(i - 1, j)])
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let s2 = self.sin_theta[i] * self.sin_theta[i];
                out[self.idx(i, j)] = (up - down) / self.cell_area[i] - fi * (k2 / s2);
            }
        }
        self.inverse_real(out)
    }

    /// `(Delta - sigma)^{-1} rhs` mode by mode. For `sigma == 0` the caller
    /// must pass mean-free data; the result then has zero weighted mean.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_shifted(&self, rhs: &[f64], sigma: f64) -> Vec<f64> {
        let hat = self.forward(rhs);
        let nt = self.n_theta;
        let mut out = vec![Complex64::new(0.0, 0.0); hat.len()];
        let mut diag = vec![0.0; nt];
        let mut r = vec![Complex64::new(0.0, 0.0); nt];
        for j in 0..self.n_phi {
            let k2 = self.mode(j).powi(2);
            for i in 0..nt {
                r[i] = hat[self.idx(i, j)] * self.cell_area[i];
            }
            if k2 == 0.0 && sigma == 0.0 {
                // Cumulative flux through each face; the stencil is a pure chain.
                let mut x = Complex64::new(0.0, 0.0);
                let mut flux = Complex64::new(0.0, 0.0);
                let mut col = vec![Complex64::new(0.0, 0.0); nt];
                for i in 0..nt {
                    col[i] = x;
                    flux += r[i];
                    if i + 1 < nt {
                        x += flux / self.face[i + 1];
                    }
                }
                let area: f64 = self.cell_area.iter().sum();
                let mean = col
                    .iter()
                    .zip(&self.cell_area)
                    .map(|(c, a)| c * a)
                    .sum::<Complex64>()
                    / area;
                for i in 0..nt {
                    out[self.idx(i, j)] = col[i] - mean;
                }
                continue;
            }
            for i in 0..nt {
                let s2 = self.sin_theta[i] * self.sin_theta[i];
                diag[i] = -(self.face[i] + self.face[i + 1])
                    - k2 * self.cell_area[i] / s2
                    - sigma * self.cell_area[i];
            }
            // Thomas sweep; lower(i) = face[i], upper(i) = face[i + 1].
            let mut cp = vec![0.0; nt];
            let mut dp = vec![Complex64::new(0.0, 0.0); nt];
            cp[0] = self.face[1] / diag[0];
            dp[0] = r[0] / diag[0];
            for i in 1..nt {
                let denom = diag[i] - self.face[i] * cp[i - 1];
                cp[i] = if i + 1 < nt { self.face[i + 1] / denom } else { 0.0 };
                dp[i] = (r[i] - dp[i - 1] * self.face[i]) / denom;
            }
            let mut x = dp[nt - 1];
            out[self.idx(nt - 1, j)] = x;
            for i in (0..nt - 1).rev() {
                x = dp[i] - x * cp[i];
                out[self.idx(i, j)] = x;
            }
        }
        self.inverse_real(out)
    }

    /// Node across the pole: same polar ring, azimuth shifted by `pi`.
    fn antipodal_column(&self, j: usize) -> usize {
        (j + self.n_phi / 2) % self.n_phi
    }

    /// Centred colatitude difference. `parity` is `+1` for scalars and `-1`
    /// for frame components, which flip sign across a pole.
    fn d_theta(&self, f: &[f64], parity: f64) -> Vec<f64> {
        let nt = self.n_theta;
        let mut out = vec![0.0; f.len()];
        for i in 0..nt {
            for j in 0..self.n_phi {
                let up = if i + 1 < nt {
                    f[self.idx(i + 1, j)]
                } else {
                    parity * f[self.idx(i, self.antipodal_column(j))]
                };
                let down = if i > 0 {
                    f[self.idx(i - 1, j)]
                } else {
                    parity * f[self.idx(i, self.antipodal_column(j))]
                };
                out[self.idx(i, j)] = (up - down) / (2.0 * self.dtheta);
            }
        }
        out
    }

    fn d_phi(&self, f: &[f64]) -> Vec<f64> {
        let mut hat = self.forward(f);
        let half = self.n_phi / 2;
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                let k = if j == half { 0.0 } else { self.mode(j) };
                hat[self.idx(i, j)] *= Complex64::new(0.0, k);
            }
        }
        self.inverse_real(hat)
    }

    /// Orthonormal-frame gradient `(e_theta f, e_phi f)`.
    pub fn gradient(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g1 = self.d_theta(f, 1.0);
        let mut g2 = self.d_phi(f);
        for i in 0..self.n_theta {
            let s = self.sin_theta[i];
            for j in 0..self.n_phi {
                g2[self.idx(i, j)] /= s;
            }
        }
        (g1, g2)
    }

    /// `(1/sin) [d_theta(sin a_phi) - d_phi a_theta]`. The colatitude
    /// derivative is a difference of face values, zero on the pole faces, so
    /// the integral telescopes to exactly zero.
    pub fn curl(&self, a_theta: &[f64], a_phi: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let dp = self.d_phi(a_theta);
        let mut out = vec![0.0; a_phi.len()];
        let w = |i: usize, j: usize| self.sin_theta[i] * a_phi[self.idx(i, j)];
        for i in 0..nt {
            for j in 0..self.n_phi {
                let up = if i + 1 < nt { 0.5 * (w(i, j) + w(i + 1, j)) } else { 0.0 };
                let down = if i > 0 { 0.5 * (w(i - 1, j) + w(i, j)) } else { 0.0 };
                let k = self.idx(i, j);
                out[k] = ((up - down) / self.dtheta - dp[k]) / self.sin_theta[i];
            }
        }
        out
    }

    pub fn coords(&self, node: usize) -> (f64, f64) {
        let i = node / self.n_phi;
        let j = node % self.n_phi;
        (self.theta[i], j as f64 * self.dphi)
    }

    pub fn snap(&self, theta: f64, phi: f64) -> usize {
        let i = ((theta / self.dtheta).floor() as i64).clamp(0, self.n_theta as i64 - 1) as usize;
        let j = ((phi / self.dphi).round() as i64).rem_euclid(self.n_phi as i64) as usize;
        self.idx(i, j)
    }

    pub fn embed(theta: f64, phi: f64) -> [f64; 3] {
        [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }

    pub fn great_circle(a: (f64, f64), b: (f64, f64)) -> f64 {
        let p = Self::embed(a.0, a.1);
        let q = Self::embed(b.0, b.1);
        let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        let cross = [
            p[1] * q[2] - p[2] * q[1],
            p[2] * q[0] - p[0] * q[2],
            p[0] * q[1] - p[1] * q[0],
        ];
        let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        c.atan2(dot)
    }

    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        let i = (node / self.n_phi) as i64;
        let j = (node % self.n_phi) as i64;
        let np = self.n_phi as i64;
        let mut out = Vec::with_capacity(8);
        for di in -1..=1_i64 {
            let ii = i + di;
            if ii < 0 || ii >= self.n_theta as i64 {
                continue;
            }
            for dj in -1..=1_i64 {
                if di == 0 && dj == 0 {
                    continue;
                }
                out.push(ii as usize * self.n_phi + (j + dj).rem_euclid(np) as usize);
            }
        }
        out
    }
}
