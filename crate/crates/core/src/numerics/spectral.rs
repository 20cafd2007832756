//! Fourier tools on the periodic box `[-L, L)^n` sampled at `N` points per
//! axis, `x_i = -L + i·2L/N`, stored row-major with axis 0 slowest.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

type PlanMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

fn plan(size: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<PlanMap>> = OnceLock::new();
    let mut plans = PLANS.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    plans
        .entry((size, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(size)
            } else {
                planner.plan_fft_forward(size)
            }
        })
        .clone()
}

/// Geometry of a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Spatial dimension.
    pub n: usize,
    /// Points per axis.
    pub size: usize,
    /// Half-width `L` of the box.
    pub half_width: f64,
}

impl Grid {
    pub fn new(n: usize, size: usize, half_width: f64) -> Self {
        Self { n, size, half_width }
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    /// Coordinate of grid index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.n).rev() {
            out[a] = flat % self.size;
            flat /= self.size;
        }
    }

    /// Angular wavenumber of FFT bin `j`; the Nyquist bin maps to `-π N / 2L`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let jj = if j < self.size / 2 {
            j as f64
        } else {
            j as f64 - self.size as f64
        };
        PI / self.half_width * jj
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.size / 2
    }

    /// In-place transform of every axis; the inverse is normalised.
    pub fn fft(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.size;
        let fft = plan(n, inverse);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = n.pow((self.n - 1 - axis) as u32);
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * n * stride + i;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    /// The discrete Fourier coefficients of a real field.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft(&mut data, false);
        data
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.fft(&mut spectrum, true);
        spectrum.into_iter().map(|v| v.re).collect()
    }

    /// Multiplies each mode by `symbol(k, nyquist)`, where `k` holds the
    /// per-axis wavenumbers and `nyquist` flags Nyquist bins.
    pub fn map_modes<F>(&self, spectrum: &mut [Complex64], symbol: F)
    where
        F: Fn(&[f64], &[bool]) -> Complex64,
    {
        let mut idx = vec![0usize; self.n];
        let mut k = vec![0.0; self.n];
        let mut nyq = vec![false; self.n];
        for (flat, v) in spectrum.iter_mut().enumerate() {
            self.unflatten(flat, &mut idx);
            for a in 0..self.n {
                k[a] = self.wavenumber(idx[a]);
                nyq[a] = self.is_nyquist(idx[a]);
            }
            *v *= symbol(&k, &nyq);
        }
    }

    /// Applies a Fourier multiplier to a real field.
    pub fn apply<F>(&self, values: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(&[f64], &[bool]) -> Complex64,
    {
        let mut s = self.forward(values);
        self.map_modes(&mut s, symbol);
        self.inverse_real(s)
    }

    /// Spectral partial derivative `∂^α`; Nyquist bins of odd-order axes
    /// are dropped so the result stays real.
    pub fn derivative(&self, values: &[f64], alpha: &[u32]) -> Vec<f64> {
        self.apply(values, |k, nyq| {
            let mut f = Complex64::new(1.0, 0.0);
            for a in 0..k.len() {
                let order = alpha[a];
                if order == 0 {
                    continue;
                }
                if nyq[a] && order % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                f *= Complex64::new(0.0, k[a]).powu(order);
            }
            f
        })
    }

    /// Matrix `M[i][j]` mapping samples `v_j` to the trigonometric
    /// interpolant evaluated at `scale · x_i`. Rows whose target leaves the
    /// box are zero.
    pub fn rescale_matrix(&self, scale: f64) -> Vec<f64> {
        let n = self.size;
        let l = self.half_width;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let target = scale * self.coordinate(i);
            if target < -l || target > l {
                continue;
            }
            for j in 0..n {
                // Periodic sinc for even N with the Nyquist mode as a cosine.
                let theta = PI * (target - self.coordinate(j)) / l;
                let half = 0.5 * theta;
                m[i * n + j] = if half.sin().abs() < 1e-15 {
                    // θ on a lattice point 2πk: the sinc equals cos(Nθ/2)/cos(θ/2).
                    ((n as f64) * half).cos() / half.cos()
                } else {
                    ((n as f64) * half).sin() / ((n as f64) * half.tan())
                };
            }
        }
        m
    }

    /// `w(x) = v(scale · x)` by separable trigonometric interpolation,
    /// with zero where `scale · x` leaves the box.
    pub fn rescale(&self, values: &[f64], scale: f64) -> Vec<f64> {
        let n = self.size;
        let m = self.rescale_matrix(scale);
        let mut cur = values.to_vec();
        let mut next = vec![0.0; cur.len()];
        let mut line = vec![0.0; n];
        for axis in 0..self.n {
            let stride = n.pow((self.n - 1 - axis) as u32);
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                for i in 0..stride {
                    let base = o * n * stride + i;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = cur[base + k * stride];
                    }
                    for r in 0..n {
                        let row = &m[r * n..(r + 1) * n];
                        next[base + r * stride] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}
