//! Steepest-descent contour evaluation of `f_{m,n}` with relative accuracy.
//!
//! `(2π)^{n/2} f_{m,n}(|x|)` is the Fourier transform of `e^{-|ξ|^{2m}}`.
//! For the base dimensions `n = 1, 2` the component of `ξ` along `x` is moved
//! to the line `Im z = c` through the saddles of `iηz - z^{2m}`, where the
//! integrand magnitude never exceeds the size of the result. Higher
//! dimensions follow from `f_{n+2} = -(1/η) ∂_η f_n`, applied under the
//! integral sign. The trapezoidal rule converges geometrically for these
//! entire integrands.

use super::KernelSpec;
use crate::numerics::CompensatedSum;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Magnitude (in e-folds below the peak) at which the integrand is cut off.
const CUTOFF: f64 = 50.0;
const MAX_LEVELS: usize = 9;

/// Terms `coef · z^a · η^{-b}` of the polynomial produced by `(-(1/η)∂_η)^j`
/// acting on `e^{iηz}`.
#[derive(Debug, Clone)]
struct DerivativePolynomial {
    terms: Vec<(Complex64, i32, i32)>,
}

impl DerivativePolynomial {
    fn new(j: u32) -> Self {
        let mut terms = vec![(Complex64::new(1.0, 0.0), 0, 0)];
        for _ in 0..j {
            let mut next: Vec<(Complex64, i32, i32)> = Vec::new();
            let mut push = |c: Complex64, a: i32, b: i32| {
                if let Some(t) = next.iter_mut().find(|t| t.1 == a && t.2 == b) {
                    t.0 += c;
                } else {
                    next.push((c, a, b));
                }
            };
            for &(c, a, b) in &terms {
                if b != 0 {
                    push(c * b as f64, a, b + 2);
                }
                push(c * Complex64::new(0.0, -1.0), a + 1, b + 1);
            }
            terms = next;
        }
        Self { terms }
    }

    fn eval(&self, z: Complex64, eta: f64) -> Complex64 {
        self.terms.iter().map(|&(c, a, b)| c * z.powi(a) * eta.powi(-b)).sum()
    }

    fn degree(&self) -> i32 {
        self.terms.iter().map(|t| t.1).max().unwrap_or(0)
    }
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `e^{-Q(j)}` along `q = jh` for the cross terms
/// `Q(j) = Σ_{k=1}^{m-1} C(m,k) z^{2(m-k)} (jh)^{2k}` of `(z² + q²)^m`.
///
/// `Q` is a polynomial of degree `2m-2` in `j`, so the exponentials of its
/// forward differences advance by products alone. Rounding errors of the
/// products grow with the number of steps, so the sum re-anchors at
/// [`REANCHOR`]-step intervals from `j0`.
struct MixedExponent {
    diffs: Vec<Complex64>,
}

/// Steps between exact re-evaluations of the mixed exponent.
const REANCHOR: usize = 8;

impl MixedExponent {
    fn new(m: u32, z2: Complex64, h: f64, binom: &[f64], j0: usize) -> Self {
        let degree = (2 * m - 2) as usize;
        let q_at = |j: usize| -> Complex64 {
            let q2 = ((j0 + j) as f64 * h).powi(2);
            (1..m)
                .map(|k| binom[k as usize] * z2.powu(m - k) * q2.powi(k as i32))
                .sum()
        };
        let mut table: Vec<Complex64> = (0..=degree).map(q_at).collect();
        let mut diffs = Vec::with_capacity(degree + 1);
        for level in 0..=degree {
            diffs.push(table[0]);
            for i in 0..degree - level {
                table[i] = table[i + 1] - table[i];
            }
        }
        Self { diffs }
    }

    fn start(&self) -> Vec<Complex64> {
        self.diffs.iter().map(|d| (-d).exp()).collect()
    }
}

/// Result of a contour evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourValue {
    pub value: f64,
    pub error: f64,
    /// `Σ|terms|`, which bounds the size of every partial sum.
    pub magnitude: f64,
}

fn saddle_geometry(m: u32, eta: f64) -> (f64, f64) {
    let mf = m as f64;
    let rho = (eta / (2.0 * mf)).powf(1.0 / (2.0 * mf - 1.0));
    (rho, rho * (PI / (4.0 * mf - 2.0)).sin())
}

/// Log-magnitude of the exponential factor at `(x + ic, q)`.
fn log_mag(m: u32, eta: f64, c: f64, x: f64, q: f64) -> f64 {
    let z = Complex64::new(x, c);
    -eta * c - (z * z + q * q).powu(m).re
}

/// Smallest `x ≥ start` past which the log-magnitude stays below `floor`.
fn cutoff(start: f64, floor: f64, mut log_at: impl FnMut(f64) -> f64) -> f64 {
    let mut x = start;
    let mut below_since: Option<f64> = None;
    loop {
        if log_at(x) < floor {
            let s = *below_since.get_or_insert(x);
            if x - s > 1.0 {
                return s;
            }
        } else {
            below_since = None;
        }
        x += 0.05;
    }
}

/// `f_{m,n}(η)` on the steepest-descent contour, `η > 0`.
pub fn eval_contour(spec: &KernelSpec, eta: f64) -> Result<ContourValue> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!(
            "contour evaluation requires eta > 0 (got {eta})"
        )));
    }
    let m = spec.m;
    let odd = spec.n % 2 == 1;
    let j = if odd { (spec.n - 1) / 2 } else { (spec.n - 2) / 2 };
    let poly = DerivativePolynomial::new(j);
    let (rho, c) = saddle_geometry(m, eta);
    let peak = log_mag(m, eta, c, rho, 0.0).max(log_mag(m, eta, c, 0.0, 0.0));
    let poly_slack = poly.degree() as f64 * (rho + 4.0).ln().max(0.0);
    let floor = peak - CUTOFF - poly_slack;
    let x_max = cutoff(rho, floor, |x| log_mag(m, eta, c, x, 0.0));
    let q_max = if odd {
        0.0
    } else {
        cutoff(0.0, floor, |q| {
            (0..=40)
                .map(|i| log_mag(m, eta, c, x_max * i as f64 / 40.0, q))
                .fold(f64::NEG_INFINITY, f64::max)
        })
    };

    let integrand = |x: f64, q: f64| -> Complex64 {
        let z = Complex64::new(x, c);
        let expo = Complex64::new(0.0, eta) * z - (z * z + q * q).powu(m);
        poly.eval(z, eta) * expo.exp()
    };

    // Trapezoid sums over x ≥ 0 (and q ≥ 0) using the conjugate symmetry
    // x ↦ -x and the evenness in q. The q sum stops once the terms are
    // negligible and the q^{2m} growth of the exponent dominates.
    let negligible = floor.exp();
    let binom: Vec<f64> = (0..=m).map(|k| binomial(m, k)).collect();
    let trapezoid = |h: f64| -> (f64, f64) {
        let nx = (x_max / h).ceil() as usize;
        let nq = (q_max / h).ceil() as usize + 1;
        let q_tail: Vec<f64> = if odd {
            Vec::new()
        } else {
            (0..=nq).map(|j| (-(j as f64 * h).powi(2 * m as i32)).exp()).collect()
        };
        let mut sum = CompensatedSum::new();
        let mut mag = 0.0;
        for ix in 0..=nx {
            let wx = if ix == 0 { 0.5 } else { 1.0 };
            let x = ix as f64 * h;
            if odd {
                let g = integrand(x, 0.0);
                sum.add(wx * g.re);
                mag += wx * g.norm();
                continue;
            }
            let z = Complex64::new(x, c);
            let z2 = z * z;
            let base = poly.eval(z, eta) * (Complex64::new(0.0, eta) * z - z2.powu(m)).exp();
            let monotone_from = 2.0 * (x * x + c * c) + 1.0;
            let mut factors = Vec::new();
            for (j, &tail) in q_tail.iter().enumerate() {
                if j % REANCHOR == 0 {
                    factors = MixedExponent::new(m, z2, h, &binom, j).start();
                }
                let q = j as f64 * h;
                let wq = if j == 0 { 0.5 } else { 1.0 };
                let g = base * factors[0] * tail;
                let a = g.norm();
                sum.add(wx * wq * g.re);
                mag += wx * wq * a;
                if a < negligible && q * q > monotone_from {
                    break;
                }
                for k in 0..factors.len() - 1 {
                    let next = factors[k + 1];
                    factors[k] *= next;
                }
            }
        }
        let scale = if odd {
            2.0 * h / (2.0 * PI).sqrt()
        } else {
            4.0 * h * h / (2.0 * PI)
        };
        (scale * sum.value(), scale * mag)
    };

    // The trapezoid error on these entire integrands decays like e^{-a/h},
    // so once the step resolves the saddle the error after a halving is
    // about the square of the observed relative change.
    let width = 1.0 / ((2 * m * (2 * m - 1)) as f64 * rho.max(0.5).powi(2 * m as i32 - 2)).sqrt();
    let mut h = (2.0 * width).min(0.5);
    let (mut prev, _) = trapezoid(h);
    for _ in 0..MAX_LEVELS {
        h *= 0.5;
        let (cur, mag) = trapezoid(h);
        // The exponent reaches about ηρ near the saddle; its roundoff is
        // relative to that size, not to the size of the result.
        let floor_err = 8.0 * f64::EPSILON * mag * (1.0 + 2.0 * eta * rho);
        let target = (1e-13 * cur.abs()).max(2.0 * floor_err);
        let diff = (cur - prev).abs();
        // Relative to the integrand scale, which is what the trapezoid error
        // is proportional to; the result itself may cancel near a root.
        let d = diff / mag.max(f64::MIN_POSITIVE);
        let predicted = mag * d * d;
        let resolved = h <= 0.5 * width;
        if diff <= target {
            return Ok(ContourValue {
                value: cur,
                error: diff.max(floor_err),
                magnitude: mag,
            });
        }
        // `cur` still carries an error up to `predicted`, and which level
        // gets accepted changes with η, so the accepted values would jump by
        // that much. One more halving squares the error to roundoff and
        // keeps the value smooth in η for finite differences.
        if resolved && predicted <= target {
            let (value, magnitude) = trapezoid(0.5 * h);
            let floor_err = 8.0 * f64::EPSILON * magnitude * (1.0 + 2.0 * eta * rho);
            return Ok(ContourValue {
                value,
                error: (value - cur).abs().max(floor_err),
                magnitude,
            });
        }
        prev = cur;
    }
    Err(Error::Accuracy {
        context: format!("contour trapezoid for m={m}, n={}, eta={eta}", spec.n),
        estimate: prev.abs(),
        tolerance: 1e-13,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_polynomial_first_step() {
        // -(1/η) ∂_η e^{iηz} = -(i z/η) e^{iηz}
        let p = DerivativePolynomial::new(1);
        let z = Complex64::new(0.7, 0.3);
        let v = p.eval(z, 2.0);
        let expected = Complex64::new(0.0, -1.0) * z / 2.0;
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn gaussian_case_has_relative_accuracy_far_out() {
        for n in 1..=4u32 {
            let spec = KernelSpec::new(1, n).unwrap();
            for eta in [4.0, 12.0, 30.0] {
                let v = eval_contour(&spec, eta).unwrap().value;
                let exact = 2f64.powf(-0.5 * n as f64) * (-eta * eta / 4.0).exp();
                assert!(((v - exact) / exact).abs() < 1e-11, "n={n} eta={eta}: {v} vs {exact}");
            }
        }
    }
}
