//! The sharp decay constant `σ_m`, constant-coefficient symbols and their
//! dual norms, strong convexity, and fits of kernel envelopes.

use crate::kernels::{normalization_constant, KernelProfile};
use crate::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// `σ_m = (2m-1) (2m)^{-2m/(2m-1)} sin(π/(4m-2))`.
pub fn sigma_m(m: u32) -> f64 {
    let mf = m as f64;
    let q = 2.0 * mf - 1.0;
    q * (2.0 * mf).powf(-2.0 * mf / q) * (PI / (4.0 * mf - 2.0)).sin()
}

/// A multi-index `γ = (γ_1, ..., γ_n)`.
pub type Index = Vec<u32>;

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `|γ|! / (γ_1! ... γ_n!)`.
pub fn multinomial(gamma: &[u32]) -> f64 {
    let total: u32 = gamma.iter().sum();
    gamma.iter().fold(factorial(total), |acc, &g| acc / factorial(g))
}

/// All multi-indices of length `n` and degree `d`, in lexicographically
/// decreasing order.
pub fn indices_of_degree(n: usize, d: u32) -> Vec<Index> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in indices_of_degree(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Homogeneous symbol `A(ξ) = Σ_{|γ|=2m} C(2m,γ) b_γ ξ^γ` with
/// `C(2m,γ) = (2m)!/(γ_1!...γ_n!)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub m: u32,
    pub n: u32,
    /// `b_γ` for every `|γ| = 2m`; absent indices are zero.
    pub b: BTreeMap<Index, f64>,
}

impl SymbolSpec {
    /// Builds the symbol from the normalised coefficients `b_γ`.
    pub fn from_b(m: u32, n: u32, b: impl IntoIterator<Item = (Index, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (g, v) in b {
            if g.len() != n as usize || g.iter().sum::<u32>() != 2 * m {
                return Err(Error::Domain(format!(
                    "multi-index {g:?} is not of degree {} in ℝ^{n}",
                    2 * m
                )));
            }
            *map.entry(g).or_insert(0.0) += v;
        }
        let s = Self { m, n, b: map };
        s.check_elliptic()?;
        Ok(s)
    }

    /// Builds the symbol from raw monomial coefficients `a_γ` of
    /// `A(ξ) = Σ a_γ ξ^γ`, dividing each by `C(2m,γ)`.
    pub fn from_monomials(m: u32, n: u32, a: impl IntoIterator<Item = (Index, f64)>) -> Result<Self> {
        let b: Vec<(Index, f64)> = a
            .into_iter()
            .map(|(g, v)| {
                let c = multinomial(&g);
                (g, v / c)
            })
            .collect();
        Self::from_b(m, n, b)
    }

    /// `(Σ_i d_i ξ_i²)^m`; the isotropic symbol `|ξ|^{2m}` has all `d_i = 1`.
    pub fn quadratic_power(m: u32, d: &[f64]) -> Result<Self> {
        let n = d.len();
        let a = indices_of_degree(n, m).into_iter().map(|beta| {
            let coef = multinomial(&beta) * beta.iter().zip(d).map(|(&k, &di)| di.powi(k as i32)).product::<f64>();
            (beta.iter().map(|k| 2 * k).collect::<Index>(), coef)
        });
        Self::from_monomials(m, n as u32, a)
    }

    pub fn isotropic(m: u32, n: u32) -> Result<Self> {
        Self::quadratic_power(m, &vec![1.0; n as usize])
    }

    /// `A(ξ)`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.b
            .iter()
            .map(|(g, &v)| multinomial(g) * v * g.iter().zip(xi).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            b: self.b.iter().map(|(g, v)| (g.clone(), v * c)).collect(),
            ..self.clone()
        }
    }

    fn check_elliptic(&self) -> Result<()> {
        let values: Vec<f64> = sphere_points(self.n as usize, 2000)
            .iter()
            .map(|p| self.eval(p))
            .collect();
        let worst = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let best = values.iter().cloned().fold(0.0f64, f64::max);
        // Degenerate directions between samples show up as a tiny relative minimum.
        if !(worst > 1e-8 * best) {
            return Err(Error::Domain(format!(
                "symbol is not elliptic: min over the sampled sphere is {worst:e}"
            )));
        }
        Ok(())
    }
}

/// Quasi-uniform points on the unit sphere of `ℝ^n`, `n ≤ 3`.
fn sphere_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn from_angles(n: usize, a: &[f64]) -> Vec<f64> {
    match n {
        2 => vec![a[0].cos(), a[0].sin()],
        _ => vec![a[1].sin() * a[0].cos(), a[1].sin() * a[0].sin(), a[1].cos()],
    }
}

fn to_angles(p: &[f64]) -> Vec<f64> {
    match p.len() {
        2 => vec![p[1].atan2(p[0])],
        _ => vec![p[1].atan2(p[0]), p[2].clamp(-1.0, 1.0).acos()],
    }
}

/// `p(ξ) = max_{η ≠ 0} ξ·η / A(η)^{1/2m}` by a sphere scan followed by a
/// compass search in spherical angles from the best scanned point.
pub fn dual_norm(symbol: &SymbolSpec, xi: &[f64]) -> Result<f64> {
    let n = symbol.n as usize;
    if xi.len() != n {
        return Err(Error::Domain(format!("xi has length {}, expected {n}", xi.len())));
    }
    if n > 3 {
        return Err(Error::Domain("dual norm is implemented for n ≤ 3".into()));
    }
    let inv = 1.0 / (2.0 * symbol.m as f64);
    let objective = |p: &[f64]| -> f64 {
        let dot: f64 = p.iter().zip(xi).map(|(a, b)| a * b).sum();
        dot / symbol.eval(p).powf(inv)
    };
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let count = match n {
        2 => 10_000,
        3 => 100_000,
        _ => 2,
    };
    let points = sphere_points(n, count);
    let (best, best_val) = points
        .par_iter()
        .map(|p| (p.clone(), objective(p)))
        .reduce(|| (Vec::new(), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if n == 1 {
        return Ok(best_val);
    }
    let mut angles = to_angles(&best);
    let mut value = best_val;
    let mut step = if n == 2 { 2.0 * PI / count as f64 } else { 0.02 };
    let mut iterations = 0;
    while step > 1e-13 {
        iterations += 1;
        if iterations > 100_000 {
            return Err(Error::Accuracy {
                context: format!("dual norm search stagnated at value {value}"),
                estimate: step,
                tolerance: 1e-13,
            });
        }
        let mut improved = false;
        for k in 0..angles.len() {
            for dir in [1.0, -1.0] {
                let mut trial = angles.clone();
                trial[k] += dir * step;
                let v = objective(&from_angles(n, &trial));
                if v > value {
                    value = v;
                    angles = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(value)
}

/// Verdict of the strong-convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convexity {
    pub strongly_convex: bool,
    /// Smallest eigenvalue of `(b_{α+β})_{|α|=|β|=m}`.
    pub margin: f64,
}

/// Assembles `(b_{α+β})` over the multi-indices of degree `m` and tests it
/// for positive semi-definiteness.
pub fn strong_convexity_check(symbol: &SymbolSpec) -> Convexity {
    let basis = indices_of_degree(symbol.n as usize, symbol.m);
    let k = basis.len();
    let mat = DMatrix::from_fn(k, k, |i, j| {
        let g: Index = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + b).collect();
        *symbol.b.get(&g).unwrap_or(&0.0)
    });
    // Roundoff of the eigensolver scales with the largest entry.
    let scale = mat.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let eig = mat.symmetric_eigen();
    let margin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Convexity {
        strongly_convex: margin >= -1e-12 * scale,
        margin,
    }
}

/// Least-squares fit of `log|f|` at its local maxima against
/// `c - σ η^{2m/(2m-1)} - p log η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub m: u32,
    pub n: u32,
    pub sigma_fit: f64,
    pub sigma_exact: f64,
    pub power_fit: f64,
    /// Root-mean-square residual of the fit in `log|f|`.
    pub residual: f64,
}

/// Local maxima of `|values|`, refined by a parabola through the logarithms
/// of the three samples around each discrete maximum.
pub fn local_maxima(etas: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1].abs(), values[i].abs(), values[i + 1].abs());
        if b > a && b >= c && a > 0.0 && c > 0.0 {
            let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
            let h = etas[i + 1] - etas[i];
            let denom = la - 2.0 * lb + lc;
            let shift = if denom != 0.0 { 0.5 * (la - lc) / denom } else { 0.0 };
            let peak = lb - 0.25 * (la - lc) * shift;
            out.push((etas[i] + shift * h, peak));
        }
    }
    out
}

/// Local minima of `|values|`, i.e. the sign changes and dips of `f`.
fn count_local_minima(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1].abs() < w[0].abs() && w[1].abs() <= w[2].abs())
        .count()
}

/// Fits the decay of `|f|` over `[eta_lo, eta_hi]`.
///
/// For `m ≥ 2` the oscillation `cos(σ cot(π/(4m-2)) η^q + φ)` shifts each
/// maximum of `|f|` off the crest of the envelope `A(η)`; at a maximum
/// `|f| = A / sqrt(1 + r²)` with `r = A'/(A θ')` the ratio of the decay rate
/// to the phase rate. The fit is repeated with `r` taken from the previous
/// fit until the parameters settle.
pub fn envelope_fit(profile: &KernelProfile, eta_lo: f64, eta_hi: f64) -> Result<EnvelopeFit> {
    let m = profile.spec.m;
    let q = profile.spec.tail_exponent();
    let inside: Vec<usize> = (0..profile.etas.len())
        .filter(|&i| profile.etas[i] >= eta_lo && profile.etas[i] <= eta_hi)
        .collect();
    let (Some(&first), Some(&last)) = (inside.first(), inside.last()) else {
        return Err(Error::InsufficientData(format!("no samples in [{eta_lo}, {eta_hi}]")));
    };
    let window = &profile.values[first..=last];
    let peaks: Vec<(f64, f64)> = local_maxima(&profile.etas, &profile.values)
        .into_iter()
        .filter(|(e, _)| *e >= eta_lo && *e <= eta_hi)
        .collect();
    let extrema = peaks.len() + count_local_minima(window);
    if extrema < 4 || peaks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "envelope fit needs at least 4 local extrema of |f| and 3 maxima in [{eta_lo}, {eta_hi}], found {extrema} and {}",
            peaks.len()
        )));
    }
    let rows = peaks.len();
    // Columns: 1, -η^q, -log η.
    let a = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => 1.0,
        1 => -peaks[i].0.powf(q),
        _ => -peaks[i].0.ln(),
    });
    let svd = a.clone().svd(true, true);
    let cot = if m >= 2 {
        1.0 / (PI / (4.0 * m as f64 - 2.0)).tan()
    } else {
        0.0
    };
    let (mut sigma, mut power) = (0.0, 0.0);
    let mut residual = 0.0;
    for _ in 0..50 {
        let y = nalgebra::DVector::from_iterator(
            rows,
            peaks.iter().map(|&(eta, log_peak)| {
                if cot == 0.0 || sigma <= 0.0 {
                    return log_peak;
                }
                let decay = sigma * q * eta.powf(q - 1.0) + power / eta;
                let phase = sigma * cot * q * eta.powf(q - 1.0);
                let r = decay / phase;
                log_peak + 0.5 * (1.0 + r * r).ln()
            }),
        );
        let coef = svd
            .solve(&y, 1e-14)
            .map_err(|e| Error::Degenerate(format!("envelope least squares: {e}")))?;
        residual = ((&a * &coef - &y).norm_squared() / rows as f64).sqrt();
        let settled = (coef[1] - sigma).abs() <= 1e-14 * coef[1].abs() && (coef[2] - power).abs() <= 1e-12;
        sigma = coef[1];
        power = coef[2];
        if settled || cot == 0.0 {
            break;
        }
    }
    if !(sigma > 0.0) {
        return Err(Error::Degenerate(format!("fitted exponent {sigma} is not positive")));
    }
    Ok(EnvelopeFit {
        m,
        n: profile.spec.n,
        sigma_fit: sigma,
        sigma_exact: sigma_m(m),
        power_fit: power,
        residual,
    })
}

/// Where the sampled ratio `α|f(η)| e^{c2 η^q}` is largest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub eta: f64,
    pub ratio: f64,
}

/// Empirical constants of `|K(t,x,0)| ≤ c1 t^{-n/2m} exp(-c2 |x|^q / t^{1/(2m-1)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBound {
    pub c1: f64,
    pub c2: f64,
    /// `η` at which `c1` is attained.
    pub eta_star: f64,
    /// Times at which the bound was verified on the pulled-back samples.
    pub times: Vec<f64>,
    /// Set when the ratio is still growing at the end of the sampled range,
    /// meaning no finite `c1` exists for this `c2`.
    pub counterexample: Option<BoundViolation>,
}

/// Finds the smallest `c1` for a given `c2`.
///
/// With `x = η t^{1/2m}` the exponent `|x|^q / t^{1/(2m-1)}` equals `η^q`,
/// so the bound reduces to `α |f(η)| ≤ c1 e^{-c2 η^q}` for every `t`.
pub fn gaussian_bound_with(profile: &KernelProfile, t_list: &[f64], c2: f64) -> Result<GaussianBound> {
    let spec = profile.spec;
    let alpha = normalization_constant(&spec)?;
    let q = spec.tail_exponent();
    let n = spec.n as f64;
    let two_m = 2.0 * spec.m as f64;
    let ratio = |eta: f64, f: f64| alpha * f.abs() * (c2 * eta.powf(q)).exp();
    let (mut c1, mut eta_star) = (0.0f64, 0.0);
    for (&eta, &f) in profile.etas.iter().zip(&profile.values) {
        let r = ratio(eta, f);
        if r > c1 {
            c1 = r;
            eta_star = eta;
        }
    }
    // The same samples viewed at each time, as a consistency check of the
    // self-similar reduction.
    for &t in t_list {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("times must be positive (got {t})")));
        }
        let s = t.powf(1.0 / two_m);
        for (&eta, &f) in profile.etas.iter().zip(&profile.values) {
            let x = eta * s;
            let k = alpha * t.powf(-n / two_m) * f.abs();
            let bound = c1 * t.powf(-n / two_m) * (-c2 * x.powf(q) / t.powf(1.0 / (two_m - 1.0))).exp();
            if k > bound * (1.0 + 1e-9) {
                return Err(Error::Accuracy {
                    context: format!("self-similar reduction at t={t}, x={x}"),
                    estimate: k / bound,
                    tolerance: 1.0,
                });
            }
        }
    }
    // Growth at the far end of the range means no finite constant exists.
    let tail_start = 0.8 * profile.eta_max();
    let tail_peaks: Vec<(f64, f64)> = local_maxima(&profile.etas, &profile.values)
        .into_iter()
        .map(|(e, lf)| (e, alpha * lf.exp() * (c2 * e.powf(q)).exp()))
        .collect();
    let growing = tail_peaks.len() >= 3 && tail_peaks.windows(2).rev().take(2).all(|w| w[1].1 > w[0].1);
    let counterexample = if eta_star >= tail_start || growing {
        Some(BoundViolation {
            eta: eta_star,
            ratio: c1,
        })
    } else {
        None
    };
    Ok(GaussianBound {
        c1,
        c2,
        eta_star,
        times: t_list.to_vec(),
        counterexample,
    })
}

/// [`gaussian_bound_with`] at `c2 = 0.9 σ_m`.
pub fn gaussian_bound_check(profile: &KernelProfile, t_list: &[f64]) -> Result<GaussianBound> {
    gaussian_bound_with(profile, t_list, 0.9 * sigma_m(profile.spec.m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_closed_forms() {
        assert_eq!(sigma_m(1), 0.25);
        assert!((sigma_m(2) - 3.0 * 2f64.cbrt() / 16.0).abs() < 1e-16);
        for m in 1..6 {
            assert!(sigma_m(m + 1) < sigma_m(m));
        }
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(indices_of_degree(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(indices_of_degree(3, 2).len(), 6);
        assert_eq!(multinomial(&[2, 2]), 6.0);
    }

    #[test]
    fn isotropic_symbol_evaluates_to_a_power_of_the_norm() {
        let s = SymbolSpec::isotropic(2, 3).unwrap();
        let xi = [0.3, -1.2, 0.7];
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        assert!((s.eval(&xi) - r2 * r2).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_elliptic_symbols() {
        // ξ_1^4 vanishes along ξ_2.
        assert!(SymbolSpec::from_monomials(2, 2, [(vec![4, 0], 1.0)]).is_err());
    }

    #[test]
    fn local_maxima_refinement_is_exact_for_gaussians() {
        let etas: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = etas.iter().map(|e| (-(e - 3.33f64).powi(2)).exp()).collect();
        let peaks = local_maxima(&etas, &vals);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].0 - 3.33).abs() < 1e-12);
        assert!(peaks[0].1.abs() < 1e-12);
    }
}
