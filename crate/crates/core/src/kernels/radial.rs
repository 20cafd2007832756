//! Radial integrals `I(p) = ∫_0^∞ η^p f_{m,n}(η) dη` and the normalisation
//! constant.
//!
//! Tables of kernel values on Gauss–Legendre nodes are built per `(m, n)`
//! and reused for every exponent `p`: a short one for `p ≤ n + P_BASIC` and
//! an extended one for `p ≤ n + P_MAX_OFFSET`. The tail is sampled with the
//! contour evaluator, so each sample carries relative accuracy out to where
//! `η^p |f|` is negligible for every admissible `p`.

use super::{eval, value_at_origin, KernelSpec};
use crate::bounds::sigma_m;
use crate::numerics::gauss_legendre::GaussLegendre;
use crate::numerics::CompensatedSum;
use crate::{Error, Result};
use rayon::prelude::*;
use statrs::function::gamma::gamma;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Exponents up to `n + P_MAX_OFFSET` are integrated to full accuracy.
pub const P_MAX_OFFSET: f64 = 22.0;
/// Exponents up to `n + P_BASIC` use the short table.
pub const P_BASIC: f64 = 4.0;
const NODES: usize = 20;
const OUTER_PANEL: f64 = 1.0;
/// E-folds below the peak of `η^{p_max} |f|` at which the table ends.
const TAIL_DEPTH: f64 = 42.0;

/// Surface measure `ω_n = 2 π^{n/2} / Γ(n/2)` of the unit sphere in `ℝ^n`.
pub fn sphere_measure(n: u32) -> f64 {
    2.0 * PI.powf(0.5 * n as f64) / gamma(0.5 * n as f64)
}

#[derive(Debug)]
pub(crate) struct RadialTable {
    m: u32,
    f0: f64,
    /// `(η, w, f(η) - f(0), err)` on `[0, 1]`.
    inner: Vec<(f64, f64, f64, f64)>,
    /// `(η, w, f(η), err)` on `[1, η_end]`.
    outer: Vec<(f64, f64, f64, f64)>,
    eta_end: f64,
    /// `|f(η)| ≤ tail_amp · e^{-σ_m η^{2m/(2m-1)}}` beyond `eta_end`.
    tail_amp: f64,
}

fn log_envelope(m: u32, p: f64, eta: f64) -> f64 {
    let q = 2.0 * m as f64 / (2.0 * m as f64 - 1.0);
    p * eta.ln() - sigma_m(m) * eta.powf(q)
}

fn end_of_table(m: u32, p_max: f64) -> f64 {
    let mut eta: f64 = 1.0;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let l = log_envelope(m, p_max, eta);
        peak = peak.max(l);
        if l < peak - TAIL_DEPTH && eta >= 12.0 {
            return eta.ceil();
        }
        eta += 0.25;
    }
}

impl RadialTable {
    fn build(m: u32, n: u32, p_max: f64) -> Result<Self> {
        let spec = KernelSpec::new(m, n)?;
        let f0 = value_at_origin(m, n);
        let rule = GaussLegendre::new(NODES);
        let mut inner_breaks = vec![0.0];
        inner_breaks.extend((1..=8).rev().map(|k| 10f64.powi(-k)));
        inner_breaks.extend([0.25, 0.5, 0.75, 1.0]);
        let inner_nodes: Vec<(f64, f64)> = inner_breaks
            .windows(2)
            .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
            .collect();
        let eta_end = end_of_table(m, p_max);
        let panels = ((eta_end - 1.0) / OUTER_PANEL).round() as usize;
        let outer_nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|i| {
                let a = 1.0 + i as f64 * OUTER_PANEL;
                rule.mapped(a, a + OUTER_PANEL).collect::<Vec<_>>()
            })
            .collect();
        let inner = inner_nodes
            .par_iter()
            .map(|&(x, w)| eval(&spec, x).map(|v| (x, w, v.value - f0, v.error)))
            .collect::<Result<Vec<_>>>()?;
        let outer = outer_nodes
            .par_iter()
            .map(|&(x, w)| eval(&spec, x).map(|v| (x, w, v.value, v.error)))
            .collect::<Result<Vec<_>>>()?;
        let q = spec.tail_exponent();
        let sigma = sigma_m(m);
        let tail_amp = 4.0
            * outer
                .iter()
                .filter(|t| t.0 > eta_end - 4.0)
                .map(|t| t.2.abs() * (sigma * t.0.powf(q)).exp())
                .fold(0.0, f64::max);
        Ok(Self {
            m,
            f0,
            inner,
            outer,
            eta_end,
            tail_amp,
        })
    }

    /// Bound on `∫_{η_end}^∞ η^p |f|`.
    fn tail_bound(&self, p: f64) -> f64 {
        let rule = GaussLegendre::new(NODES);
        (0..30)
            .map(|i| {
                let a = self.eta_end + i as f64;
                rule.integrate(a, a + 1.0, |x| (log_envelope(self.m, p, x)).exp())
            })
            .sum::<f64>()
            * self.tail_amp
    }

    /// `I(p)` and an error estimate, `p > -1`.
    fn integral(&self, p: f64) -> (f64, f64) {
        let mut sum = CompensatedSum::new();
        sum.add(self.f0 / (p + 1.0));
        let mut err = 0.0;
        for &(x, w, df, e) in self.inner.iter().chain(self.outer.iter()) {
            let wp = w * x.powf(p);
            sum.add(wp * df);
            // Roundoff of the kernel value itself is not part of its
            // truncation estimate, so each term carries a few ulps.
            err += (wp * e).abs() + (wp * df).abs() * 8.0 * f64::EPSILON;
        }
        (sum.value(), err + self.tail_bound(p))
    }
}

type TableMap = HashMap<(u32, u32, bool), Arc<RadialTable>>;

fn tables() -> &'static Mutex<TableMap> {
    static TABLES: OnceLock<Mutex<TableMap>> = OnceLock::new();
    TABLES.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The table covering exponents up to `p`.
pub(crate) fn table(m: u32, n: u32, p: f64) -> Result<Arc<RadialTable>> {
    let extended = p > n as f64 + P_BASIC;
    let key = (m, n, extended);
    if let Some(t) = tables().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let p_max = n as f64 + if extended { P_MAX_OFFSET } else { P_BASIC };
    // Built without holding the lock: the build runs on the rayon pool, and
    // a stolen task may itself request a table.
    let built = Arc::new(RadialTable::build(m, n, p_max)?);
    let mut map = tables().lock().unwrap();
    Ok(map.entry(key).or_insert(built).clone())
}

/// `I(p) = ∫_0^∞ η^p f_{m,n}(η) dη` and its error estimate, for
/// `-1 < p ≤ n + P_MAX_OFFSET`.
pub fn radial_integral(spec: &KernelSpec, p: f64) -> Result<(f64, f64)> {
    if !(p > -1.0) {
        return Err(Error::Domain(format!("radial integral needs p > -1 (got {p})")));
    }
    if p > spec.n as f64 + P_MAX_OFFSET {
        return Err(Error::Domain(format!(
            "radial integral supports p ≤ {} (got {p})",
            spec.n as f64 + P_MAX_OFFSET
        )));
    }
    Ok(table(spec.m, spec.n, p)?.integral(p))
}

/// `α` with `α^{-1} = ω_n ∫_0^∞ r^{n-1} f_{m,n}(r) dr`, so that
/// `α t^{-n/2m} f_{m,n}(|x|/t^{1/2m})` has unit mass.
pub fn normalization_constant(spec: &KernelSpec) -> Result<f64> {
    let t = table(spec.m, spec.n, spec.n as f64 - 1.0)?;
    let tail = t.tail_bound(spec.n as f64 - 1.0);
    if tail > spec.abs_tol {
        return Err(Error::Accuracy {
            context: format!("tail of the normalisation integral for m={}, n={}", spec.m, spec.n),
            estimate: tail,
            tolerance: spec.abs_tol,
        });
    }
    let (i, _) = t.integral(spec.n as f64 - 1.0);
    Ok(1.0 / (sphere_measure(spec.n) * i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(1) - 2.0).abs() < 1e-15);
        assert!((sphere_measure(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(3) / (4.0 * PI) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moments() {
        // ∫ η^p 2^{-1/2} e^{-η²/4} dη = 2^{-1/2} 2^p Γ((p+1)/2)
        let spec = KernelSpec::new(1, 1).unwrap();
        for p in [-0.5, 0.0, 2.0, 7.3, 20.0] {
            let (v, e) = radial_integral(&spec, p).unwrap();
            let exact = 2f64.powf(p - 0.5) * gamma(0.5 * (p + 1.0));
            assert!(((v - exact) / exact).abs() < 1e-12, "p={p}: {v} vs {exact}");
            assert!(e < 1e-10 * exact.abs().max(1.0));
        }
    }
}
