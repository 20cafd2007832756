//! Residuals of the differential identities satisfied by `f_{m,n}`.

use super::{eval_with, select_method, KernelSpec, Method};
use crate::numerics::finite_diff::central_derivative;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// A residual value together with the error of the differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub error: f64,
}

/// One method valid on the whole interval `[lo, hi]`, so that finite
/// differences never mix evaluators.
fn stencil_method(spec: &KernelSpec, lo: f64, hi: f64) -> Method {
    let at_lo = select_method(spec, lo);
    if at_lo == select_method(spec, hi) {
        at_lo
    } else if lo > 0.0 {
        Method::Contour
    } else {
        Method::Quadrature
    }
}

fn derivative(spec: &KernelSpec, eta: f64, order: usize, h: f64, half_width: usize) -> Result<Residual> {
    let reach = half_width as f64 * h;
    let method = stencil_method(spec, eta - reach, eta + reach);
    let d = central_derivative(
        |x| eval_with(spec, x, method).map(|v| v.value),
        eta,
        order,
        h,
        half_width,
    )?;
    Ok(Residual {
        value: d.value,
        error: d.error,
    })
}

/// Step and half-width for the `order`-th derivative.
fn stencil_for(order: usize, eta: f64) -> (f64, usize) {
    match order {
        0 | 1 => ((eta * 1e-4).max(1e-3), 2),
        2 | 3 => (0.02, 4),
        4 | 5 => (0.05, 5),
        _ => (0.08, 6),
    }
}

/// `f'_{m,n}(η) + η f_{m,n+2}(η)` with a five-point Richardson-refined
/// derivative at step `max(1e-3, 1e-4 η)`.
pub fn recurrence_residual(n: u32, eta: f64, m: u32) -> Result<Residual> {
    let (h, hw) = stencil_for(1, eta);
    recurrence_residual_with(m, n, eta, h, hw, true)
}

/// [`recurrence_residual`] with an explicit stencil; without Richardson
/// refinement a half-width-one stencil converges at order `h²`.
pub fn recurrence_residual_with(
    m: u32,
    n: u32,
    eta: f64,
    h: f64,
    half_width: usize,
    richardson: bool,
) -> Result<Residual> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("recurrence residual needs eta > 0 (got {eta})")));
    }
    let spec = KernelSpec::new(m, n)?;
    let d = if richardson {
        derivative(&spec, eta, 1, h, half_width)?
    } else {
        let reach = half_width as f64 * h;
        let method = stencil_method(&spec, eta - reach, eta + reach);
        let nodes = crate::numerics::finite_diff::central_stencil(eta, h, half_width);
        let w = crate::numerics::finite_diff::fornberg_weights(eta, &nodes, 1);
        let mut acc = 0.0;
        for (x, wj) in nodes.iter().zip(&w) {
            acc += wj * eval_with(&spec, *x, method)?.value;
        }
        Residual { value: acc, error: 0.0 }
    };
    let up = super::eval(&spec.raised(), eta)?;
    Ok(Residual {
        value: d.value + eta * up.value,
        error: d.error + eta * up.error,
    })
}

/// Coefficients `c` of `Σ c η^p f^{(k)}` keyed by `(k, p)`.
type Operator = BTreeMap<(usize, i32), f64>;

fn add(op: &mut Operator, k: usize, p: i32, c: f64) {
    *op.entry((k, p)).or_insert(0.0) += c;
}

fn differentiate(op: &Operator) -> Operator {
    let mut out = Operator::new();
    for (&(k, p), &c) in op {
        if p != 0 {
            add(&mut out, k, p - 1, c * p as f64);
        }
        add(&mut out, k + 1, p, c);
    }
    out
}

fn radial_laplacian(op: &Operator, n: u32) -> Operator {
    let d1 = differentiate(op);
    let mut out = differentiate(&d1);
    for (&(k, p), &c) in &d1 {
        add(&mut out, k, p - 1, c * (n as f64 - 1.0));
    }
    out
}

/// `(Δ^{m-1} f)'(η) - ((-1)^m / 2m) η f(η)` with the radial Laplacian
/// `Δg = g'' + ((n-1)/η) g'`. For `m = 2` this is
/// `f''' + ((n-1)/η) f'' - ((n-1)/η²) f' - (η/4) f`.
pub fn ode_residual(spec: &KernelSpec, eta: f64) -> Result<Residual> {
    let m = spec.m as usize;
    let top = 2 * m - 1;
    let (h_top, _) = stencil_for(top, eta);
    if !(eta >= 10.0 * h_top) {
        return Err(Error::Domain(format!(
            "ode residual stencil needs eta ≥ {} (got {eta})",
            10.0 * h_top
        )));
    }
    let mut op = Operator::new();
    add(&mut op, 0, 0, 1.0);
    for _ in 1..m {
        op = radial_laplacian(&op, spec.n);
    }
    op = differentiate(&op);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    add(&mut op, 0, 1, -sign / (2.0 * m as f64));

    let mut derivs: BTreeMap<usize, Residual> = BTreeMap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    for (&(k, p), &c) in &op {
        if c == 0.0 {
            continue;
        }
        let d = match derivs.get(&k) {
            Some(d) => *d,
            None => {
                let d = if k == 0 {
                    let method = stencil_method(spec, eta, eta);
                    let v = eval_with(spec, eta, method)?;
                    Residual {
                        value: v.value,
                        error: v.error,
                    }
                } else {
                    let (h, hw) = stencil_for(k, eta);
                    derivative(spec, eta, k, h, hw)?
                };
                derivs.insert(k, d);
                d
            }
        };
        let w = c * eta.powi(p);
        value += w * d.value;
        error += (w * d.error).abs();
    }
    Ok(Residual { value, error })
}
