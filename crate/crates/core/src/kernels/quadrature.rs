//! Direct quadrature of the damped Bessel integral defining `f_{m,n}`.

use super::bessel::bessel_j_scaled;
use super::series::value_at_origin;
use super::KernelSpec;
use crate::numerics::integrate_panels;
use crate::{Error, Result};
use std::cell::Cell;

/// `S_max` with `e^{-S_max^{2m}} = 1e-18`.
pub fn truncation_radius(m: u32) -> f64 {
    (18.0 * std::f64::consts::LN_10).powf(1.0 / (2.0 * m as f64))
}

/// `f_{m,n}(η)` and its quadrature error estimate.
///
/// The integrand is rewritten as `s^{n-1} e^{-s^{2m}} J_ν(ηs)/(ηs)^ν` so the
/// `η^{1-n}` prefactor never multiplies a vanishing quantity.
pub fn eval_quadrature_with_error(spec: &KernelSpec, eta: f64) -> Result<(f64, f64)> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("eta must be finite and ≥ 0 (got {eta})")));
    }
    if eta == 0.0 {
        return Ok((value_at_origin(spec.m, spec.n), 0.0));
    }
    let nu = 0.5 * spec.n as f64 - 1.0;
    let two_m = 2 * spec.m as i32;
    let s_max = truncation_radius(spec.m);
    // Panels no wider than a quarter oscillation period.
    let width = (0.25 * std::f64::consts::TAU / eta).min(0.25);
    let panels = (s_max / width).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| s_max * i as f64 / panels as f64).collect();
    let failure: Cell<Option<Error>> = Cell::new(None);
    let n = spec.n as i32;
    let r = integrate_panels(
        |s: f64| {
            let j = match bessel_j_scaled(nu, eta * s) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            };
            s.powi(n - 1) * (-s.powi(two_m)).exp() * j
        },
        &breaks,
        spec.abs_tol * 1e-3,
        0.0,
        50 * panels.max(10),
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    // The integral over (S_max, ∞) is below e^{-S_max^{2m}} times a bounded factor.
    let error = r.error + 1e-18;
    if error > spec.abs_tol {
        return Err(Error::Accuracy {
            context: format!("Bessel quadrature for m={}, n={}, eta={eta}", spec.m, spec.n),
            estimate: error,
            tolerance: spec.abs_tol,
        });
    }
    Ok((r.value, error))
}

/// `f_{m,n}(η)` by adaptive quadrature.
pub fn eval_quadrature(spec: &KernelSpec, eta: f64) -> Result<f64> {
    eval_quadrature_with_error(spec, eta).map(|(v, _)| v)
}
