//! Leading-order oscillating tail of `f_{2,n}`.

use super::radial::normalization_constant;
use super::KernelSpec;
use crate::bounds::sigma_m;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Smallest `η` at which the asymptotic form is offered.
pub const ASYMPTOTIC_THRESHOLD: f64 = 4.0;

/// Asymptotic value and its envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub value: f64,
    pub envelope: f64,
}

/// `f_{2,n}(η) ≈ K_n / (α η^{n/3}) · cos(√3 σ η^{4/3} - nπ/6) · e^{-σ η^{4/3}}`
/// with `K_n = (2π)^{-n/2} / (√3 · 2^{(n-3)/3})`.
pub fn eval_asymptotic(spec: &KernelSpec, eta: f64) -> Result<Asymptotic> {
    if spec.m != 2 {
        return Err(Error::Domain(format!(
            "asymptotic form is implemented for m = 2 only (got m = {})",
            spec.m
        )));
    }
    if !(eta >= ASYMPTOTIC_THRESHOLD) {
        return Err(Error::Domain(format!(
            "asymptotic form requires eta ≥ {ASYMPTOTIC_THRESHOLD} (got {eta})"
        )));
    }
    let n = spec.n as f64;
    let sigma = sigma_m(2);
    let alpha = normalization_constant(spec)?;
    let k_n = (2.0 * PI).powf(-0.5 * n) / (3f64.sqrt() * 2f64.powf((n - 3.0) / 3.0));
    let e43 = eta.powf(4.0 / 3.0);
    let envelope = k_n * (-sigma * e43).exp() / (alpha * eta.powf(n / 3.0));
    let phase = 3f64.sqrt() * sigma * e43 - n * PI / 6.0;
    Ok(Asymptotic {
        value: envelope * phase.cos(),
        envelope,
    })
}
