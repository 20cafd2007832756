//! Radial profiles `f_{m,n}` of the polyharmonic heat kernel.
//!
//! Four evaluators are provided and cross-checked against one another:
//!
//! * [`eval_series`]: the alternating power series (`m = 2`, moderate `η`);
//! * [`eval_quadrature`]: adaptive quadrature of the Bessel integral;
//! * [`eval_contour`]: a steepest-descent contour integral that keeps
//!   relative accuracy deep in the exponentially small tail;
//! * [`eval_asymptotic`]: the leading-order oscillating tail for `m = 2`.
//!
//! [`eval`] dispatches between them.

mod asymptotic;
mod bessel;
mod contour;
mod identities;
mod profile;
mod quadrature;
pub(crate) mod radial;
mod roots;
mod series;

pub use asymptotic::{eval_asymptotic, Asymptotic, ASYMPTOTIC_THRESHOLD};
pub use bessel::{bessel_j, bessel_j_scaled};
pub use contour::{eval_contour, ContourValue};
pub use identities::{ode_residual, recurrence_residual, recurrence_residual_with, Residual};
pub use profile::{KernelConstants, KernelProfile, Method};
pub use quadrature::{eval_quadrature, eval_quadrature_with_error, truncation_radius};
pub use radial::{normalization_constant, radial_integral, sphere_measure};
pub use roots::{find_sign_changes, SignChangeList};
pub use series::{eval_series, eval_series_with_error, value_at_origin};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Below this `η` the contour integral is replaced by series or quadrature.
pub const CONTOUR_THRESHOLD: f64 = 4.0;

/// Polyharmonic order `m`, dimension `n`, and evaluation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub m: u32,
    pub n: u32,
    /// Target absolute accuracy of kernel values.
    pub abs_tol: f64,
    /// Largest `η` at which the power series is used (`m = 2`).
    pub eta_switch: f64,
}

impl KernelSpec {
    /// Spec with the default controls `abs_tol = 1e-10`, `eta_switch = 4`.
    pub fn new(m: u32, n: u32) -> Result<Self> {
        Self::with_controls(m, n, 1e-10, 4.0)
    }

    pub fn with_controls(m: u32, n: u32, abs_tol: f64, eta_switch: f64) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(Error::Domain(format!("need m ≥ 1 and n ≥ 1 (got m={m}, n={n})")));
        }
        if !(abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol must be positive (got {abs_tol})")));
        }
        if !(eta_switch > 0.0) {
            return Err(Error::Domain(format!("eta_switch must be positive (got {eta_switch})")));
        }
        Ok(Self {
            m,
            n,
            abs_tol,
            eta_switch,
        })
    }

    /// The same order in dimension `n + 2`.
    pub fn raised(&self) -> Self {
        Self { n: self.n + 2, ..*self }
    }

    /// Scale `κ = (2m)^{1/2m}` between `f_{m,n}` and the stationary profile.
    pub fn kappa(&self) -> f64 {
        (2.0 * self.m as f64).powf(1.0 / (2.0 * self.m as f64))
    }

    /// Exponent `2m/(2m-1)` of the tail envelope.
    pub fn tail_exponent(&self) -> f64 {
        let two_m = 2.0 * self.m as f64;
        two_m / (two_m - 1.0)
    }
}

/// A kernel value with the method that produced it and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub error: f64,
    pub method: Method,
}

/// Method [`eval`] selects at `η`.
pub fn select_method(spec: &KernelSpec, eta: f64) -> Method {
    if spec.m == 2 && eta <= spec.eta_switch {
        Method::Series
    } else if eta >= CONTOUR_THRESHOLD {
        Method::Contour
    } else {
        Method::Quadrature
    }
}

/// Evaluates `f_{m,n}(η)` with the given method.
pub fn eval_with(spec: &KernelSpec, eta: f64, method: Method) -> Result<KernelValue> {
    let (value, error) = match method {
        Method::Series => series::eval_series_with_error(spec, eta)?,
        Method::Quadrature => eval_quadrature_with_error(spec, eta)?,
        Method::Contour => {
            if eta == 0.0 {
                (value_at_origin(spec.m, spec.n), 0.0)
            } else {
                let c = eval_contour(spec, eta)?;
                (c.value, c.error)
            }
        }
        Method::Asymptotic => {
            let a = eval_asymptotic(spec, eta)?;
            (a.value, a.envelope * 0.3)
        }
    };
    Ok(KernelValue { value, error, method })
}

/// Evaluates `f_{m,n}(η)`, choosing the method by [`select_method`].
pub fn eval(spec: &KernelSpec, eta: f64) -> Result<KernelValue> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("eta must be finite and ≥ 0 (got {eta})")));
    }
    eval_with(spec, eta, select_method(spec, eta))
}

/// Shorthand for the value of [`eval`].
pub fn value(spec: &KernelSpec, eta: f64) -> Result<f64> {
    eval(spec, eta).map(|v| v.value)
}
