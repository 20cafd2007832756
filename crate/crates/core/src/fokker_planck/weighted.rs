//! The weighted space `L²_a` with weight `ρ_a(y) = e^{a|y|^{2m/(2m-1)}}` and
//! the projection onto the span of `v_∞`.

use super::{GridField, BOUNDARY_TOL};
use crate::bounds::sigma_m;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponent `a ∈ [0, σ_m)` of the weight for order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub a: f64,
    pub m: u32,
}

impl WeightSpec {
    pub fn new(a: f64, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("weight needs m ≥ 1".into()));
        }
        let sigma = sigma_m(m);
        if !(0.0..sigma).contains(&a) {
            return Err(Error::Domain(format!(
                "weight exponent must lie in [0, σ_m = {sigma}) (got {a})"
            )));
        }
        Ok(Self { a, m })
    }

    pub fn exponent(&self) -> f64 {
        let m = self.m as f64;
        2.0 * m / (2.0 * m - 1.0)
    }

    /// `ρ_a(y)`.
    pub fn rho(&self, y: &[f64]) -> f64 {
        let r: f64 = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        (self.a * r.powf(self.exponent())).exp()
    }
}

/// `∫ ρ_a u w dy` by the trapezoid rule on the common grid. The weighted
/// product must be negligible on the box faces and the weight finite at
/// the corners.
pub fn weighted_inner_product(u: &GridField, w: &GridField, weight: &WeightSpec) -> Result<f64> {
    if !u.same_grid(w) {
        return Err(Error::Domain("inner product needs fields on the same grid".into()));
    }
    let corner = vec![u.half_width; u.n as usize];
    let rho_corner = weight.rho(&corner);
    if !rho_corner.is_finite() {
        return Err(Error::Truncation {
            context: format!("weight e^(a|y|^q) overflows at the box corner for a = {}", weight.a),
            ratio: f64::INFINITY,
            tolerance: BOUNDARY_TOL,
        });
    }
    let points = u.points();
    let product: Vec<f64> = points
        .iter()
        .zip(u.values.iter().zip(&w.values))
        .map(|(y, (a, b))| weight.rho(y) * a * b)
        .collect();
    u.with_values(product.clone())
        .check_boundary(BOUNDARY_TOL, "weighted product on the box faces")?;
    Ok(product.iter().sum::<f64>() * u.grid().cell_volume())
}

/// `P_a w = [(w, v_∞)_a / (v_∞, v_∞)_a] v_∞`.
pub fn project_kernel(w: &GridField, weight: &WeightSpec, stationary: &GridField) -> Result<GridField> {
    let num = weighted_inner_product(w, stationary, weight)?;
    let den = weighted_inner_product(stationary, stationary, weight)?;
    if !(den > 0.0) {
        return Err(Error::Degenerate("stationary profile has zero weighted norm".into()));
    }
    let c = num / den;
    Ok(w.with_values(stationary.values.iter().map(|v| c * v).collect()))
}
