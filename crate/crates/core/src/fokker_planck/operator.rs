//! The operator `L v = (-Δ)^m v - ∇·(y v)` and the eigenfunction checks
//! `L D^α v_∞ = |α| D^α v_∞`.

use super::{Frame, GridField, BOUNDARY_TOL};
use crate::kernels::{eval_with, normalization_constant, KernelSpec, Method};
use crate::moments::MultiIndex;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// Largest admissible fraction of the drift term's energy in the modes
/// removed by the two-thirds rule.
pub const ALIAS_TOL: f64 = 1e-10;

/// Box and resolution for eigenfunction checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Points per axis.
    pub size: usize,
    /// Half-width `L` of the box.
    pub half_width: f64,
    /// Largest admissible face-to-maximum ratio of the sampled `v_∞`.
    pub boundary_tol: f64,
}

impl GridParams {
    pub fn new(size: usize, half_width: f64) -> Self {
        Self {
            size,
            half_width,
            boundary_tol: BOUNDARY_TOL,
        }
    }

    /// Box on which `v_∞` for `m = 2` falls to roundoff at the faces, so the
    /// periodic extension has no visible jump: `L = 32`, with 512 points for
    /// `n = 1`, 128 for `n = 2` and 64 for `n = 3`.
    pub fn default_for(n: u32) -> Self {
        let size = match n {
            1 => 512,
            2 => 128,
            _ => 64,
        };
        Self::new(size, 32.0)
    }
}

/// `v_∞(y) = κ^n α f_{m,n}(κ|y|)` sampled on the grid, one kernel
/// evaluation per distinct radius. A single evaluation method covers every
/// radius: switching methods leaves a jump at the roundoff level, which
/// spectral derivatives amplify.
pub fn stationary_field(spec: &KernelSpec, size: usize, half_width: f64) -> Result<GridField> {
    let n = spec.n as usize;
    let kappa = spec.kappa();
    let c = kappa.powi(spec.n as i32) * normalization_constant(spec)?;
    let probe = GridField::new(
        spec.n,
        size,
        half_width,
        Frame::FokkerPlanck,
        0.0,
        vec![0.0; size.pow(spec.n)],
    )?;
    let grid = probe.grid();
    let dx = grid.spacing();
    let centre = (size / 2) as i64;
    // Squared radius in units of dx² is an integer, so radii are keyed exactly.
    let mut idx = vec![0usize; n];
    let keys: Vec<u64> = (0..grid.len())
        .map(|k| {
            grid.unflatten(k, &mut idx);
            idx.iter().map(|&i| (i as i64 - centre).pow(2) as u64).sum()
        })
        .collect();
    let mut distinct: Vec<u64> = keys.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let values: Vec<f64> = distinct
        .par_iter()
        .map(|&s| eval_with(spec, kappa * dx * (s as f64).sqrt(), Method::Contour).map(|v| c * v.value))
        .collect::<Result<_>>()?;
    let table: BTreeMap<u64, f64> = distinct.into_iter().zip(values).collect();
    Ok(probe.with_values(keys.iter().map(|s| table[s]).collect()))
}

/// `L v` with the diffusion term as the multiplier `|k|^{2m}` and the drift
/// `∇·(y v) = y·∇v + n v` formed in physical space from spectral gradients.
/// The drift product is filtered by the two-thirds rule.
pub fn apply_l(v: &GridField, m: u32) -> Result<GridField> {
    if v.frame != Frame::FokkerPlanck {
        return Err(Error::Domain("L acts on fields in the Fokker–Planck frame".into()));
    }
    let grid = v.grid();
    let n = v.n as usize;
    let spectrum = grid.forward(&v.values);
    let points = v.points();
    let mut drift = vec![0.0; v.values.len()];
    for a in 0..n {
        let mut s = spectrum.clone();
        grid.map_modes(&mut s, |k, nyq| {
            if nyq[a] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k[a])
            }
        });
        let g = grid.inverse_real(s);
        for (i, d) in drift.iter_mut().enumerate() {
            *d += points[i][a] * g[i];
        }
    }
    let mut drift_hat = grid.forward(&drift);
    let cut = 2.0 / 3.0 * std::f64::consts::PI * v.size as f64 / (2.0 * v.half_width);
    let mut idx = vec![0usize; n];
    let (mut high, mut total) = (0.0, 0.0);
    for (flat, c) in drift_hat.iter_mut().enumerate() {
        grid.unflatten(flat, &mut idx);
        let e = c.norm_sqr();
        total += e;
        if idx.iter().any(|&j| grid.wavenumber(j).abs() > cut) {
            high += e;
            *c = Complex64::new(0.0, 0.0);
        }
    }
    if total > 0.0 && high > ALIAS_TOL * total {
        return Err(Error::Accuracy {
            context: "drift term energy beyond the two-thirds cutoff".into(),
            estimate: high / total,
            tolerance: ALIAS_TOL,
        });
    }
    let mut out = spectrum.clone();
    grid.map_modes(&mut out, |k, _| {
        let k2: f64 = k.iter().map(|x| x * x).sum();
        Complex64::new(k2.powi(m as i32) - n as f64, 0.0)
    });
    for (o, d) in out.iter_mut().zip(&drift_hat) {
        *o -= d;
    }
    Ok(v.with_values(grid.inverse_real(out)))
}

/// Relative residual `‖L w - |α| w‖ / ‖w‖` for `w = D^α v_∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    pub alpha: MultiIndex,
    pub residual: f64,
    #[serde(rename = "N")]
    pub size: usize,
}

/// Checks that `D^α v_∞` is an eigenfunction of `L` with eigenvalue `|α|`.
pub fn eigen_residual(alpha: &MultiIndex, spec: &KernelSpec, params: &GridParams) -> Result<EigenResidual> {
    if alpha.dim() != spec.n as usize {
        return Err(Error::Domain(format!(
            "multi-index {alpha} does not match n = {}",
            spec.n
        )));
    }
    if alpha.degree() > 4 {
        return Err(Error::Domain(format!(
            "eigen checks are limited to |α| ≤ 4 (got {alpha})"
        )));
    }
    let v = stationary_field(spec, params.size, params.half_width)?;
    v.check_boundary(params.boundary_tol, "stationary profile on the eigen-check box")?;
    let w = v.with_values(v.grid().derivative(&v.values, &alpha.0));
    let norm = w.l2_norm();
    if !(norm > 1e-300) || norm < 1e-14 * v.l2_norm() {
        return Err(Error::Degenerate(format!("D^{alpha} v_∞ has vanishing norm {norm:e}")));
    }
    let lw = apply_l(&w, spec.m)?;
    let lambda = alpha.degree() as f64;
    let diff = w.with_values(lw.values.iter().zip(&w.values).map(|(a, b)| a - lambda * b).collect());
    Ok(EigenResidual {
        alpha: alpha.clone(),
        residual: diff.l2_norm() / norm,
        size: params.size,
    })
}

/// Writes the CSV table `alpha,residual,N`.
pub fn write_eigen_table<W: Write>(rows: &[EigenResidual], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["alpha", "residual", "N"])?;
    for r in rows {
        out.write_record([r.alpha.to_string(), format!("{:e}", r.residual), r.size.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
