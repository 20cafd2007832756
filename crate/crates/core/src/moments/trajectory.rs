//! Trajectories `τ ↦ M_b(τ) = ∫ |y|^b v(y, τ) dy` of the Fokker–Planck flow
//! for the biharmonic operator.
//!
//! For `b = 2k` they obey `M'_{2k} + 2k M_{2k} = -c_k M_{2k-4}` with
//! `c_k = 2k(2k-2)(2k+n-2)(2k+n-4)`, which closes on the chain
//! `k, k-2, k-4, ...` and gives `M_{2k}(τ) = Σ_j a_j^k e^{-2jτ}`.

use crate::numerics::ode::{integrate, OdeOptions};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Sampled moment trajectory and, for even integer orders, its
/// coefficients `a_j^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub n: u32,
    /// Order `b` of the weight `|y|^b`.
    pub b: f64,
    /// `k` with `b = 2k`, when the order is an even integer.
    pub k: Option<u32>,
    /// `a_j^k` for `j = 0..=k`; empty for fractional orders.
    pub coefficients: Vec<f64>,
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
struct CoefficientBlock<'a> {
    n: u32,
    b: f64,
    k: Option<u32>,
    coefficients: &'a [f64],
}

impl MomentTrajectory {
    /// `Σ_j a_j^k e^{-2jτ}`; `None` for fractional orders.
    pub fn closed_form_at(&self, tau: f64) -> Option<f64> {
        self.k?;
        Some(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(j, a)| a * (-2.0 * j as f64 * tau).exp())
                .sum(),
        )
    }

    /// Writes the CSV table `tau,M`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "M"])?;
        for (t, v) in self.taus.iter().zip(&self.values) {
            out.write_record([t.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// JSON block `{n, b, k, coefficients}`.
    pub fn coefficients_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CoefficientBlock {
            n: self.n,
            b: self.b,
            k: self.k,
            coefficients: &self.coefficients,
        })?)
    }
}

/// `c = b(b-2)(b+n-2)(b+n-4)`, the forcing factor of the order-`b` equation.
pub(crate) fn forcing(b: f64, n: u32) -> f64 {
    let n = n as f64;
    b * (b - 2.0) * (b + n - 2.0) * (b + n - 4.0)
}

/// Initial moments `M_{2j}(0)` needed for order `2k`: every `j ≤ k` with
/// `j ≡ k (mod 2)`.
fn required(u0_moments: &[f64], k: u32) -> Result<()> {
    for j in (k % 2..=k).step_by(2) {
        match u0_moments.get(j as usize) {
            Some(v) if v.is_finite() => {}
            _ => {
                return Err(Error::InputIncomplete(format!(
                    "order {} needs the initial moment M_{}(0)",
                    2 * k,
                    2 * j
                )))
            }
        }
    }
    if k % 2 == 0 && (u0_moments[0] - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "initial datum must have unit mass (got {})",
            u0_moments[0]
        )));
    }
    Ok(())
}

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|t| !(*t >= 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("tau grid must be nonnegative and nondecreasing".into()));
    }
    Ok(())
}

fn coefficients(u0_moments: &[f64], k: u32, n: u32) -> Vec<f64> {
    match k {
        0 => vec![u0_moments[0]],
        1 => vec![0.0, u0_moments[1]],
        _ => {
            let prev = coefficients(u0_moments, k - 2, n);
            let c = forcing(2.0 * k as f64, n);
            let mut a: Vec<f64> = prev
                .iter()
                .enumerate()
                .map(|(j, p)| -c * p / (2.0 * (k as f64 - j as f64)))
                .collect();
            a.push(0.0);
            let rest: f64 = a.iter().sum();
            a.push(u0_moments[k as usize] - rest);
            a
        }
    }
}

/// Closed-form trajectory of `M_{2k}` from the initial moments
/// `u0_moments[j] = M_{2j}(0)` of a unit-mass datum.
pub fn trajectory_closed_form(u0_moments: &[f64], k: u32, n: u32, taus: &[f64]) -> Result<MomentTrajectory> {
    required(u0_moments, k)?;
    check_taus(taus)?;
    let mut t = MomentTrajectory {
        n,
        b: 2.0 * k as f64,
        k: Some(k),
        coefficients: coefficients(u0_moments, k, n),
        taus: taus.to_vec(),
        values: Vec::new(),
    };
    t.values = taus
        .iter()
        .map(|&tau| t.closed_form_at(tau).unwrap_or(f64::NAN))
        .collect();
    Ok(t)
}

fn options() -> OdeOptions {
    OdeOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        ..OdeOptions::default()
    }
}

/// Integrates the chain of moment equations for `M_{2k}` numerically.
pub fn trajectory_ode_integrate(u0_moments: &[f64], k: u32, n: u32, taus: &[f64]) -> Result<MomentTrajectory> {
    required(u0_moments, k)?;
    check_taus(taus)?;
    let levels: Vec<u32> = (k % 2..=k).step_by(2).collect();
    let y0: Vec<f64> = levels.iter().map(|&j| u0_moments[j as usize]).collect();
    let rates: Vec<(f64, f64)> = levels
        .iter()
        .map(|&j| (2.0 * j as f64, forcing(2.0 * j as f64, n)))
        .collect();
    let states = integrate(
        |_, y, dy| {
            for i in 0..y.len() {
                let lower = if i > 0 { y[i - 1] } else { 0.0 };
                dy[i] = -rates[i].0 * y[i] - rates[i].1 * lower;
            }
        },
        0.0,
        &y0,
        taus,
        &options(),
    )
    .map_err(|f| Error::Accuracy {
        context: format!("moment ODE for order {} at tau = {}", 2 * k, f.t),
        estimate: f.step,
        tolerance: options().min_step,
    })?;
    Ok(MomentTrajectory {
        n,
        b: 2.0 * k as f64,
        k: Some(k),
        coefficients: Vec::new(),
        taus: taus.to_vec(),
        values: states.iter().map(|s| *s.last().unwrap_or(&f64::NAN)).collect(),
    })
}

/// Integrates `M_b' + b M_b = -b(b-2)(b+n-2)(b+n-4) M_{b-4}` for real
/// `b ≥ 4`, with the lower trajectory `M_{b-4}` supplied as `base`.
pub fn trajectory_fractional<F>(b: f64, n: u32, initial: f64, base: F, taus: &[f64]) -> Result<MomentTrajectory>
where
    F: Fn(f64) -> f64,
{
    if !(b >= 4.0) {
        return Err(Error::Domain(format!(
            "fractional moment equation holds for b ≥ 4 (got {b})"
        )));
    }
    if !initial.is_finite() {
        return Err(Error::InputIncomplete(format!("initial moment M_{b}(0) is not finite")));
    }
    check_taus(taus)?;
    let c = forcing(b, n);
    let states = integrate(
        |t, y, dy| dy[0] = -b * y[0] - c * base(t),
        0.0,
        &[initial],
        taus,
        &options(),
    )
    .map_err(|f| Error::Accuracy {
        context: format!("moment ODE for order {b} at tau = {}", f.t),
        estimate: f.step,
        tolerance: options().min_step,
    })?;
    let k = (b.fract() == 0.0 && (b as u64) % 2 == 0).then_some((b / 2.0) as u32);
    Ok(MomentTrajectory {
        n,
        b,
        k,
        coefficients: Vec::new(),
        taus: taus.to_vec(),
        values: states.iter().map(|s| s[0]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let m0 = [1.0, 0.7, 3.0, -2.0];
        let t = trajectory_closed_form(&m0, 0, 1, &[0.0, 5.0]).unwrap();
        assert_eq!(t.values, vec![1.0, 1.0]);
        let t = trajectory_closed_form(&m0, 1, 1, &[0.0, 1.0]).unwrap();
        assert!((t.values[1] - 0.7 * (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn quartic_moment_for_n1() {
        let m0 = [1.0, 0.0, 2.5];
        let t = trajectory_closed_form(&m0, 2, 1, &[0.3]).unwrap();
        assert_eq!(t.coefficients[0], -6.0);
        assert_eq!(t.coefficients[1], 0.0);
        let exact = -6.0 + (-1.2f64).exp() * (2.5 + 6.0);
        assert!((t.values[0] - exact).abs() < 1e-14);
    }

    #[test]
    fn sextic_moment_display_formula() {
        let n = 3u32;
        let (m2, m6) = (0.8, 4.0);
        let t = trajectory_closed_form(&[1.0, m2, 0.0, m6], 3, n, &[0.7]).unwrap();
        let c = 6.0 * (n as f64 + 4.0) * (n as f64 + 2.0);
        let exact = -c * (-1.4f64).exp() * m2 + (-4.2f64).exp() * (m6 + c * m2);
        assert!((t.values[0] - exact).abs() < 1e-13);
        assert_eq!(t.coefficients[0], 0.0);
        assert_eq!(t.coefficients[2], 0.0);
    }

    #[test]
    fn missing_moments_are_reported() {
        assert!(matches!(
            trajectory_closed_form(&[1.0, 0.0], 2, 1, &[0.0]),
            Err(Error::InputIncomplete(_))
        ));
        assert!(matches!(
            trajectory_closed_form(&[1.0, 0.0, f64::NAN], 2, 1, &[0.0]),
            Err(Error::InputIncomplete(_))
        ));
        assert!(matches!(
            trajectory_closed_form(&[2.0, 0.0, 1.0], 2, 1, &[0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn serialisations() {
        let t = trajectory_closed_form(&[1.0, 0.5], 1, 2, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,M\n0,0.5\n"));
        let json: serde_json::Value = serde_json::from_str(&t.coefficients_json().unwrap()).unwrap();
        assert_eq!(json["coefficients"][1], 0.5);
    }
}
