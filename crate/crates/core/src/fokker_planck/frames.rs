//! Change of variables `v(y, τ) = R^n u(R y, t)`, `R = (2mt+1)^{1/2m}`,
//! `τ = log R`, and time stepping of `v_τ + L v = 0` through it.

use super::{Frame, GridField, BOUNDARY_TOL};
use crate::cauchy::solve_fourier;
use crate::{Error, Result};

/// `R(t) = (2mt + 1)^{1/2m}`, which satisfies `R^{2m-1} R' = 1`.
pub fn rescale_factor(t: f64, m: u32) -> f64 {
    let two_m = 2.0 * m as f64;
    (two_m * t + 1.0).powf(1.0 / two_m)
}

/// Inverse of `τ = log R(t)`: `t = (e^{2mτ} - 1) / 2m`.
pub fn time_of_tau(tau: f64, m: u32) -> f64 {
    let two_m = 2.0 * m as f64;
    (two_m * tau).exp_m1() / two_m
}

/// `v(y) = R^n u(R y)`; points with `|R y| > L` see zero, which requires
/// `u` to be negligible on the faces.
fn compress(u: &GridField, r: f64) -> Result<Vec<f64>> {
    u.check_boundary(BOUNDARY_TOL, "field mapped into self-similar variables")?;
    let scale = r.powi(u.n as i32);
    Ok(u.grid().rescale(&u.values, r).into_iter().map(|v| scale * v).collect())
}

/// Maps `u(·, t)` to `v(·, τ)` with `τ = log R(t)`.
pub fn to_fokker_planck(u: &GridField, m: u32) -> Result<GridField> {
    if u.frame != Frame::Parabolic {
        return Err(Error::Domain(
            "to_fokker_planck expects a field in the parabolic frame".into(),
        ));
    }
    if !(u.time >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative (got {})", u.time)));
    }
    let r = rescale_factor(u.time, m);
    let values = compress(u, r)?;
    Ok(GridField {
        values,
        frame: Frame::FokkerPlanck,
        time: r.ln(),
        ..u.clone()
    })
}

/// Maps `v(·, τ)` back to `u(x, t) = R^{-n} v(x/R)`; `v` must be negligible
/// beyond `|y| = L/R` so the spread field fits the box.
pub fn from_fokker_planck(v: &GridField, m: u32) -> Result<GridField> {
    if v.frame != Frame::FokkerPlanck {
        return Err(Error::Domain(
            "from_fokker_planck expects a field in the Fokker–Planck frame".into(),
        ));
    }
    if !(v.time >= 0.0) {
        return Err(Error::Domain(format!("tau must be nonnegative (got {})", v.time)));
    }
    let r = v.time.exp();
    let reach = v.half_width / r;
    let max = v.max_abs();
    let outside = v
        .points()
        .iter()
        .zip(&v.values)
        .filter(|(y, _)| y.iter().any(|c| c.abs() >= reach))
        .fold(0.0f64, |acc, (_, x)| acc.max(x.abs()));
    if max > 0.0 && outside > BOUNDARY_TOL * max {
        return Err(Error::Truncation {
            context: format!("spreading by R = {r} pushes the field past the box"),
            ratio: outside / max,
            tolerance: BOUNDARY_TOL,
        });
    }
    let scale = r.powi(-(v.n as i32));
    let values = v
        .grid()
        .rescale(&v.values, 1.0 / r)
        .into_iter()
        .map(|x| scale * x)
        .collect();
    Ok(GridField {
        values,
        frame: Frame::Parabolic,
        time: time_of_tau(v.time, m),
        ..v.clone()
    })
}

/// Solves `v_τ + L v = 0` from `v0` and returns the field at each of
/// `taus` (ascending, `≥ v0.time`). Each step of at most `max_step` treats
/// the current field as initial datum, solves the Cauchy problem for
/// `Δt = (e^{2mΔτ} - 1)/2m` and maps back with `R = e^{Δτ}`.
pub fn evolve(v0: &GridField, m: u32, taus: &[f64], max_step: f64) -> Result<Vec<GridField>> {
    if v0.frame != Frame::FokkerPlanck {
        return Err(Error::Domain(
            "evolve expects a field in the Fokker–Planck frame".into(),
        ));
    }
    if !(max_step > 0.0) {
        return Err(Error::Domain("step must be positive".into()));
    }
    let mut cur = v0.clone();
    let mut out = Vec::with_capacity(taus.len());
    for &target in taus {
        if target < cur.time {
            return Err(Error::Domain(format!(
                "tau grid must be ascending from {} (got {target})",
                cur.time
            )));
        }
        let span = target - cur.time;
        let steps = (span / max_step).ceil() as usize;
        let start = cur.time;
        for s in 0..steps {
            let next = start + span * (s + 1) as f64 / steps as f64;
            let dtau = next - cur.time;
            let u0 = GridField {
                frame: Frame::Parabolic,
                time: 0.0,
                ..cur.clone()
            };
            let u = solve_fourier(&u0, time_of_tau(dtau, m), m)?;
            let values = compress(&u, dtau.exp())?;
            cur = GridField {
                values,
                frame: Frame::FokkerPlanck,
                time: next,
                ..cur
            };
        }
        out.push(cur.clone());
    }
    Ok(out)
}
