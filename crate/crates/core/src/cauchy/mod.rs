//! The Cauchy problem `u_t + (-Δ)^m u = 0` on a periodic box: the Fourier
//! multiplier solver, the kernel-convolution solver, conservation laws and
//! the positivity experiments.

mod datum;
mod experiments;

pub use datum::{bump, DatumKind, GFamily, InitialDatum};
pub use experiments::{
    decay_experiment, geometric_times, near_diagonal_check, negativity_search, positivity_scan, DecayCase, DecayRow,
    DecayTrajectory, NearDiagonal, NegativitySearch, PositivityReport, PositivityRow, SearchConfig, Witness,
    NEGATIVITY_TOL,
};

use crate::fokker_planck::{Frame, GridField, BOUNDARY_TOL};
use crate::kernels::{normalization_constant, KernelProfile};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Largest admissible `α t^{-n/2m} |f|` of the kernel at the edge of its
/// truncated support.
pub const REACH_TOL: f64 = 1e-12;

/// Largest grid, in points, accepted by the direct convolution.
pub const MAX_CONVOLUTION_POINTS: usize = 1 << 14;

/// Multiplies the spectrum by `e^{-|k|^{2m} t}` without a boundary check,
/// for data continued periodically on purpose.
pub fn solve_fourier_periodic(u0: &GridField, t: f64, m: u32) -> Result<GridField> {
    if u0.frame != Frame::Parabolic {
        return Err(Error::Domain(
            "the Cauchy solver expects a field in the parabolic frame".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative (got {t})")));
    }
    let grid = u0.grid();
    let values = grid.apply(&u0.values, |k, _| {
        let k2: f64 = k.iter().map(|x| x * x).sum();
        Complex64::new((-k2.powi(m as i32) * t).exp(), 0.0)
    });
    Ok(GridField {
        values,
        time: u0.time + t,
        ..u0.clone()
    })
}

/// Advances `u0` by time `t`; the datum must be negligible on the faces.
pub fn solve_fourier(u0: &GridField, t: f64, m: u32) -> Result<GridField> {
    u0.check_boundary(BOUNDARY_TOL, "initial datum on the box faces")?;
    solve_fourier_periodic(u0, t, m)
}

/// `α t^{-n/2m} Σ_y u0(x - y) f(|y| / t^{1/2m}) ΔV` by direct summation
/// over the periodic box, with `y` the shortest periodic offset. The
/// kernel is cut at `|y| = L`; its magnitude there must stay below
/// [`REACH_TOL`]. Profile values are interpolated.
pub fn solve_convolution(u0: &GridField, t: f64, profile: &KernelProfile) -> Result<GridField> {
    if u0.frame != Frame::Parabolic {
        return Err(Error::Domain(
            "the Cauchy solver expects a field in the parabolic frame".into(),
        ));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("convolution needs t > 0 (got {t})")));
    }
    let spec = profile.spec;
    if spec.n != u0.n {
        return Err(Error::Domain(format!(
            "profile is for n = {}, field has n = {}",
            spec.n, u0.n
        )));
    }
    let len = u0.values.len();
    if len > MAX_CONVOLUTION_POINTS {
        return Err(Error::Domain(format!(
            "direct convolution is limited to {MAX_CONVOLUTION_POINTS} points (got {len})"
        )));
    }
    if profile.is_empty() || profile.etas[0] != 0.0 {
        return Err(Error::Domain("convolution profile must start at eta = 0".into()));
    }
    let n = u0.n as usize;
    let scale = t.powf(1.0 / (2.0 * spec.m as f64));
    let amplitude = normalization_constant(&spec)? * scale.powi(-(spec.n as i32));
    let eta_cut = u0.half_width / scale;
    let eta_lim = eta_cut.min(profile.eta_max());
    let window = (0.1 * eta_lim).max(5.0);
    let tail = profile
        .etas
        .iter()
        .zip(&profile.values)
        .filter(|(e, _)| **e >= eta_lim - window && **e <= eta_lim)
        .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));
    if amplitude * tail > REACH_TOL {
        return Err(if eta_lim < eta_cut {
            Error::Accuracy {
                context: format!(
                    "kernel profile ends at eta = {} before its tail is negligible",
                    profile.eta_max()
                ),
                estimate: amplitude * tail,
                tolerance: REACH_TOL,
            }
        } else {
            Error::Truncation {
                context: format!("kernel at t = {t} reaches past half the box"),
                ratio: amplitude * tail,
                tolerance: REACH_TOL,
            }
        });
    }

    let size = u0.size;
    let dx = u0.grid().spacing();
    let half = size / 2;
    let offset = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        d.min(size - d) as u64
    };
    // Shortest periodic offsets have squared length Σ d_a², d_a ≤ N/2.
    let mut keys: Vec<u64> = vec![0];
    for _ in 0..n {
        let mut next: Vec<u64> = keys
            .iter()
            .flat_map(|&k| (0..=half as u64).map(move |d| k + d * d))
            .collect();
        next.sort_unstable();
        next.dedup();
        keys = next;
    }
    let values: Vec<f64> = keys
        .par_iter()
        .map(|&s| {
            let eta = dx * (s as f64).sqrt() / scale;
            if eta > eta_lim {
                Ok(0.0)
            } else {
                profile.interpolate(eta).map(|f| amplitude * f)
            }
        })
        .collect::<Result<_>>()?;
    let table: BTreeMap<u64, f64> = keys.into_iter().zip(values).collect();
    let kernel = |s: u64| table[&s];

    let grid = u0.grid();
    let indices: Vec<Vec<usize>> = (0..len)
        .map(|flat| {
            let mut idx = vec![0usize; n];
            grid.unflatten(flat, &mut idx);
            idx
        })
        .collect();
    let dv = grid.cell_volume();
    let out: Vec<f64> = indices
        .par_iter()
        .map(|xi| {
            let mut acc = crate::numerics::CompensatedSum::default();
            for (yj, &u) in indices.iter().zip(&u0.values) {
                if u != 0.0 {
                    let s: u64 = xi.iter().zip(yj).map(|(&a, &b)| offset(a, b).pow(2)).sum();
                    acc.add(u * kernel(s));
                }
            }
            acc.value() * dv
        })
        .collect();
    Ok(GridField {
        values: out,
        time: u0.time + t,
        ..u0.clone()
    })
}

/// `∫ u`.
pub fn mass(u: &GridField) -> f64 {
    u.integral()
}

/// `∫ u²`.
pub fn l2_energy(u: &GridField) -> f64 {
    u.values.iter().map(|v| v * v).sum::<f64>() * u.grid().cell_volume()
}

/// `d/dt ∫ u² = -2 ∫ u (-Δ)^m u`, evaluated spectrally; for `m = 2` the
/// integral is `∫ |Δu|²`.
pub fn energy_rate(u: &GridField, m: u32) -> f64 {
    let grid = u.grid();
    let mut spectrum = grid.forward(&u.values);
    let mut total = 0.0;
    grid.map_modes(&mut spectrum, |k, _| {
        let k2: f64 = k.iter().map(|x| x * x).sum();
        Complex64::new(k2.powi(m as i32), 0.0)
    });
    let raw = grid.forward(&u.values);
    for (weighted, c) in spectrum.iter().zip(&raw) {
        total += (weighted * c.conj()).re;
    }
    -2.0 * total * grid.cell_volume() / u.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;

    fn cosine(size: usize, half_width: f64, mode: f64) -> GridField {
        GridField::from_fn(1, size, half_width, Frame::Parabolic, 0.0, |x| (mode * x[0]).cos()).unwrap()
    }

    #[test]
    fn single_mode_decays_by_its_multiplier() {
        let l = std::f64::consts::PI;
        let u0 = cosine(64, l, 3.0);
        let u = solve_fourier_periodic(&u0, 0.01, 2).unwrap();
        let factor = (-81.0f64 * 0.01).exp();
        for (a, b) in u.values.iter().zip(&u0.values) {
            assert!((a - factor * b).abs() < 1e-14);
        }
        assert_eq!(u.time, 0.01);
    }

    #[test]
    fn rejects_negative_time_and_wrong_frame() {
        let u0 = cosine(16, 1.0, 0.0);
        assert!(solve_fourier_periodic(&u0, -1.0, 2).is_err());
        let v = GridField {
            frame: Frame::FokkerPlanck,
            ..u0
        };
        assert!(solve_fourier_periodic(&v, 1.0, 2).is_err());
    }

    #[test]
    fn energy_rate_of_a_single_mode() {
        let l = std::f64::consts::PI;
        let u = cosine(64, l, 2.0);
        // ∫ cos²(2x) over [-π, π) is π, and (-Δ)² multiplies by 16.
        assert!((energy_rate(&u, 2) + 2.0 * 16.0 * l).abs() < 1e-11);
        assert!((l2_energy(&u) - l).abs() < 1e-12);
    }

    #[test]
    fn convolution_rejects_short_profile() {
        let spec = KernelSpec::new(2, 1).unwrap();
        let profile = KernelProfile::uniform(&spec, 5.0, 0.05).unwrap();
        let u0 = GridField::from_fn(1, 64, 16.0, Frame::Parabolic, 0.0, |x| (-x[0] * x[0]).exp()).unwrap();
        let err = solve_convolution(&u0, 1.0, &profile).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }), "{err}");
    }
}
