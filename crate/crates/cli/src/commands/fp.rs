//! `fp`: eigenfunction residuals of the Fokker–Planck operator and,
//! optionally, moment trajectories of an evolved Gaussian against their
//! closed form.

use super::{domain_as_usage, execute, usage, validate_grid};
use crate::config::Range;
use crate::report::{num, Check};
use crate::{CliError, Common, Context};
use clap::Args;
use polyheat::fokker_planck::{eigen_residual, evolve, stationary_field, Frame, GridField, GridParams};
use polyheat::kernels::KernelSpec;
use polyheat::moments::{trajectory_closed_form, MultiIndex};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Args)]
pub struct FpArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Points per axis.
    #[arg(long)]
    size: Option<usize>,
    /// Half-width L of the box [-L, L)^n.
    #[arg(long)]
    half_width: Option<f64>,
    /// Largest order |α| of the derivatives D^α v_∞.
    #[arg(long)]
    alpha_max: Option<u32>,
    /// Largest admissible eigen-residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Repeat on twice the points and require each residual to shrink.
    #[arg(long)]
    refine: bool,
    /// Smallest residual reduction under refinement.
    #[arg(long)]
    refine_factor: Option<f64>,
    /// τ grid lo:hi:step for moment trajectories of an evolved Gaussian.
    #[arg(long)]
    taus: Option<Range>,
    /// Largest moment order k of |y|^{2k} in the trajectory check.
    #[arg(long)]
    k_max: Option<u32>,
    /// Largest τ step of the evolution.
    #[arg(long)]
    max_step: Option<f64>,
    /// Largest relative error of the measured moments.
    #[arg(long)]
    moment_tol: Option<f64>,
    /// Write v_∞ as a binary field with a JSON sidecar.
    #[arg(long)]
    save_fields: bool,
}

#[derive(Debug, Serialize)]
struct FpConfig {
    command: &'static str,
    m: u32,
    n: u32,
    size: usize,
    half_width: f64,
    alpha_max: u32,
    tol: f64,
    refine: bool,
    refine_factor: f64,
    taus: Option<[f64; 3]>,
    k_max: u32,
    max_step: f64,
    moment_tol: f64,
    save_fields: bool,
    #[serde(flatten)]
    common: Common,
}

/// Multi-indices of `n` components with `|α| ≤ max`, in graded
/// lexicographic order.
fn multi_indices(n: u32, max: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for degree in 0..=max {
        let mut stack = vec![(Vec::new(), degree)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() + 1 == n as usize {
                let mut full = prefix;
                full.push(left);
                out.push(MultiIndex::new(full));
                continue;
            }
            for first in (0..=left).rev() {
                let mut p = prefix.clone();
                p.push(first);
                stack.push((p, left - first));
            }
        }
    }
    out
}

/// Moments `∫ |y|^{2k} e^{-|y|²/2} (2π)^{-n/2} dy = n(n+2)⋯(n+2k-2)`.
fn gaussian_moments(n: u32, k_max: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for k in 1..=k_max {
        let prev = *out.last().expect("nonempty");
        out.push(prev * (n as f64 + 2.0 * k as f64 - 2.0));
    }
    out
}

pub fn run(a: FpArgs, ctx: &Context) -> Result<bool, CliError> {
    let s = &ctx.settings;
    let n = s.value("n", a.n, 1)?;
    let defaults = GridParams::default_for(n);
    let taus = s.optional("taus", a.taus)?;
    let cfg = FpConfig {
        command: "fp",
        m: s.value("m", a.m, 2)?,
        n,
        size: s.value("size", a.size, defaults.size)?,
        half_width: s.value("half-width", a.half_width, defaults.half_width)?,
        alpha_max: s.value("alpha-max", a.alpha_max, 3)?,
        tol: s.value("tol", a.tol, 1e-3)?,
        refine: s.switch("refine", a.refine)?,
        refine_factor: s.value("refine-factor", a.refine_factor, 4.0)?,
        taus: taus.as_ref().map(|r| [r.lo, r.hi, r.step]),
        k_max: s.value("k-max", a.k_max, 2)?,
        max_step: s.value("max-step", a.max_step, 0.25)?,
        moment_tol: s.value("moment-tol", a.moment_tol, 1e-4)?,
        save_fields: s.switch("save-fields", a.save_fields)?,
        common: ctx.common.clone(),
    };
    validate_grid(cfg.n, cfg.size, cfg.half_width)?;
    let spec = KernelSpec::new(cfg.m, cfg.n).map_err(domain_as_usage)?;
    if cfg.refine {
        validate_grid(cfg.n, 2 * cfg.size, cfg.half_width)?;
    }
    if taus.as_ref().is_some_and(|r| r.lo < 0.0) {
        return Err(usage("τ must be nonnegative"));
    }
    if taus.is_some() && cfg.m != 2 {
        return Err(usage("closed-form moment trajectories are available for m = 2 only"));
    }
    if !(cfg.max_step > 0.0) {
        return Err(usage("--max-step must be positive"));
    }

    execute(ctx, "fp", &cfg, |out, checks| {
        if cfg.save_fields {
            stationary_field(&spec, cfg.size, cfg.half_width)?.save(&out.dir().join("fp_stationary"))?;
            out.record("fp_stationary.bin");
            out.record("fp_stationary.json");
        }
        let alphas = multi_indices(cfg.n, cfg.alpha_max);
        let coarse = GridParams::new(cfg.size, cfg.half_width);
        let fine = GridParams::new(2 * cfg.size, cfg.half_width);
        let mut rows = Vec::new();
        let (mut worst, mut weakest) = (0.0f64, f64::INFINITY);
        for alpha in &alphas {
            let r = eigen_residual(alpha, &spec, &coarse)?;
            worst = worst.max(r.residual);
            rows.push(vec![
                alpha.to_string(),
                num(r.residual),
                r.size.to_string(),
                String::new(),
            ]);
            if cfg.refine {
                let f = eigen_residual(alpha, &spec, &fine)?;
                let factor = r.residual / f.residual;
                weakest = weakest.min(factor);
                rows.last_mut().expect("row just pushed")[3] = num(factor);
                rows.push(vec![
                    alpha.to_string(),
                    num(f.residual),
                    f.size.to_string(),
                    String::new(),
                ]);
            }
        }
        for row in &mut rows {
            row.push("derivative of the stationary profile is an eigenfunction".into());
        }
        out.table(
            "fp_eigen.csv",
            &["alpha", "residual", "N", "refinement_factor", "check"],
            &rows,
        )?;
        checks.push(Check::at_most(
            "eigen_residual",
            "derivatives of the stationary profile are eigenfunctions",
            worst,
            cfg.tol,
        ));
        if cfg.refine {
            checks.push(Check::at_least(
                "eigen_refinement",
                "eigen-residuals shrink when the grid is refined",
                weakest,
                cfg.refine_factor,
            ));
        }

        if let Some(range) = &taus {
            let taus = range.points();
            let v0 = GridField::from_fn(cfg.n, cfg.size, cfg.half_width, Frame::FokkerPlanck, 0.0, |y| {
                let r2: f64 = y.iter().map(|c| c * c).sum();
                (-r2 / 2.0).exp() / (2.0 * PI).powf(cfg.n as f64 / 2.0)
            })?;
            let positive: Vec<f64> = taus.iter().copied().filter(|t| *t > 0.0).collect();
            let mut fields = if taus[0] == 0.0 { vec![v0.clone()] } else { vec![] };
            fields.extend(evolve(&v0, cfg.m, &positive, cfg.max_step)?);
            let initial = gaussian_moments(cfg.n, cfg.k_max);
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for k in 0..=cfg.k_max {
                let traj = trajectory_closed_form(&initial[..=k as usize], k, cfg.n, &taus)?;
                for (v, predicted) in fields.iter().zip(&traj.values) {
                    let measured = v.radial_moment(2.0 * k as f64);
                    let rel = (measured - predicted).abs() / predicted.abs();
                    worst = worst.max(rel);
                    rows.push(vec![
                        num(v.time),
                        k.to_string(),
                        num(measured),
                        num(*predicted),
                        num(rel),
                        "moments of the evolved solution follow the closed form".into(),
                    ]);
                }
            }
            out.table(
                "fp_moments.csv",
                &["tau", "k", "measured", "closed_form", "rel_err", "check"],
                &rows,
            )?;
            checks.push(Check::at_most(
                "moment_trajectory",
                "moments of the evolved solution follow the closed form",
                worst,
                cfg.moment_tol,
            ));
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_indices_are_graded() {
        let one: Vec<String> = multi_indices(1, 3).iter().map(|a| a.to_string()).collect();
        assert_eq!(one.len(), 4);
        let two = multi_indices(2, 2);
        assert_eq!(two.len(), 6);
        assert!(two.windows(2).all(|w| w[0].degree() <= w[1].degree()));
        assert_eq!(multi_indices(3, 1).len(), 4);
    }

    #[test]
    fn gaussian_moment_values() {
        assert_eq!(gaussian_moments(1, 3), vec![1.0, 1.0, 3.0, 15.0]);
        assert_eq!(gaussian_moments(2, 2), vec![1.0, 2.0, 8.0]);
    }
}
