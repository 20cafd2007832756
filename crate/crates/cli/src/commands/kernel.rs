//! `kernel`: profile of `f_{m,n}`, its sign changes, the normalisation and
//! decay constants, and optionally a fit of the decay envelope.

use super::{domain_as_usage, execute, usage};
use crate::config::Interval;
use crate::report::{num, Check};
use crate::{CliError, Common, Context};
use clap::Args;
use polyheat::bounds::{envelope_fit, sigma_m};
use polyheat::kernels::{
    eval_contour, eval_quadrature, eval_series, find_sign_changes, value_at_origin, KernelConstants, KernelProfile,
    KernelSpec,
};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Largest η of the profile and of the sign-change scan.
    #[arg(long)]
    eta_max: Option<f64>,
    /// Profile spacing in η.
    #[arg(long)]
    step: Option<f64>,
    /// Fit the decay envelope of |f| and compare its rate with σ_m.
    #[arg(long)]
    fit_envelope: bool,
    /// η window of the envelope fit, as lo:hi.
    #[arg(long)]
    fit_range: Option<Interval>,
    /// Largest relative error of the fitted rate.
    #[arg(long)]
    fit_tol: Option<f64>,
    /// Largest disagreement between independent evaluation methods.
    #[arg(long)]
    cross_tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct KernelConfig {
    command: &'static str,
    m: u32,
    n: u32,
    eta_max: f64,
    step: f64,
    fit_envelope: bool,
    fit_range: [f64; 2],
    fit_tol: f64,
    cross_tol: f64,
    #[serde(flatten)]
    common: Common,
}

#[derive(Debug, Serialize)]
struct ConstantsDoc {
    #[serde(flatten)]
    constants: KernelConstants,
    f_at_origin: f64,
    sign_changes: usize,
    first_sign_change: Option<f64>,
}

/// Spacing of the profile used by the envelope fit.
const FIT_STEP: f64 = 0.01;

/// `[2m + 1, 5m + 5]`: far enough out for the leading asymptotics and long
/// enough for several extrema, since the oscillation period grows with `m`.
fn default_fit_range(m: u32) -> Interval {
    let m = m as f64;
    Interval {
        lo: 2.0 * m + 1.0,
        hi: 5.0 * m + 5.0,
    }
}

pub fn run(a: KernelArgs, ctx: &Context) -> Result<bool, CliError> {
    let s = &ctx.settings;
    let m = s.value("m", a.m, 2)?;
    let fit_envelope = s.switch("fit-envelope", a.fit_envelope)?;
    let fit_range = s.value("fit-range", a.fit_range, default_fit_range(m))?;
    let cfg = KernelConfig {
        command: "kernel",
        m,
        n: s.value("n", a.n, 1)?,
        eta_max: s.value("eta-max", a.eta_max, 12.0)?,
        step: s.value("step", a.step, 0.01)?,
        fit_envelope,
        fit_range: [fit_range.lo, fit_range.hi],
        fit_tol: s.value("fit-tol", a.fit_tol, 0.01)?,
        cross_tol: s.value("cross-tol", a.cross_tol, 1e-8)?,
        common: ctx.common.clone(),
    };
    let spec = KernelSpec::new(cfg.m, cfg.n).map_err(domain_as_usage)?;
    if !(cfg.eta_max > 0.0) || !(cfg.step > 0.0) || cfg.eta_max / cfg.step > 1e6 {
        return Err(usage("need eta-max > 0, step > 0 and at most 10^6 samples"));
    }
    if cfg.fit_envelope && cfg.m < 2 {
        return Err(usage("the envelope fit needs an oscillating kernel, m ≥ 2"));
    }
    if cfg.fit_envelope && fit_range.lo <= 0.0 {
        return Err(usage("the fit window must lie in η > 0"));
    }

    execute(ctx, "kernel", &cfg, |out, checks| {
        let profile = KernelProfile::uniform(&spec, cfg.eta_max, cfg.step)?;
        let mut buf = Vec::new();
        profile.write_csv(&mut buf)?;
        out.extended("kernel_profile.csv", &buf, &["check"], |_| {
            vec!["kernel value and its error bar".into()]
        })?;

        let roots = find_sign_changes(&spec, cfg.eta_max)?;
        let rows: Vec<Vec<String>> = roots
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    (i + 1).to_string(),
                    num(*r),
                    num(roots.bracket_width),
                    "sign change of the kernel".into(),
                ]
            })
            .collect();
        out.table("kernel_roots.csv", &["index", "eta", "bracket_width", "check"], &rows)?;

        let constants = KernelConstants::compute(&spec)?;
        out.json(
            "kernel_constants.json",
            &ConstantsDoc {
                constants,
                f_at_origin: value_at_origin(cfg.m, cfg.n),
                sign_changes: roots.roots.len(),
                first_sign_change: roots.roots.first().copied(),
            },
        )?;

        checks.push(Check::at_most(
            "origin_value",
            "profile at the origin equals the closed-form gamma ratio",
            (profile.values[0] - value_at_origin(cfg.m, cfg.n)).abs(),
            1e-12,
        ));
        cross_validate(&spec, &cfg, checks)?;
        if cfg.m == 1 {
            checks.push(Check::at_most(
                "gaussian_sign_changes",
                "the second-order kernel has no sign change",
                roots.roots.len() as f64,
                0.0,
            ));
        } else if cfg.eta_max >= 8.0 {
            checks.push(Check::at_least(
                "sign_changes",
                "a higher-order kernel changes sign",
                roots.roots.len() as f64,
                1.0,
            ));
        }

        if cfg.fit_envelope {
            let fit_profile = KernelProfile::uniform(&spec, fit_range.hi + 1.0, FIT_STEP)?;
            let fit = envelope_fit(&fit_profile, fit_range.lo, fit_range.hi)?;
            out.json("kernel_envelope.json", &fit)?;
            checks.push(Check::at_most(
                "envelope_rate",
                "fitted exponential decay rate matches sigma_m",
                (fit.sigma_fit / sigma_m(cfg.m) - 1.0).abs(),
                cfg.fit_tol,
            ));
        }
        Ok(())
    })
}

/// Compares independent evaluations: the series against quadrature for
/// `m = 2` near the origin, quadrature against the contour integral
/// further out, and the closed-form Gaussian for `m = 1`.
fn cross_validate(spec: &KernelSpec, cfg: &KernelConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let grid = |lo: f64, hi: f64, h: f64| -> Vec<f64> {
        let count = ((hi - lo) / h + 1e-9).floor().max(0.0) as usize;
        (0..=count).map(|i| lo + i as f64 * h).collect()
    };
    if cfg.m == 2 {
        let mut worst = 0.0f64;
        for eta in grid(0.0, cfg.eta_max.min(4.0), 0.1) {
            worst = worst.max((eval_series(spec, eta)? - eval_quadrature(spec, eta)?).abs());
        }
        checks.push(Check::at_most(
            "series_vs_quadrature",
            "power series agrees with Bessel quadrature on [0, 4]",
            worst,
            cfg.cross_tol,
        ));
    }
    if cfg.m == 1 {
        let mut worst = 0.0f64;
        for eta in grid(0.0, cfg.eta_max, 0.25) {
            let exact = 2f64.powf(-0.5 * cfg.n as f64) * (-eta * eta / 4.0).exp();
            worst = worst.max((eval_quadrature(spec, eta)? - exact).abs());
        }
        checks.push(Check::at_most(
            "gaussian_closed_form",
            "second-order kernel equals the Gaussian",
            worst,
            cfg.cross_tol,
        ));
    } else if cfg.eta_max >= 1.0 {
        let mut worst = 0.0f64;
        for eta in grid(1.0, cfg.eta_max.min(11.0), 0.5) {
            worst = worst.max((eval_quadrature(spec, eta)? - eval_contour(spec, eta)?.value).abs());
        }
        checks.push(Check::at_most(
            "quadrature_vs_contour",
            "Bessel quadrature agrees with the steepest-descent contour",
            worst,
            cfg.cross_tol,
        ));
    }
    Ok(())
}
