//! `solve`: the Cauchy problem on a periodic box at a list of times, with
//! optional conservation checks and field output.

use super::{execute, usage, validate_grid, DatumChoice, DatumParams};
use crate::config::TimeGrid;
use crate::report::{num, Check};
use crate::{CliError, Common, Context};
use clap::Args;
use polyheat::cauchy::{energy_rate, l2_energy, mass, solve_convolution, MAX_CONVOLUTION_POINTS};
use polyheat::fokker_planck::GridField;
use polyheat::kernels::{KernelProfile, KernelSpec};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    datum: Option<DatumChoice>,
    /// Bump radius, or Gaussian width.
    #[arg(long)]
    radius: Option<f64>,
    /// Peak of the bump or Gaussian; value of the constant datum.
    #[arg(long)]
    height: Option<f64>,
    /// Decay exponent of the power data.
    #[arg(long)]
    beta: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    size: Option<usize>,
    /// Half-width L of the box [-L, L)^n.
    #[arg(long)]
    half_width: Option<f64>,
    /// Times as t1,t2,... or geometric:t0:t1:count.
    #[arg(long)]
    times: Option<TimeGrid>,
    /// Fourier multiplier or direct kernel convolution.
    #[arg(long)]
    method: Option<SolveMethod>,
    /// Check mass, energy decay and the energy identity.
    #[arg(long)]
    check_conservation: bool,
    /// Write each solution as a binary field with a JSON sidecar.
    #[arg(long)]
    save_fields: bool,
    /// Largest mass change relative to ∫|u0|.
    #[arg(long)]
    mass_tol: Option<f64>,
    /// Largest relative error of dE/dt against a centred difference.
    #[arg(long)]
    rate_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Fourier,
    Convolution,
}

impl std::str::FromStr for SolveMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fourier" => Ok(SolveMethod::Fourier),
            "convolution" => Ok(SolveMethod::Convolution),
            other => Err(format!("unknown method {other:?}; expected fourier or convolution")),
        }
    }
}

#[derive(Debug, Serialize)]
struct SolveConfig {
    command: &'static str,
    m: u32,
    n: u32,
    #[serde(flatten)]
    datum: DatumParams,
    size: usize,
    half_width: f64,
    times: String,
    method: SolveMethod,
    check_conservation: bool,
    save_fields: bool,
    mass_tol: f64,
    rate_tol: f64,
    #[serde(flatten)]
    common: Common,
}

/// Profile of the kernel used by the convolution solver.
const PROFILE_ETA_MAX: f64 = 64.0;
const PROFILE_STEP: f64 = 0.02;

pub fn run(a: SolveArgs, ctx: &Context) -> Result<bool, CliError> {
    let s = &ctx.settings;
    let n = s.value("n", a.n, 1)?;
    let times = s.value("times", a.times, TimeGrid::List(vec![0.1, 0.5, 1.0, 2.0]))?;
    let cfg = SolveConfig {
        command: "solve",
        m: s.value("m", a.m, 2)?,
        n,
        datum: DatumParams {
            datum: s.value("datum", a.datum, DatumChoice::Bump)?,
            radius: s.value("radius", a.radius, 1.0)?,
            height: s.value("height", a.height, 1.0)?,
            beta: s.value("beta", a.beta, 0.5)?,
            g_base: 1.0,
            g_amplitude: 0.0,
            g_width: 1.0,
        },
        size: s.value("size", a.size, if n == 1 { 512 } else { 128 })?,
        half_width: s.value("half-width", a.half_width, 32.0)?,
        times: times.to_string(),
        method: s.value("method", a.method, SolveMethod::Fourier)?,
        check_conservation: s.switch("check-conservation", a.check_conservation)?,
        save_fields: s.switch("save-fields", a.save_fields)?,
        mass_tol: s.value("mass-tol", a.mass_tol, 1e-12)?,
        rate_tol: s.value("rate-tol", a.rate_tol, 1e-5)?,
        common: ctx.common.clone(),
    };
    validate_grid(cfg.n, cfg.size, cfg.half_width)?;
    if cfg.m == 0 {
        return Err(usage("m must be at least 1"));
    }
    if cfg.check_conservation && !cfg.datum.datum.is_localized() {
        return Err(usage("conservation checks need a datum that decays inside the box"));
    }
    if cfg.method == SolveMethod::Convolution && cfg.size.pow(cfg.n) > MAX_CONVOLUTION_POINTS {
        return Err(usage(format!(
            "the convolution solver accepts at most {MAX_CONVOLUTION_POINTS} points"
        )));
    }
    let times = times.points()?;
    let datum = cfg.datum.build(cfg.n, cfg.size, cfg.half_width)?;

    execute(ctx, "solve", &cfg, |out, checks| {
        let profile = match cfg.method {
            SolveMethod::Convolution => Some(KernelProfile::uniform(
                &KernelSpec::new(cfg.m, cfg.n)?,
                PROFILE_ETA_MAX,
                PROFILE_STEP,
            )?),
            SolveMethod::Fourier => None,
        };
        let solve = |t: f64| -> Result<GridField, CliError> {
            Ok(match &profile {
                Some(p) => solve_convolution(&datum.field, t, p)?,
                None => datum.solve(t, cfg.m)?,
            })
        };
        if cfg.save_fields {
            datum.field.save(&out.dir().join("solve_u0"))?;
            out.record("solve_u0.bin");
            out.record("solve_u0.json");
        }
        let m0 = mass(&datum.field);
        let abs_mass: f64 = datum.field.values.iter().map(|v| v.abs()).sum::<f64>() * datum.field.grid().cell_volume();
        let mut rows = Vec::new();
        let mut energies = vec![l2_energy(&datum.field)];
        let (mut mass_drift, mut rate_err) = (0.0f64, 0.0f64);
        for (i, &t) in times.iter().enumerate() {
            let u = solve(t)?;
            if cfg.save_fields {
                let base = format!("solve_u{}", i + 1);
                u.save(&out.dir().join(&base))?;
                out.record(&format!("{base}.bin"));
                out.record(&format!("{base}.json"));
            }
            let (lo, hi) = u.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
            let e = l2_energy(&u);
            let rate = energy_rate(&u, cfg.m);
            let mut row = vec![num(t), num(mass(&u)), num(e), num(rate), num(lo), num(hi)];
            if cfg.check_conservation {
                // Centred difference in t with a step proportional to t.
                let h = 1e-3 * t;
                let fd = (l2_energy(&solve(t + h)?) - l2_energy(&solve(t - h)?)) / (2.0 * h);
                let rel = (fd - rate).abs() / rate.abs();
                mass_drift = mass_drift.max((mass(&u) - m0).abs() / abs_mass);
                rate_err = rate_err.max(rel);
                row.extend([num(fd), num(rel), "mass invariance and energy identity".into()]);
            } else {
                row.push("solution summary".into());
            }
            energies.push(e);
            rows.push(row);
        }
        let mut header = vec!["t", "mass", "l2_energy", "energy_rate", "min", "max"];
        if cfg.check_conservation {
            header.extend(["energy_rate_fd", "rate_rel_err"]);
        }
        header.push("check");
        out.table("solve.csv", &header, &rows)?;

        if cfg.check_conservation {
            checks.push(Check::at_most(
                "mass_drift",
                "mass is invariant up to roundoff",
                mass_drift,
                cfg.mass_tol,
            ));
            let increases = energies.windows(2).filter(|w| !(w[1] < w[0])).count();
            checks.push(Check::at_most(
                "energy_increases",
                "the L2 energy strictly decreases",
                increases as f64,
                0.0,
            ));
            checks.push(Check::at_most(
                "energy_rate",
                "dE/dt equals -2 times the energy of the operator",
                rate_err,
                cfg.rate_tol,
            ));
        }
        Ok(())
    })
}
