//! `positivity`: sign scans of the solution, the decay plateau of slowly
//! decaying data and the seeded search for negativity.

use super::{execute, usage, validate_grid, DatumChoice, DatumParams};
use crate::config::TimeGrid;
use crate::report::Check;
use crate::{CliError, Common, Context};
use clap::Args;
use polyheat::cauchy::{
    decay_experiment, negativity_search, positivity_scan, DecayCase, DecayTrajectory, SearchConfig,
};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct PositivityArgs {
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
    /// g = base + amplitude · bump(|x| / width) in 1 / (g + |x|^β).
    #[arg(long)]
    g_base: Option<f64>,
    #[arg(long)]
    g_amplitude: Option<f64>,
    #[arg(long)]
    g_width: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    size: Option<usize>,
    /// Half-width L of the box [-L, L)^n.
    #[arg(long)]
    half_width: Option<f64>,
    /// Half-width of the compact window K = [-k, k]^n.
    #[arg(long)]
    window: Option<f64>,
    /// Times as t1,t2,... or geometric:t0:t1:count.
    #[arg(long)]
    times: Option<TimeGrid>,
    /// Largest drift of the scaled solution over the final decade.
    #[arg(long)]
    drift_tol: Option<f64>,
    /// Search the family 1 / (g + |x|^β) for a negative solution.
    #[arg(long)]
    search: bool,
    /// Horizon T of the search; times run geometrically over [T/1000, T].
    #[arg(long)]
    horizon: Option<f64>,
    /// Times scanned per search candidate.
    #[arg(long)]
    time_count: Option<usize>,
    /// Random candidates drawn after the fixed ones.
    #[arg(long)]
    random_candidates: Option<usize>,
    /// Points per axis of the search.
    #[arg(long)]
    search_size: Option<usize>,
    /// Half-width of the search box.
    #[arg(long)]
    search_half_width: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PositivityConfig {
    command: &'static str,
    m: u32,
    n: u32,
    #[serde(flatten)]
    datum: DatumParams,
    size: usize,
    half_width: f64,
    window: f64,
    times: String,
    drift_tol: f64,
    search: Option<SearchConfig>,
    #[serde(flatten)]
    common: Common,
}

/// Box giving a localized datum room to spread and a power datum a long
/// continued tail, per dimension.
fn default_box(datum: DatumChoice, n: u32) -> (usize, f64) {
    match (datum.is_localized(), n) {
        (true, 1) => (4096, 128.0),
        (false, 1) => (8192, 256.0),
        (true, 2) => (512, 128.0),
        (false, 2) => (512, 256.0),
        (true, _) => (64, 32.0),
        (false, _) => (64, 64.0),
    }
}

pub fn run(a: PositivityArgs, ctx: &Context) -> Result<bool, CliError> {
    let s = &ctx.settings;
    let m = s.value("m", a.m, 2)?;
    let n = s.value("n", a.n, 1)?;
    let choice = s.value("datum", a.datum, DatumChoice::Bump)?;
    let (size, half_width) = default_box(choice, n);
    let default_times = if choice.is_localized() {
        TimeGrid::Geometric {
            t0: 0.01,
            t1: 100.0,
            count: 25,
        }
    } else {
        TimeGrid::Geometric {
            t0: 0.1,
            t1: 100.0,
            count: 20,
        }
    };
    let times = s.value("times", a.times, default_times)?;
    let datum = DatumParams {
        datum: choice,
        radius: s.value("radius", a.radius, 1.0)?,
        height: s.value("height", a.height, 1.0)?,
        beta: s.value("beta", a.beta, 0.5)?,
        g_base: s.value("g-base", a.g_base, 1.0)?,
        g_amplitude: s.value("g-amplitude", a.g_amplitude, 0.0)?,
        g_width: s.value("g-width", a.g_width, 1.0)?,
    };
    let search = if s.switch("search", a.search)? {
        Some(SearchConfig {
            m,
            n,
            size: s.value("search-size", a.search_size, 512)?,
            half_width: s.value("search-half-width", a.search_half_width, 64.0)?,
            beta: datum.beta,
            horizon: s.value("horizon", a.horizon, 2.0)?,
            time_count: s.value("time-count", a.time_count, 12)?,
            random_candidates: s.value("random-candidates", a.random_candidates, 4)?,
            seed: ctx.common.seed,
        })
    } else {
        None
    };
    let cfg = PositivityConfig {
        command: "positivity",
        m,
        n,
        datum,
        size: s.value("size", a.size, size)?,
        half_width: s.value("half-width", a.half_width, half_width)?,
        window: s.value("window", a.window, 2.0)?,
        times: times.to_string(),
        drift_tol: s.value("drift-tol", a.drift_tol, 0.02)?,
        search,
        common: ctx.common.clone(),
    };
    validate_grid(cfg.n, cfg.size, cfg.half_width)?;
    if cfg.m == 0 {
        return Err(usage("m must be at least 1"));
    }
    if let Some(sc) = &cfg.search {
        validate_grid(sc.n, sc.size, sc.half_width)?;
    }
    let times = times.points()?;
    let initial = cfg.datum.build(cfg.n, cfg.size, cfg.half_width)?;

    execute(ctx, "positivity", &cfg, |out, checks| {
        let scan = positivity_scan(&initial, &times, cfg.window, cfg.m).map_err(super::domain_as_usage)?;
        let mut buf = Vec::new();
        scan.write_csv(&mut buf)?;
        out.extended("positivity_scan.csv", &buf, &["positive_on_k", "check"], |i| {
            vec![
                scan.rows[i].positive_on_k().to_string(),
                "sign of the solution on K and on the box".into(),
            ]
        })?;
        out.json("positivity_scan.json", &scan)?;
        if initial.beta().is_none() {
            if cfg.m >= 2 {
                checks.push(Check::holds(
                    "onset",
                    "the solution becomes positive on K after a finite time",
                    scan.onset_time.is_some(),
                ));
                checks.push(Check::holds(
                    "persistent_negativity",
                    "the global minimum is negative at every scanned time",
                    scan.negative_at_every_time(),
                ));
                checks.push(Check::holds(
                    "outward_drift",
                    "the global minimum drifts outward after the onset",
                    scan.minimum_drifts_outward(),
                ));
            } else {
                checks.push(Check::holds(
                    "second_order_positivity",
                    "the second-order solution stays nonnegative",
                    scan.nonnegative_everywhere(),
                ));
            }
        } else {
            let decay = decay_experiment(&initial, &times, cfg.window, cfg.m).map_err(super::domain_as_usage)?;
            let mut buf = Vec::new();
            decay.write_csv(&mut buf)?;
            out.extended("positivity_decay.csv", &buf, &["check"], |_| {
                vec!["scaled solution approaches a plateau".into()]
            })?;
            out.json("positivity_decay.json", &decay)?;
            if decay.case != DecayCase::Divergent {
                decay_checks(&decay, cfg.drift_tol, checks);
            }
        }

        if let Some(sc) = &cfg.search {
            let found = negativity_search(sc).map_err(super::domain_as_usage)?;
            out.json("positivity_search.json", &found)?;
            if let Some(w) = &found.witness {
                checks.push(Check::holds(
                    "witness_verified",
                    "a negative value survives the independent convolution solver",
                    w.verified,
                ));
            }
        }
        Ok(())
    })
}

/// Final-decade drift of the scaled centre value, and of the scaled values
/// over the whole window.
fn decay_checks(decay: &DecayTrajectory, tol: f64, checks: &mut Vec<Check>) {
    let drift = decay.final_decade_drift().unwrap_or(f64::INFINITY);
    checks.push(Check::at_most(
        "plateau_drift",
        "the scaled centre value drifts little over the final decade",
        drift,
        tol,
    ));
    checks.push(Check::at_most(
        "plateau_drift_on_k",
        "the scaled solution drifts little over the final decade, uniformly on K",
        uniform_drift(decay).unwrap_or(f64::INFINITY),
        tol,
    ));
}

/// `(max - min) / |centre|` of the scaled values on `K` over the times in
/// the final decade.
pub fn uniform_drift(decay: &DecayTrajectory) -> Option<f64> {
    let last = decay.rows.last()?;
    let decade: Vec<_> = decay
        .rows
        .iter()
        .filter(|r| r.t >= last.t / 10.0 * (1.0 - 1e-12))
        .collect();
    if decade.len() < 2 {
        return None;
    }
    let hi = decade.iter().map(|r| r.max_on_k).fold(f64::NEG_INFINITY, f64::max);
    let lo = decade.iter().map(|r| r.min_on_k).fold(f64::INFINITY, f64::min);
    Some((hi - lo) / last.centre.abs())
}
