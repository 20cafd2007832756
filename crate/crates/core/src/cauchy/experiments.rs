//! Positivity experiments: the eventual local positivity scan, the
//! near-diagonal lower bound, the decay plateau of slowly decaying data and
//! the search for negativity within a family of such data.

use super::datum::{GFamily, InitialDatum};
use super::solve_convolution;
use crate::fokker_planck::{GridField, BOUNDARY_TOL};
use crate::kernels::{normalization_constant, KernelProfile, KernelSpec};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Values below `-NEGATIVITY_TOL · max|u|` count as negative; smaller
/// magnitudes are roundoff.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// Largest kernel argument a verification profile needs to cover.
const PROFILE_ETA_CAP: f64 = 64.0;
const PROFILE_STEP: f64 = 0.02;

/// `count ≥ 2` times from `t0` to `t1`, equally spaced in `log t`.
pub fn geometric_times(t0: f64, t1: f64, count: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0) || !(t1 > t0) || !t1.is_finite() || count < 2 {
        return Err(Error::Domain(format!(
            "geometric grid needs 0 < t0 < t1 and at least two points (got {t0}, {t1}, {count})"
        )));
    }
    let ratio = (t1 / t0).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| t0 * (ratio * i as f64).exp()).collect();
    out[count - 1] = t1;
    Ok(out)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("time list is empty".into()));
    }
    if times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "times must be positive, finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn in_cube(x: &[f64], half_width: f64) -> bool {
    x.iter().all(|c| c.abs() <= half_width + 1e-12)
}

fn region_half_width(datum: &InitialDatum) -> f64 {
    if datum.is_continued() {
        0.5 * datum.field.half_width
    } else {
        datum.field.half_width
    }
}

/// Flat index of the grid point at the origin.
fn origin_index(u: &GridField) -> usize {
    let half = u.size / 2;
    (0..u.n as usize).fold(0, |acc, _| acc * u.size + half)
}

/// Minimum over the points of `u` inside the cube of half-width `h`, with
/// its location; ties go to the first point in storage order.
fn min_in_cube(u: &GridField, points: &[Vec<f64>], h: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, (x, &v)) in points.iter().zip(&u.values).enumerate() {
        if v < best.0 && in_cube(x, h) {
            best = (v, i);
        }
    }
    best
}

/// One scanned time of a positivity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityRow {
    pub t: f64,
    /// Minimum over the compact window `K`.
    pub min_on_k: f64,
    /// Minimum over the admissible region of the box.
    pub global_min: f64,
    pub argmin: Vec<f64>,
    pub argmin_radius: f64,
    /// Fraction of region points where `u < -NEGATIVITY_TOL · max|u|`.
    pub negative_fraction: f64,
    pub max_abs: f64,
}

impl PositivityRow {
    fn threshold(&self) -> f64 {
        NEGATIVITY_TOL * self.max_abs
    }

    pub fn positive_on_k(&self) -> bool {
        self.min_on_k > self.threshold()
    }

    pub fn negative_somewhere(&self) -> bool {
        self.global_min < -self.threshold()
    }
}

/// Result of [`positivity_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub m: u32,
    pub n: u32,
    pub k_half_width: f64,
    /// Half-width of the cube over which the global minimum is taken.
    pub region_half_width: f64,
    pub rows: Vec<PositivityRow>,
    /// First scanned time after which `u > 0` on `K` at every later
    /// scanned time.
    pub onset_time: Option<f64>,
}

impl PositivityReport {
    pub fn negative_at_every_time(&self) -> bool {
        self.rows.iter().all(PositivityRow::negative_somewhere)
    }

    pub fn nonnegative_everywhere(&self) -> bool {
        !self.rows.iter().any(PositivityRow::negative_somewhere)
    }

    /// Whether `|x_t|` of the global minimum is nondecreasing from the onset
    /// time on; `false` without an onset.
    pub fn minimum_drifts_outward(&self) -> bool {
        let Some(onset) = self.onset_time else {
            return false;
        };
        let radii: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t >= onset)
            .map(|r| r.argmin_radius)
            .collect();
        radii.windows(2).all(|w| w[1] >= w[0])
    }

    /// CSV `t,min_on_k,global_min,argmin_radius,negative_fraction`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "min_on_k", "global_min", "argmin_radius", "negative_fraction"])?;
        for r in &self.rows {
            out.write_record([
                format!("{:e}", r.t),
                format!("{:e}", r.min_on_k),
                format!("{:e}", r.global_min),
                format!("{:e}", r.argmin_radius),
                format!("{:e}", r.negative_fraction),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves from `datum` at each of `times` and records the minimum over the
/// window `K = [-k, k]^n`, the global minimum and where it sits. For
/// continued data the global minimum is taken over the inner half of the
/// box; otherwise the solution must stay negligible on the faces.
pub fn positivity_scan(datum: &InitialDatum, times: &[f64], k_half_width: f64, m: u32) -> Result<PositivityReport> {
    check_times(times)?;
    let region = region_half_width(datum);
    if !(k_half_width > 0.0) || k_half_width > region {
        return Err(Error::Domain(format!(
            "window half-width must lie in (0, {region}] (got {k_half_width})"
        )));
    }
    let points = datum.field.points();
    let rows = times
        .par_iter()
        .map(|&t| {
            let u = datum.solve(t, m)?;
            if !datum.is_continued() {
                u.check_boundary(
                    BOUNDARY_TOL,
                    &format!("solution at t = {t} on the faces; the box is too small to contain the negative front"),
                )?;
            }
            let (min_on_k, _) = min_in_cube(&u, &points, k_half_width);
            let (global_min, at) = min_in_cube(&u, &points, region);
            let max_abs = u.max_abs();
            let inside: Vec<f64> = points
                .iter()
                .zip(&u.values)
                .filter(|(x, _)| in_cube(x, region))
                .map(|(_, v)| *v)
                .collect();
            let negative = inside.iter().filter(|v| **v < -NEGATIVITY_TOL * max_abs).count();
            let argmin = points[at].clone();
            Ok(PositivityRow {
                t,
                min_on_k,
                global_min,
                argmin_radius: argmin.iter().map(|c| c * c).sum::<f64>().sqrt(),
                argmin,
                negative_fraction: negative as f64 / inside.len() as f64,
                max_abs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first_positive_tail = rows.iter().rposition(|r| !r.positive_on_k()).map_or(0, |i| i + 1);
    Ok(PositivityReport {
        m,
        n: datum.field.n,
        k_half_width,
        region_half_width: region,
        onset_time: rows.get(first_positive_tail).map(|r| r.t),
        rows,
    })
}

/// Constants of the near-diagonal bound `K(t, x, y) ≥ c1 t^{-n/2m}` for
/// `|x - y|^{2m} ≤ c2 t`, read off the self-similar profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearDiagonal {
    pub m: u32,
    pub n: u32,
    pub c1: f64,
    pub c2: f64,
    /// Radius `η_c = c2^{1/2m}` of the certified interval.
    pub eta_c: f64,
    pub first_root: Option<f64>,
    /// Whether `η_c` was capped by the sampled range instead of a root.
    pub capped: bool,
}

/// Takes `η_c = safety · (first root of f)`, or the last positive sample
/// when no root is sampled, and returns `c2 = η_c^{2m}` with
/// `c1 = α · min_{η ≤ η_c} f(η)` over the samples and the endpoint.
pub fn near_diagonal_check(profile: &KernelProfile, safety: f64) -> Result<NearDiagonal> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::Domain(format!(
            "safety factor must lie in (0, 1) (got {safety})"
        )));
    }
    if profile.is_empty() || profile.etas[0] != 0.0 || !(profile.values[0] > 0.0) {
        return Err(Error::Domain(
            "profile must start at eta = 0 with a positive value".into(),
        ));
    }
    let spec = profile.spec;
    let first_nonpositive = profile.values.iter().position(|v| *v <= 0.0);
    let (eta_c, first_root, capped) = match first_nonpositive {
        Some(i) => {
            let (mut lo, mut hi) = (profile.etas[i - 1], profile.etas[i]);
            while hi - lo > 1e-12 * hi {
                let mid = 0.5 * (lo + hi);
                if profile.interpolate(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            (safety * root, Some(root), false)
        }
        None => (profile.eta_max(), None, true),
    };
    let inner_min = profile
        .etas
        .iter()
        .zip(&profile.values)
        .filter(|(e, _)| **e <= eta_c)
        .fold(f64::INFINITY, |acc, (_, v)| acc.min(*v));
    let lower = inner_min.min(profile.interpolate(eta_c)?);
    if !(lower > 0.0) {
        return Err(Error::Degenerate(format!("profile is not positive on [0, {eta_c}]")));
    }
    Ok(NearDiagonal {
        m: spec.m,
        n: spec.n,
        c1: normalization_constant(&spec)? * lower,
        c2: eta_c.powi(2 * spec.m as i32),
        eta_c,
        first_root,
        capped,
    })
}

/// Which scaling of `u` tends to a finite positive limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayCase {
    /// `β < n`: `t^{β/2m} u`.
    Plateau,
    /// `β = n`, constant `g`: `t^{n/2m} u / log t`.
    LogCritical,
    /// `β > n`: `t^{n/2m} u`.
    Integrable,
    /// `β = n`, nonconstant `g`: `t^{β/2m} u`, expected to grow without bound.
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    /// Scaled value at the origin.
    pub centre: f64,
    pub min_on_k: f64,
    pub max_on_k: f64,
}

/// Scaled solution values from [`decay_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrajectory {
    pub m: u32,
    pub n: u32,
    pub beta: f64,
    pub case: DecayCase,
    pub k_half_width: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayTrajectory {
    /// `(max - min) / |last|` of the scaled centre value over the scanned
    /// times in `[t_last / 10, t_last]`; `None` with fewer than two such
    /// times.
    pub fn final_decade_drift(&self) -> Option<f64> {
        let last = self.rows.last()?;
        let decade: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t >= last.t / 10.0 * (1.0 - 1e-12))
            .map(|r| r.centre)
            .collect();
        if decade.len() < 2 {
            return None;
        }
        let hi = decade.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = decade.iter().copied().fold(f64::INFINITY, f64::min);
        Some((hi - lo) / last.centre.abs())
    }

    /// `(max - min) / |centre|` of the scaled value over `K` at each time.
    pub fn spreads(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| (r.max_on_k - r.min_on_k) / r.centre.abs())
            .collect()
    }

    /// CSV `t,scaled_centre,scaled_min_on_k,scaled_max_on_k`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "scaled_centre", "scaled_min_on_k", "scaled_max_on_k"])?;
        for r in &self.rows {
            out.write_record([
                format!("{:e}", r.t),
                format!("{:e}", r.centre),
                format!("{:e}", r.min_on_k),
                format!("{:e}", r.max_on_k),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves from a datum decaying like `|x|^{-β}` and rescales `u` on the
/// window `K = [-k, k]^n` by the power of `t` (and `log t`) that the decay
/// case calls for.
pub fn decay_experiment(datum: &InitialDatum, times: &[f64], k_half_width: f64, m: u32) -> Result<DecayTrajectory> {
    check_times(times)?;
    let beta = datum
        .beta()
        .ok_or_else(|| Error::Domain("decay experiments need a datum with a power tail".into()))?;
    let n = datum.field.n;
    let constant_g = match datum.kind {
        super::DatumKind::InversePower { g, .. } => g.is_constant(),
        _ => true,
    };
    let nf = n as f64;
    let case = if beta < nf {
        DecayCase::Plateau
    } else if beta > nf {
        DecayCase::Integrable
    } else if constant_g {
        DecayCase::LogCritical
    } else {
        DecayCase::Divergent
    };
    if case == DecayCase::LogCritical && times[0] <= 1.0 {
        return Err(Error::Domain("the logarithmic scaling needs every time > 1".into()));
    }
    let region = region_half_width(datum);
    if !(k_half_width > 0.0) || k_half_width > region {
        return Err(Error::Domain(format!(
            "window half-width must lie in (0, {region}] (got {k_half_width})"
        )));
    }
    let two_m = 2.0 * m as f64;
    let scale = |t: f64| match case {
        DecayCase::Plateau | DecayCase::Divergent => t.powf(beta / two_m),
        DecayCase::Integrable => t.powf(nf / two_m),
        DecayCase::LogCritical => t.powf(nf / two_m) / t.ln(),
    };
    let points = datum.field.points();
    let centre = origin_index(&datum.field);
    let rows = times
        .par_iter()
        .map(|&t| {
            let u = datum.solve(t, m)?;
            let s = scale(t);
            let on_k = points.iter().zip(&u.values).filter(|(x, _)| in_cube(x, k_half_width));
            let (lo, hi) = on_k.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
                (lo.min(*v), hi.max(*v))
            });
            Ok(DecayRow {
                t,
                centre: s * u.values[centre],
                min_on_k: s * lo,
                max_on_k: s * hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayTrajectory {
        m,
        n,
        beta,
        case,
        k_half_width,
        rows,
    })
}

/// Settings of [`negativity_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m: u32,
    pub n: u32,
    pub size: usize,
    pub half_width: f64,
    pub beta: f64,
    /// Horizon `T`; times are scanned geometrically on `[T/1000, T]`.
    pub horizon: f64,
    pub time_count: usize,
    /// Random candidates drawn after the fixed seeds.
    pub random_candidates: usize,
    pub seed: u64,
}

/// A datum `1 / (g + |x|^β)` whose solution is negative at `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub g: GFamily,
    pub t: f64,
    pub x: Vec<f64>,
    pub value: f64,
    /// Value from the convolution solver at twice the resolution.
    pub verified_value: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativitySearch {
    pub config: SearchConfig,
    pub candidates_tried: usize,
    /// `None` when the family is exhausted without negativity.
    pub witness: Option<Witness>,
}

/// The fixed seeds `g = 1 + A · bump(|x| / w)` with large `A` first,
/// followed by seeded random draws of `log10 A ∈ [0, 3]`,
/// `log10 w ∈ [-0.5, 0.5]`.
fn candidates(config: &SearchConfig) -> Vec<GFamily> {
    let fixed = [(1e3, 1.0), (1e2, 1.0), (1e3, 0.5), (10.0, 1.0)];
    let mut out: Vec<GFamily> = fixed
        .iter()
        .map(|&(amplitude, width)| GFamily {
            base: 1.0,
            amplitude,
            width,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_candidates {
        let a: f64 = rng.gen_range(0.0..3.0);
        let w: f64 = rng.gen_range(-0.5..0.5);
        out.push(GFamily {
            base: 1.0,
            amplitude: 10f64.powf(a),
            width: 10f64.powf(w),
        });
    }
    out
}

/// Scans candidate `g` in order and returns the first whose solution turns
/// negative on the inner half of the box at a scanned time. A witness is
/// re-evaluated by the convolution solver on the datum sampled at twice
/// the resolution.
pub fn negativity_search(config: &SearchConfig) -> Result<NegativitySearch> {
    let nf = config.n as f64;
    if !(config.beta > 0.0 && config.beta < nf) {
        return Err(Error::Domain(format!("β must lie in (0, n) (got {})", config.beta)));
    }
    if !(config.horizon > 1.0) || !config.horizon.is_finite() {
        return Err(Error::Domain(format!("horizon must exceed 1 (got {})", config.horizon)));
    }
    let times = geometric_times(config.horizon * 1e-3, config.horizon, config.time_count)?;
    let region = 0.5 * config.half_width;
    let family = candidates(config);
    for (tried, g) in family.iter().enumerate() {
        let datum = InitialDatum::inverse_power(config.n, config.size, config.half_width, *g, config.beta)?;
        let points = datum.field.points();
        let hits = times
            .par_iter()
            .map(|&t| {
                let u = datum.solve(t, config.m)?;
                let (value, at) = min_in_cube(&u, &points, region);
                let max = u.max_abs();
                Ok((value < -NEGATIVITY_TOL * max).then_some((t, at, value)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((t, at, value)) = hits.into_iter().flatten().next() {
            let verified_value = verify_at_double_resolution(&datum, t, at, config.m)?;
            return Ok(NegativitySearch {
                config: config.clone(),
                candidates_tried: tried + 1,
                witness: Some(Witness {
                    g: *g,
                    t,
                    x: points[at].clone(),
                    value,
                    verified_value,
                    verified: verified_value < -NEGATIVITY_TOL * datum.field.max_abs(),
                }),
            });
        }
    }
    Ok(NegativitySearch {
        config: config.clone(),
        candidates_tried: family.len(),
        witness: None,
    })
}

fn verify_at_double_resolution(datum: &InitialDatum, t: f64, at: usize, m: u32) -> Result<f64> {
    let fine = datum.resampled(2 * datum.field.size)?;
    let spec = KernelSpec::new(m, fine.field.n)?;
    let scale = t.powf(1.0 / (2.0 * m as f64));
    let eta_max = (fine.field.half_width / scale).min(PROFILE_ETA_CAP);
    let profile = KernelProfile::uniform(&spec, eta_max, PROFILE_STEP)?;
    let u = solve_convolution(&fine.field, t, &profile)?;
    let n = datum.field.n as usize;
    let mut idx = vec![0usize; n];
    datum.field.grid().unflatten(at, &mut idx);
    let flat = idx.iter().fold(0, |acc, &i| acc * fine.field.size + 2 * i);
    Ok(u.values[flat])
}
