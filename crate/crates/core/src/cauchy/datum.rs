//! Initial data for the Cauchy problem, sampled on a periodic box.

use super::{solve_fourier, solve_fourier_periodic};
use crate::fokker_planck::{Frame, GridField, BOUNDARY_TOL};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smooth bump `exp(1 - 1/(1 - s²))` on `|s| < 1`, zero outside; equals 1
/// at the origin.
pub fn bump(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// `g(x) = base + amplitude · bump(|x| / width)`, a family inside `C_β`:
/// `g ≥ 0`, `g(0) > 0` and `g = o(|x|^β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFamily {
    pub base: f64,
    pub amplitude: f64,
    pub width: f64,
}

impl GFamily {
    /// `g ≡ 1`.
    pub fn one() -> Self {
        Self {
            base: 1.0,
            amplitude: 0.0,
            width: 1.0,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.base + self.amplitude * bump(r / self.width)
    }

    pub fn is_constant(&self) -> bool {
        self.amplitude == 0.0
    }

    /// Checks membership in `C_β`. A bounded `g` is `o(|x|^β)` for `β > 0`;
    /// for `β = 0` it must vanish at infinity, so the base must be zero.
    pub fn validate(&self, beta: f64) -> Result<()> {
        let finite = self.base.is_finite() && self.amplitude.is_finite() && self.width.is_finite();
        if !finite || self.base < 0.0 || self.amplitude < 0.0 || !(self.width > 0.0) {
            return Err(Error::Domain(format!(
                "g needs base ≥ 0, amplitude ≥ 0, width > 0 (got {self:?})"
            )));
        }
        if !(self.eval(0.0) > 0.0) {
            return Err(Error::Domain("g must be positive at the origin".into()));
        }
        if beta == 0.0 && self.base != 0.0 {
            return Err(Error::Domain("for β = 0, g = o(1) forces base = 0".into()));
        }
        Ok(())
    }
}

/// Kind and parameters of an initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumKind {
    /// `height · bump(|x| / radius)`.
    CompactBump {
        radius: f64,
        height: f64,
    },
    /// `1 / (g(x) + |x|^β)`.
    InversePower {
        g: GFamily,
        beta: f64,
    },
    /// `|x|^{-β}`, mollified at the origin.
    PurePower {
        beta: f64,
    },
    Constant {
        value: f64,
    },
    Custom,
}

/// A datum with its samples in the parabolic frame at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub kind: DatumKind,
    pub field: GridField,
}

/// Odd coordinate map equal to `x` on `|x| ≤ L/2`, blending smoothly into
/// `(2L/π) sin(πx/2L)` by `|x| = 3L/4`. Its square is smooth and
/// `2L`-periodic, so radial functions of it continue smoothly across the
/// faces.
fn periodic_coordinate(x: f64, half_width: f64) -> f64 {
    let h = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let s = ((x.abs() - 0.5 * half_width) / (0.25 * half_width)).clamp(0.0, 1.0);
    let step = h(s) / (h(s) + h(1.0 - s));
    let wrapped = 2.0 * half_width / PI * (PI * x / (2.0 * half_width)).sin();
    (1.0 - step) * x + step * wrapped
}

fn continued_radius(x: &[f64], half_width: f64) -> f64 {
    x.iter()
        .map(|&c| periodic_coordinate(c, half_width).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_box(n: u32, size: usize, half_width: f64) -> Result<()> {
    GridField::new(n, size, half_width, Frame::Parabolic, 0.0, vec![0.0; size.pow(n)]).map(|_| ())
}

impl InitialDatum {
    pub fn compact_bump(n: u32, size: usize, half_width: f64, radius: f64, height: f64) -> Result<Self> {
        if !(radius > 0.0) || !(radius < half_width) || !height.is_finite() {
            return Err(Error::Domain(format!(
                "bump needs 0 < radius < L and finite height (got radius {radius}, height {height})"
            )));
        }
        let field = GridField::from_fn(n, size, half_width, Frame::Parabolic, 0.0, |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            height * bump(r / radius)
        })?;
        Ok(Self {
            kind: DatumKind::CompactBump { radius, height },
            field,
        })
    }

    /// `1 / (g(x) + |x|^β)` with `|x|` replaced by its smooth periodic
    /// continuation outside the inner half of the box. The datum is
    /// bounded since `g(0) > 0`, so it is sampled as is.
    pub fn inverse_power(n: u32, size: usize, half_width: f64, g: GFamily, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("β must be finite and ≥ 0 (got {beta})")));
        }
        g.validate(beta)?;
        check_box(n, size, half_width)?;
        let field = GridField::from_fn(n, size, half_width, Frame::Parabolic, 0.0, |x| {
            let r = continued_radius(x, half_width);
            1.0 / (g.eval(r) + r.powf(beta))
        })?;
        Ok(Self {
            kind: DatumKind::InversePower { g, beta },
            field,
        })
    }

    /// `|x|^{-β}` with the continuation of [`InitialDatum::inverse_power`],
    /// mollified as `(|x|² + ε²)^{-β/2}` with `ε = 2Δx`.
    pub fn pure_power(n: u32, size: usize, half_width: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("β must be finite and > 0 (got {beta})")));
        }
        check_box(n, size, half_width)?;
        let eps = 2.0 * 2.0 * half_width / size as f64;
        let field = GridField::from_fn(n, size, half_width, Frame::Parabolic, 0.0, |x| {
            let r = continued_radius(x, half_width);
            (r * r + eps * eps).powf(-0.5 * beta)
        })?;
        Ok(Self {
            kind: DatumKind::PurePower { beta },
            field,
        })
    }

    pub fn constant(n: u32, size: usize, half_width: f64, value: f64) -> Result<Self> {
        let field = GridField::from_fn(n, size, half_width, Frame::Parabolic, 0.0, |_| value)?;
        Ok(Self {
            kind: DatumKind::Constant { value },
            field,
        })
    }

    pub fn custom(field: GridField) -> Result<Self> {
        if field.frame != Frame::Parabolic {
            return Err(Error::Domain("initial data live in the parabolic frame".into()));
        }
        Ok(Self {
            kind: DatumKind::Custom,
            field: GridField { time: 0.0, ..field },
        })
    }

    /// Whether the datum is continued periodically rather than negligible
    /// on the faces; conclusions then hold on the inner half of the box.
    pub fn is_continued(&self) -> bool {
        matches!(
            self.kind,
            DatumKind::InversePower { .. } | DatumKind::PurePower { .. } | DatumKind::Constant { .. }
        )
    }

    /// Decay exponent `β` at infinity: 0 for constants, `None` for compact
    /// and custom data.
    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            DatumKind::InversePower { beta, .. } | DatumKind::PurePower { beta } => Some(beta),
            DatumKind::Constant { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Whether `∫ |x|^b |u0|` is finite on `ℝ^n`. Power data decay like
    /// `|x|^{-β}`, so the moment is finite iff `β > n + b`.
    pub fn has_finite_moment(&self, b: f64) -> bool {
        match (&self.kind, self.beta()) {
            (DatumKind::Constant { value }, _) => *value == 0.0,
            (_, Some(beta)) => beta > self.field.n as f64 + b,
            _ => true,
        }
    }

    /// `u(·, t)`: the periodic solve for continued data, otherwise the
    /// solve with the face check.
    pub fn solve(&self, t: f64, m: u32) -> Result<GridField> {
        if self.is_continued() {
            solve_fourier_periodic(&self.field, t, m)
        } else {
            self.field
                .check_boundary(BOUNDARY_TOL, "initial datum on the box faces")?;
            solve_fourier(&self.field, t, m)
        }
    }

    /// The same datum sampled with `size` points per axis.
    pub fn resampled(&self, size: usize) -> Result<Self> {
        let (n, l) = (self.field.n, self.field.half_width);
        match self.kind {
            DatumKind::CompactBump { radius, height } => Self::compact_bump(n, size, l, radius, height),
            DatumKind::InversePower { g, beta } => Self::inverse_power(n, size, l, g, beta),
            DatumKind::PurePower { beta } => Self::pure_power(n, size, l, beta),
            DatumKind::Constant { value } => Self::constant(n, size, l, value),
            DatumKind::Custom => Err(Error::Domain("custom samples cannot be resampled".into())),
        }
    }
}
