//! Moments of the stationary profile `v_∞`, their sign pattern, the
//! constants `C_{m,n,β}`, and moment trajectories under the Fokker–Planck flow.

mod trajectory;

pub use trajectory::{trajectory_closed_form, trajectory_fractional, trajectory_ode_integrate, MomentTrajectory};

use crate::kernels::{radial_integral, sphere_measure, KernelProfile, KernelSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// A multi-index `ℓ = (ℓ_1, ..., ℓ_n)`; the degree is the component sum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(components: impl Into<Vec<u32>>) -> Self {
        Self(components.into())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn all_even(&self) -> bool {
        self.0.iter().all(|l| l % 2 == 0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A polynomial `Σ c_ℓ y^ℓ` in `n` variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn monomial(ell: MultiIndex) -> Self {
        Self {
            terms: BTreeMap::from([(ell, 1.0)]),
        }
    }

    /// `Δ P`, dropping terms that cancel exactly.
    pub fn laplacian(&self) -> Self {
        let mut out: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (ell, &c) in &self.terms {
            for i in 0..ell.dim() {
                let l = ell.0[i];
                if l >= 2 {
                    let mut next = ell.clone();
                    next.0[i] -= 2;
                    *out.entry(next).or_insert(0.0) += c * (l * (l - 1)) as f64;
                }
            }
        }
        out.retain(|_, c| *c != 0.0);
        Self { terms: out }
    }
}

/// The stationary profile `v_∞(y) = C_{m,n} f_{m,n}(κ|y|)`, `κ = (2m)^{1/2m}`,
/// normalised to unit mass, with radial samples of `f` for fast evaluation.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub spec: KernelSpec,
    /// `C_{m,n} = κ^n α_{m,n}`.
    pub normalization: f64,
    /// Samples of `f_{m,n}` in the variable `η = κ r`.
    pub samples: KernelProfile,
}

/// Relative accuracy demanded of the mass integral, a decade inside the
/// unit-mass requirement of 1e-8.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Spacing of the kernel samples behind [`StationaryProfile::value`].
pub const PROFILE_STEP: f64 = 0.02;

impl StationaryProfile {
    /// Builds `v_∞` with samples covering `|y| ≤ r_max`.
    pub fn new(spec: &KernelSpec, r_max: f64) -> Result<Self> {
        let kappa = spec.kappa();
        let (i0, err) = radial_integral(spec, spec.n as f64 - 1.0)?;
        if !(err <= NORMALIZATION_TOL * i0.abs()) {
            return Err(Error::Accuracy {
                context: format!("normalisation of v_∞ for m={}, n={}", spec.m, spec.n),
                estimate: err / i0.abs(),
                tolerance: NORMALIZATION_TOL,
            });
        }
        let normalization = kappa.powi(spec.n as i32) / (sphere_measure(spec.n) * i0);
        let samples = KernelProfile::uniform(spec, kappa * r_max + 8.0 * PROFILE_STEP, PROFILE_STEP)?;
        Ok(Self {
            spec: *spec,
            normalization,
            samples,
        })
    }

    /// Largest radius covered by the samples.
    pub fn r_max(&self) -> f64 {
        self.samples.eta_max() / self.spec.kappa()
    }

    /// `v_∞` at radius `r`.
    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.normalization * self.samples.interpolate(self.spec.kappa() * r.abs())?)
    }

    /// `∫ v_∞` by the trapezoid rule on the radial samples with the leading
    /// Euler–Maclaurin end correction.
    pub fn mass_trapezoid(&self) -> f64 {
        let n = self.spec.n as i32;
        let kappa = self.spec.kappa();
        let h = PROFILE_STEP / kappa;
        let g: Vec<f64> = self
            .samples
            .etas
            .iter()
            .zip(&self.samples.values)
            .map(|(&eta, &f)| (eta / kappa).powi(n - 1) * self.normalization * f)
            .collect();
        let last = g.len() - 1;
        let interior: f64 = g[1..last].iter().sum();
        let trap = h * (interior + 0.5 * (g[0] + g[last]));
        // g'(0) = v_∞(0) when n = 2 and vanishes otherwise; g is negligible
        // at the far end.
        let slope0 = if n == 2 {
            self.normalization * self.samples.values[0]
        } else {
            0.0
        };
        sphere_measure(self.spec.n) * (trap + h * h / 12.0 * slope0)
    }
}

/// A moment value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub error: f64,
}

/// `ℳ_b = ∫ |y|^b v_∞ dy = κ^{-b} I(n-1+b) / I(n-1)` for `b > -n`.
pub fn moment_b(spec: &KernelSpec, b: f64) -> Result<MomentValue> {
    let n = spec.n as f64;
    if !(b > -n) {
        return Err(Error::Domain(format!(
            "moment of order b needs b > -n = {} (got {b})",
            -n
        )));
    }
    let (i0, e0) = radial_integral(spec, n - 1.0)?;
    let (ib, eb) = radial_integral(spec, n - 1.0 + b)?;
    let scale = spec.kappa().powf(-b) / i0;
    Ok(MomentValue {
        value: scale * ib,
        error: scale * (eb + ib.abs() * e0 / i0.abs()),
    })
}

/// `∫_{S^{n-1}} ω^ℓ dS = 2 Π Γ((ℓ_i+1)/2) / Γ((|ℓ|+n)/2)` for all-even `ℓ`.
pub fn sphere_monomial_integral(ell: &MultiIndex) -> f64 {
    if !ell.all_even() {
        return 0.0;
    }
    let n = ell.dim() as f64;
    let num: f64 = ell.0.iter().map(|&l| gamma((l as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((ell.degree() as f64 + n) / 2.0)
}

/// `ℳ_{P_ℓ} = ∫ y^ℓ v_∞ dy`. Odd components, and degrees outside `4ℕ`,
/// give exactly zero; otherwise the radial moment of order `|ℓ|` times the
/// angular factor.
pub fn moment_polynomial(spec: &KernelSpec, ell: &MultiIndex) -> Result<MomentValue> {
    if ell.dim() != spec.n as usize {
        return Err(Error::Domain(format!(
            "multi-index {ell} has {} components, expected {}",
            ell.dim(),
            spec.n
        )));
    }
    if !ell.all_even() || ell.degree() % 4 != 0 {
        return Ok(MomentValue { value: 0.0, error: 0.0 });
    }
    let radial = moment_b(spec, ell.degree() as f64)?;
    let factor = sphere_monomial_integral(ell) / sphere_measure(spec.n);
    Ok(MomentValue {
        value: radial.value * factor,
        error: radial.error * factor,
    })
}

/// `∫ P v_∞ dy` for a polynomial `P`.
pub fn moment_of_polynomial(spec: &KernelSpec, p: &Polynomial) -> Result<MomentValue> {
    let mut acc = MomentValue { value: 0.0, error: 0.0 };
    for (ell, &c) in &p.terms {
        let v = moment_polynomial(spec, ell)?;
        acc.value += c * v.value;
        acc.error += (c * v.error).abs();
    }
    Ok(acc)
}

/// Predicted or observed sign of a moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
    Undetermined,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Zero => "zero",
            Sign::Negative => "negative",
            Sign::Undetermined => "undetermined",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Sign::Positive),
            "zero" => Ok(Sign::Zero),
            "negative" => Ok(Sign::Negative),
            "undetermined" => Ok(Sign::Undetermined),
            other => Err(Error::Serialization(format!("unknown sign {other:?}"))),
        }
    }
}

/// A moment weight: `|y|^b` or a monomial `y^ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Radial { b: f64, n: u32 },
    Monomial(MultiIndex),
}

/// Sign of the biharmonic (`m = 2`) moment for the given weight.
///
/// Radial weights: positive on `(-n, 2)` and on `(8k+6, 8k+10)`, zero on
/// `4ℕ+2`, negative on `(8k+2, 8k+6)`; `b ≤ -n` is undetermined. Monomials:
/// zero unless every component is even and the degree lies in `4ℕ`, then
/// positive on `8ℕ` and negative on `8ℕ+4`.
pub fn classify_sign(weight: &Weight) -> Sign {
    match weight {
        Weight::Radial { b, n } => {
            let b = *b;
            if !(b > -(*n as f64)) {
                return Sign::Undetermined;
            }
            if b < 2.0 {
                return Sign::Positive;
            }
            let r = (b - 2.0).rem_euclid(8.0);
            if r == 0.0 || r == 4.0 {
                Sign::Zero
            } else if r < 4.0 {
                Sign::Negative
            } else {
                Sign::Positive
            }
        }
        Weight::Monomial(ell) => {
            let d = ell.degree();
            if !ell.all_even() || d % 4 != 0 {
                Sign::Zero
            } else if d % 8 == 0 {
                Sign::Positive
            } else {
                Sign::Negative
            }
        }
    }
}

/// Sign read off a computed moment: zero when the value is within its
/// error bar.
pub fn observed_sign(m: &MomentValue) -> Sign {
    if m.value.abs() <= m.error {
        Sign::Zero
    } else if m.value > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// `C_{m,n,β} = ω_n ∫_0^∞ η^{n-1-β} f_{m,n}(η) dη` for `0 ≤ β < n`.
pub fn cnm(m: u32, n: u32, beta: f64) -> Result<f64> {
    if !(0.0..n as f64).contains(&beta) {
        return Err(Error::Domain(format!("beta must lie in [0, {n}) (got {beta})")));
    }
    let spec = KernelSpec::new(m, n)?;
    let (i, _) = radial_integral(&spec, n as f64 - 1.0 - beta)?;
    Ok(sphere_measure(n) * i)
}

/// One row of a moment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub b: f64,
    pub value: f64,
    pub err: f64,
    pub sign_predicted: Sign,
    pub sign_observed: Sign,
}

/// Moments `ℳ_b` with predicted and observed signs over a grid of `b`.
pub fn moment_table(spec: &KernelSpec, bs: &[f64]) -> Result<Vec<MomentRow>> {
    bs.iter()
        .map(|&b| {
            let v = moment_b(spec, b)?;
            Ok(MomentRow {
                b,
                value: v.value,
                err: v.error,
                sign_predicted: classify_sign(&Weight::Radial { b, n: spec.n }),
                sign_observed: observed_sign(&v),
            })
        })
        .collect()
}

/// Writes the CSV table `b,value,err,sign_predicted,sign_observed`.
pub fn write_moment_table<W: Write>(rows: &[MomentRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_degree() {
        let l = MultiIndex::new([2, 0, 3]);
        assert_eq!(l.degree(), 5);
        assert!(!l.all_even());
        assert_eq!(l.to_string(), "(2,0,3)");
    }

    #[test]
    fn bilaplacian_of_quartic_monomial() {
        let p = Polynomial::monomial(MultiIndex::new([4, 0]));
        let d2 = p.laplacian().laplacian();
        assert_eq!(d2.terms, BTreeMap::from([(MultiIndex::new([0, 0]), 24.0)]));
        let q = Polynomial::monomial(MultiIndex::new([2, 2])).laplacian().laplacian();
        assert_eq!(q.terms, BTreeMap::from([(MultiIndex::new([0, 0]), 8.0)]));
    }

    #[test]
    fn sphere_integrals_of_monomials() {
        // ∫_{S^1} cos²θ dθ = π and ∫_{S^2} z² dS = 4π/3.
        assert!((sphere_monomial_integral(&MultiIndex::new([2, 0])) - std::f64::consts::PI).abs() < 1e-14);
        let s = sphere_monomial_integral(&MultiIndex::new([0, 0, 2]));
        assert!((s - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
        assert!((sphere_monomial_integral(&MultiIndex::new([0, 0])) - sphere_measure(2)).abs() < 1e-14);
    }

    #[test]
    fn radial_sign_pattern() {
        let s = |b: f64| classify_sign(&Weight::Radial { b, n: 1 });
        assert_eq!(s(-0.5), Sign::Positive);
        assert_eq!(s(-1.0), Sign::Undetermined);
        assert_eq!(s(1.0), Sign::Positive);
        assert_eq!(s(2.0), Sign::Zero);
        assert_eq!(s(4.0), Sign::Negative);
        assert_eq!(s(6.0), Sign::Zero);
        assert_eq!(s(8.0), Sign::Positive);
        assert_eq!(s(10.0), Sign::Zero);
        assert_eq!(s(12.0), Sign::Negative);
        assert_eq!(s(14.0), Sign::Zero);
        assert_eq!(s(16.5), Sign::Positive);
    }

    #[test]
    fn monomial_sign_pattern() {
        let s = |l: &[u32]| classify_sign(&Weight::Monomial(MultiIndex::new(l.to_vec())));
        assert_eq!(s(&[1, 0]), Sign::Zero);
        assert_eq!(s(&[2, 0]), Sign::Zero);
        assert_eq!(s(&[3, 1]), Sign::Zero);
        assert_eq!(s(&[2, 2]), Sign::Negative);
        assert_eq!(s(&[4, 4]), Sign::Positive);
    }

    #[test]
    fn sign_round_trips_through_text() {
        for s in [Sign::Positive, Sign::Zero, Sign::Negative, Sign::Undetermined] {
            assert_eq!(s.to_string().parse::<Sign>().unwrap(), s);
        }
    }

    #[test]
    fn cnm_rejects_out_of_range_beta() {
        assert!(cnm(2, 1, 1.0).is_err());
        assert!(cnm(2, 1, -0.1).is_err());
    }
}
