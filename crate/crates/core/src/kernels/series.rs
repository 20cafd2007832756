//! Alternating power series of `f_{m,n}` about the origin.

use super::KernelSpec;
use crate::numerics::CompensatedSum;
use crate::{Error, Result};
use statrs::function::gamma::{gamma, ln_gamma};

const MAX_TERMS: usize = 4000;

/// Value of `f_{m,n}(0) = 2^{(2-n)/2} Γ(n/2m) / (2m Γ(n/2))`.
pub fn value_at_origin(m: u32, n: u32) -> f64 {
    let (m, n) = (m as f64, n as f64);
    2f64.powf(1.0 - 0.5 * n) * gamma(n / (2.0 * m)) / (2.0 * m * gamma(0.5 * n))
}

/// Sum of `Σ_k (-1)^k η^{2k} Γ((2k+n)/2m) / (2m 2^{2k+n/2-1} k! Γ(k+n/2))`
/// together with the largest term magnitude (a cancellation indicator).
///
/// Consecutive terms with equal residue of `k mod m` are linked by
/// `Γ(x+1) = x Γ(x)`, so only the first `m` terms touch the gamma function.
pub(crate) fn power_series(m: u32, n: u32, eta: f64, tol: f64) -> Result<(f64, f64)> {
    let mf = m as f64;
    let half_n = 0.5 * n as f64;
    let ln_eta = if eta > 0.0 { eta.ln() } else { f64::NEG_INFINITY };
    let seed = |k: usize| -> f64 {
        let k_f = k as f64;
        if k > 0 && eta == 0.0 {
            return 0.0;
        }
        let ln_mag = 2.0 * k_f * ln_eta + ln_gamma((2.0 * k_f + n as f64) / (2.0 * mf))
            - (2.0 * mf).ln()
            - (2.0 * k_f + half_n - 1.0) * std::f64::consts::LN_2
            - ln_gamma(k_f + 1.0)
            - ln_gamma(k_f + half_n);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 {
            value_at_origin(m, n)
        } else {
            sign * ln_mag.exp()
        }
    };
    let mut terms: Vec<f64> = (0..m as usize).map(seed).collect();
    let mut sum = CompensatedSum::new();
    let mut largest = 0.0f64;
    let eta2m = eta.powi(2 * m as i32);
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    for k in 0..MAX_TERMS {
        let t = if k < m as usize {
            terms[k]
        } else {
            let j = k - m as usize;
            let prev = terms[j % m as usize];
            let jf = j as f64;
            let mut ratio = sign_m * eta2m * ((2.0 * jf + n as f64) / (2.0 * mf)) / 4f64.powi(m as i32);
            for i in 1..=m {
                ratio /= (jf + i as f64) * (jf + (i - 1) as f64 + half_n);
            }
            let t = prev * ratio;
            terms[j % m as usize] = t;
            t
        };
        sum.add(t);
        largest = largest.max(t.abs());
        // Terms decay monotonically once k exceeds the peak index.
        let past_peak = (k as f64) > eta * eta;
        if k >= m as usize && past_peak && t.abs() < tol && terms.iter().all(|x| x.abs() < tol) {
            return Ok((sum.value(), largest));
        }
        if eta == 0.0 {
            return Ok((sum.value(), largest));
        }
    }
    Err(Error::Accuracy {
        context: format!("power series at eta={eta}"),
        estimate: terms.iter().fold(0.0, |a, x| a.max(x.abs())),
        tolerance: tol,
    })
}

/// `f_{2,n}(η)` from its alternating power series.
pub fn eval_series(spec: &KernelSpec, eta: f64) -> Result<f64> {
    eval_series_with_error(spec, eta).map(|(v, _)| v)
}

/// [`eval_series`] with an error estimate covering truncation and the
/// rounding of the largest term.
pub fn eval_series_with_error(spec: &KernelSpec, eta: f64) -> Result<(f64, f64)> {
    if spec.m != 2 {
        return Err(Error::Domain(format!(
            "power series is implemented for m = 2 only (got m = {})",
            spec.m
        )));
    }
    if !(eta >= 0.0) || eta > spec.eta_switch {
        return Err(Error::Domain(format!(
            "series requires 0 ≤ eta ≤ {} (got {eta})",
            spec.eta_switch
        )));
    }
    let tol = spec.abs_tol / 10.0;
    let (v, largest) = power_series(spec.m, spec.n, eta, tol)?;
    Ok((v, tol + 4.0 * f64::EPSILON * largest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_values() {
        let s2 = KernelSpec::new(2, 2).unwrap();
        assert!((eval_series(&s2, 0.0).unwrap() - PI.sqrt() / 4.0).abs() < 1e-15);
        let s1 = KernelSpec::new(2, 1).unwrap();
        let exact = gamma(0.25) / (8.0 * PI).sqrt();
        assert!((eval_series(&s1, 0.0).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn gaussian_case_of_the_generic_series() {
        for n in 1..=4u32 {
            for eta in [0.3, 1.0, 2.5] {
                let (v, _) = power_series(1, n, eta, 1e-18).unwrap();
                let exact = 2f64.powf(-0.5 * n as f64) * (-eta * eta / 4.0).exp();
                assert!((v - exact).abs() < 1e-14, "n={n} eta={eta}");
            }
        }
    }

    #[test]
    fn rejects_wrong_order_and_range() {
        assert!(eval_series(&KernelSpec::new(3, 1).unwrap(), 1.0).is_err());
        assert!(eval_series(&KernelSpec::new(2, 1).unwrap(), 4.5).is_err());
    }
}
