//! Bessel functions of the first kind for the orders `ν = (n-2)/2`, `n ≥ 1`.

use crate::{Error, Result};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Argument below which the ascending series is used.
const SERIES_LIMIT: f64 = 12.0;
const MAX_TERMS: usize = 500;

fn check_order(nu: f64, z: f64) -> Result<()> {
    let twice = 2.0 * nu;
    if !(nu >= -0.5) || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::Evaluation {
            nu,
            z,
            reason: "order must be an integer or half-integer ≥ -1/2".into(),
        });
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Evaluation {
            nu,
            z,
            reason: "argument must be finite and nonnegative".into(),
        });
    }
    Ok(())
}

fn is_half_integer(nu: f64) -> bool {
    (nu - nu.floor() - 0.5).abs() < 1e-12
}

/// `J_ν(z) / z^ν` by the ascending series; finite at `z = 0`.
fn scaled_series(nu: f64, z: f64) -> Result<f64> {
    let q = -0.25 * z * z;
    let mut term = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
    let mut sum = term;
    for k in 1..MAX_TERMS {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > 0.5 * z {
            return Ok(sum);
        }
    }
    Err(Error::Evaluation {
        nu,
        z,
        reason: "ascending series did not converge".into(),
    })
}

/// Half-integer orders from the closed forms of `J_{±1/2}` and upward
/// recurrence, valid where the recurrence is stable (`z > ν`).
fn half_integer_upward(nu: f64, z: f64) -> f64 {
    let pref = (2.0 / (PI * z)).sqrt();
    let mut prev = pref * z.cos(); // J_{-1/2}
    if nu < 0.0 {
        return prev;
    }
    let mut cur = pref * z.sin(); // J_{1/2}
    let mut order = 0.5;
    while order < nu - 1e-12 {
        let next = 2.0 * order / z * cur - prev;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    cur
}

/// Integer orders by Miller's backward recurrence, normalised with
/// `J_0 + 2 Σ_k J_{2k} = 1`.
fn integer_miller(nu: usize, z: f64) -> f64 {
    let start = {
        let s = (z + 30.0 + 2.0 * (nu as f64)).ceil() as usize + 10;
        s + (s % 2)
    };
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (0..start).rev() {
        // cur holds J_{k+1}, next holds J_{k+2}; compute J_k.
        let val = 2.0 * (k as f64 + 1.0) / z * cur - next;
        next = cur;
        cur = val;
        if k == nu {
            result = cur;
        }
        if k == 0 {
            norm += cur;
        } else if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
    }
    result / norm
}

/// `J_ν(z)` for `ν ∈ {-1/2, 0, 1/2, 1, ...}` and `z ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> Result<f64> {
    check_order(nu, z)?;
    if z == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu < 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
    }
    if is_half_integer(nu) {
        if z > nu + 1.0 {
            return Ok(half_integer_upward(nu, z));
        }
        return Ok(scaled_series(nu, z)? * z.powf(nu));
    }
    if z <= SERIES_LIMIT {
        return Ok(scaled_series(nu, z)? * z.powf(nu));
    }
    Ok(integer_miller(nu.round() as usize, z))
}

/// `J_ν(z) / z^ν`, the entire function appearing in radial Fourier integrals.
pub fn bessel_j_scaled(nu: f64, z: f64) -> Result<f64> {
    check_order(nu, z)?;
    if z <= 1.0 || (!is_half_integer(nu) && z <= SERIES_LIMIT) {
        return scaled_series(nu, z);
    }
    Ok(bessel_j(nu, z)? / z.powf(nu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minus_half_closed_form() {
        for z in [0.5, 1.0, 2.0] {
            let exact = (2.0 / (PI * z)).sqrt() * z.cos();
            assert!((bessel_j(-0.5, z).unwrap() - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn half_vanishes_at_pi() {
        assert!(bessel_j(0.5, PI).unwrap().abs() < 1e-12);
    }

    #[test]
    fn series_and_miller_agree_across_the_switch() {
        for nu in [0usize, 1, 2, 3] {
            let a = scaled_series(nu as f64, 12.0).unwrap() * 12f64.powi(nu as i32);
            let b = integer_miller(nu, 12.0);
            assert!((a - b).abs() < 1e-11, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_values() {
        // Reference values from an independent double-precision library.
        assert!((bessel_j(0.0, 20.0).unwrap() - 0.167_024_664_340_583).abs() < 1e-13);
        assert!((bessel_j(1.0, 30.0).unwrap() - (-0.118_751_062_616_622_9)).abs() < 1e-13);
        assert!((bessel_j(1.5, 0.3).unwrap() - 0.043_309_881_918_378_36).abs() < 1e-14);
    }

    #[test]
    fn scaled_limit_at_origin() {
        assert!((bessel_j_scaled(1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((bessel_j_scaled(-0.5, 0.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(bessel_j(0.3, 1.0).is_err());
        assert!(bessel_j(-1.0, 1.0).is_err());
    }
}
