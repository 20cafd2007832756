//! Sign changes of `f_{m,n}`.

use super::{value, KernelSpec};
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scan step used to bracket roots.
pub const SCAN_STEP: f64 = 0.05;

/// Roots of `f_{m,n}` on `(0, eta_max]`, each known to within `bracket_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChangeList {
    pub roots: Vec<f64>,
    pub bracket_width: f64,
}

/// Brackets every sign change on a grid of step [`SCAN_STEP`] and refines
/// each by bisection.
pub fn find_sign_changes(spec: &KernelSpec, eta_max: f64) -> Result<SignChangeList> {
    find_sign_changes_with(spec, eta_max, 1e-10)
}

pub fn find_sign_changes_with(spec: &KernelSpec, eta_max: f64, bracket_width: f64) -> Result<SignChangeList> {
    let count = (eta_max / SCAN_STEP).floor() as usize;
    let grid: Vec<f64> = (0..=count).map(|i| i as f64 * SCAN_STEP).collect();
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&eta| value(spec, eta))
        .collect::<Result<Vec<_>>>()?;
    let brackets: Vec<(f64, f64, f64)> = grid
        .windows(2)
        .zip(vals.windows(2))
        .filter(|(_, v)| v[0] * v[1] < 0.0 || (v[1] == 0.0 && v[0] != 0.0))
        .map(|(g, v)| (g[0], g[1], v[0]))
        .collect();
    let roots = brackets
        .par_iter()
        .map(|&(mut lo, mut hi, f_lo)| {
            while hi - lo > bracket_width {
                let mid = 0.5 * (lo + hi);
                let fm = value(spec, mid)?;
                if fm == 0.0 {
                    return Ok(mid);
                }
                if (fm > 0.0) == (f_lo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignChangeList { roots, bracket_width })
}
