//! Sampled kernel profiles and their file formats.

use super::{eval, KernelSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

/// Evaluation method attached to every profile sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Quadrature,
    Contour,
    Asymptotic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::Contour => "contour",
            Method::Asymptotic => "asymptotic",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Method::Series),
            "quadrature" => Ok(Method::Quadrature),
            "contour" => Ok(Method::Contour),
            "asymptotic" => Ok(Method::Asymptotic),
            other => Err(Error::Serialization(format!("unknown method tag {other:?}"))),
        }
    }
}

/// `f_{m,n}` sampled on an increasing grid of `η ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelProfile {
    pub spec: KernelSpec,
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Vec<Method>,
    pub est_error: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    eta: f64,
    value: f64,
    method: String,
    est_error: f64,
}

/// `m`, `n`, the normalisation constant and the decay constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub m: u32,
    pub n: u32,
    pub alpha: f64,
    pub sigma: f64,
}

impl KernelConstants {
    pub fn compute(spec: &KernelSpec) -> Result<Self> {
        Ok(Self {
            m: spec.m,
            n: spec.n,
            alpha: super::normalization_constant(spec)?,
            sigma: crate::bounds::sigma_m(spec.m),
        })
    }
}

impl KernelProfile {
    /// Samples the kernel at `etas`, which must be strictly increasing and
    /// nonnegative. Samples are evaluated in parallel on the current rayon
    /// pool and stored in input order.
    pub fn sample(spec: &KernelSpec, etas: &[f64]) -> Result<Self> {
        validate_grid(etas)?;
        let evaluated: Vec<_> = etas
            .par_iter()
            .map(|&eta| eval(spec, eta))
            .collect::<Result<Vec<_>>>()?;
        let profile = Self {
            spec: *spec,
            etas: etas.to_vec(),
            values: evaluated.iter().map(|v| v.value).collect(),
            method: evaluated.iter().map(|v| v.method).collect(),
            est_error: evaluated.iter().map(|v| v.error).collect(),
        };
        if profile.etas[0] == 0.0 && !(profile.values[0] > 0.0) {
            return Err(Error::Degenerate("kernel value at the origin is not positive".into()));
        }
        Ok(profile)
    }

    /// Samples on the uniform grid `0, h, 2h, ..., ≥ eta_max`.
    pub fn uniform(spec: &KernelSpec, eta_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(eta_max > 0.0) {
            return Err(Error::Domain("uniform profile needs h > 0 and eta_max > 0".into()));
        }
        let count = (eta_max / h).ceil() as usize;
        let etas: Vec<f64> = (0..=count).map(|i| i as f64 * h).collect();
        Self::sample(spec, &etas)
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    pub fn eta_max(&self) -> f64 {
        *self.etas.last().unwrap_or(&0.0)
    }

    /// Local Lagrange interpolation through the `2·half_width` nearest samples.
    ///
    /// Beyond the last sample the profile is treated as an error rather than
    /// extrapolated.
    pub fn interpolate(&self, eta: f64) -> Result<f64> {
        const HALF_WIDTH: usize = 4;
        let eta = eta.abs();
        let last = self.eta_max();
        if eta > last {
            return Err(Error::Accuracy {
                context: format!("profile covers eta ≤ {last}, requested {eta}"),
                estimate: eta - last,
                tolerance: 0.0,
            });
        }
        let idx = self.etas.partition_point(|&x| x <= eta);
        let lo = idx
            .saturating_sub(HALF_WIDTH)
            .min(self.len().saturating_sub(2 * HALF_WIDTH));
        let hi = (lo + 2 * HALF_WIDTH).min(self.len());
        // The profile is even in η; mirror samples across the origin when
        // the stencil would otherwise be lopsided.
        let mut nodes: Vec<(f64, f64)> = (lo..hi).map(|i| (self.etas[i], self.values[i])).collect();
        if self.etas[0] == 0.0 && lo == 0 {
            let mirrored: Vec<(f64, f64)> = (1..HALF_WIDTH.min(self.len()))
                .map(|i| (-self.etas[i], self.values[i]))
                .collect();
            nodes.extend(mirrored);
            nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
            let centre = nodes.partition_point(|p| p.0 <= eta);
            let start = centre
                .saturating_sub(HALF_WIDTH)
                .min(nodes.len().saturating_sub(2 * HALF_WIDTH));
            nodes = nodes[start..(start + 2 * HALF_WIDTH).min(nodes.len())].to_vec();
        }
        let mut acc = 0.0;
        for (i, &(xi, yi)) in nodes.iter().enumerate() {
            if xi == eta {
                return Ok(yi);
            }
            let mut l = 1.0;
            for (j, &(xj, _)) in nodes.iter().enumerate() {
                if i != j {
                    l *= (eta - xj) / (xi - xj);
                }
            }
            acc += l * yi;
        }
        Ok(acc)
    }

    /// Writes the CSV table `eta,value,method,est_error`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for i in 0..self.len() {
            wr.serialize(Row {
                eta: self.etas[i],
                value: self.values[i],
                method: self.method[i].to_string(),
                est_error: self.est_error[i],
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a table written by [`KernelProfile::write_csv`].
    pub fn read_csv<R: Read>(spec: KernelSpec, r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut p = Self {
            spec,
            etas: vec![],
            values: vec![],
            method: vec![],
            est_error: vec![],
        };
        for row in rd.deserialize() {
            let row: Row = row?;
            p.etas.push(row.eta);
            p.values.push(row.value);
            p.method.push(row.method.parse()?);
            p.est_error.push(row.est_error);
        }
        validate_grid(&p.etas)?;
        Ok(p)
    }
}

fn validate_grid(etas: &[f64]) -> Result<()> {
    if etas.is_empty() {
        return Err(Error::InsufficientData("empty eta grid".into()));
    }
    if !(etas[0] >= 0.0) {
        return Err(Error::Domain("eta grid must be nonnegative".into()));
    }
    if etas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("eta grid must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let spec = KernelSpec::new(2, 1).unwrap();
        let p = KernelProfile::sample(&spec, &[0.0, 1.0, 5.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("eta,value,method,est_error\n"));
        let q = KernelProfile::read_csv(spec, buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn interpolation_reproduces_the_kernel() {
        let spec = KernelSpec::new(2, 1).unwrap();
        let p = KernelProfile::uniform(&spec, 10.0, 0.02).unwrap();
        for eta in [0.005, 0.333, 3.999, 7.77] {
            let exact = super::super::value(&spec, eta).unwrap();
            let got = p.interpolate(eta).unwrap();
            assert!((got - exact).abs() < 1e-12, "eta={eta}: {got} vs {exact}");
        }
        assert!(p.interpolate(10.5).is_err());
    }

    #[test]
    fn rejects_unsorted_grid() {
        let spec = KernelSpec::new(2, 1).unwrap();
        assert!(KernelProfile::sample(&spec, &[1.0, 0.5]).is_err());
    }
}
