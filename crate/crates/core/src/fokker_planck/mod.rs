//! Self-similar variables `y = x/R`, `τ = log R`, `R = (2mt+1)^{1/2m}`,
//! in which the Cauchy problem becomes `v_τ + L v = 0` with
//! `L v = (-Δ)^m v - ∇·(y v)`; the operator, its eigenfunctions
//! `D^α v_∞`, weighted inner products and the projection onto `v_∞`.

mod frames;
mod operator;
mod weighted;

pub use frames::{evolve, from_fokker_planck, rescale_factor, time_of_tau, to_fokker_planck};
pub use operator::{
    apply_l, eigen_residual, stationary_field, write_eigen_table, EigenResidual, GridParams, ALIAS_TOL,
};
pub use weighted::{project_kernel, weighted_inner_product, WeightSpec};

use crate::numerics::spectral::Grid;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Largest admissible ratio of the field on the box faces to its maximum.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Which variables a field is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `u(x, t)`.
    Parabolic,
    /// `v(y, τ)`.
    FokkerPlanck,
}

/// Samples on the periodic box `[-L, L)^n` with `N` points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub n: u32,
    pub size: usize,
    pub half_width: f64,
    /// Row-major samples, axis 0 slowest.
    pub values: Vec<f64>,
    pub frame: Frame,
    /// `t` in the parabolic frame, `τ` in the Fokker–Planck frame.
    pub time: f64,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: u32,
    #[serde(rename = "N")]
    size: usize,
    #[serde(rename = "L")]
    half_width: f64,
    frame: Frame,
    time: f64,
}

impl GridField {
    pub fn new(n: u32, size: usize, half_width: f64, frame: Frame, time: f64, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("grids support n ∈ {{1, 2, 3}} (got {n})")));
        }
        if size < 4 || !size.is_power_of_two() {
            return Err(Error::Domain(format!(
                "points per axis must be a power of two ≥ 4 (got {size})"
            )));
        }
        if !(half_width > 0.0) {
            return Err(Error::Domain(format!(
                "box half-width must be positive (got {half_width})"
            )));
        }
        if values.len() != size.pow(n) {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                size.pow(n),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field values must be finite".into()));
        }
        Ok(Self {
            n,
            size,
            half_width,
            values,
            frame,
            time,
        })
    }

    /// Samples `f(y)` at every grid point.
    pub fn from_fn<F>(n: u32, size: usize, half_width: f64, frame: Frame, time: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let grid = Grid::new(n as usize, size, half_width);
        let mut idx = vec![0usize; n as usize];
        let mut y = vec![0.0; n as usize];
        let values = (0..grid.len())
            .map(|k| {
                grid.unflatten(k, &mut idx);
                for a in 0..idx.len() {
                    y[a] = grid.coordinate(idx[a]);
                }
                f(&y)
            })
            .collect();
        Self::new(n, size, half_width, frame, time, values)
    }

    /// A field on the same grid with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { values, ..self.clone() }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n as usize, self.size, self.half_width)
    }

    /// Coordinates of every grid point, in storage order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let grid = self.grid();
        let mut idx = vec![0usize; self.n as usize];
        (0..grid.len())
            .map(|k| {
                grid.unflatten(k, &mut idx);
                idx.iter().map(|&i| grid.coordinate(i)).collect()
            })
            .collect()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n == other.n && self.size == other.size && self.half_width == other.half_width
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// `∫ v` by the trapezoid rule, spectrally accurate on the periodic box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid().cell_volume()
    }

    /// `(∫ v²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid().cell_volume()).sqrt()
    }

    /// `∫ |y|^b v`.
    pub fn radial_moment(&self, b: f64) -> f64 {
        let dv = self.grid().cell_volume();
        self.points()
            .iter()
            .zip(&self.values)
            .map(|(y, v)| {
                let r2: f64 = y.iter().map(|c| c * c).sum();
                if r2 == 0.0 {
                    if b == 0.0 {
                        *v
                    } else {
                        0.0
                    }
                } else {
                    r2.powf(0.5 * b) * v
                }
            })
            .sum::<f64>()
            * dv
    }

    /// Largest `|v|` on the outermost layer of grid points relative to the
    /// largest `|v|` overall; zero for the zero field.
    pub fn boundary_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let grid = self.grid();
        let mut idx = vec![0usize; self.n as usize];
        let mut face = 0.0f64;
        for (k, v) in self.values.iter().enumerate() {
            grid.unflatten(k, &mut idx);
            if idx.iter().any(|&i| i == 0 || i == self.size - 1) {
                face = face.max(v.abs());
            }
        }
        face / max
    }

    /// Truncation error unless the field is negligible on the box faces.
    pub fn check_boundary(&self, tol: f64, context: &str) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio > tol {
            return Err(Error::Truncation {
                context: context.to_string(),
                ratio,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Writes `<base>.bin` (little-endian 64-bit floats, row-major) and the
    /// sidecar `<base>.json` with `{n, N, L, frame, time}`.
    pub fn save(&self, base: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = base.with_extension("bin");
        let json = base.with_extension("json");
        let bytes: Vec<u8> = self.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&bin, bytes)?;
        let sidecar = Sidecar {
            n: self.n,
            size: self.size,
            half_width: self.half_width,
            frame: self.frame,
            time: self.time,
        };
        fs::write(&json, serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok((bin, json))
    }

    /// Reads a field written by [`GridField::save`].
    pub fn load(base: &Path) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(base.with_extension("json"))?)?;
        let bytes = fs::read(base.with_extension("bin"))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Serialization(
                "field binary is not a whole number of f64 values".into(),
            ));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight bytes")))
            .collect();
        Self::new(
            sidecar.n,
            sidecar.size,
            sidecar.half_width,
            sidecar.frame,
            sidecar.time,
            values,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridField::new(1, 6, 1.0, Frame::Parabolic, 0.0, vec![0.0; 6]).is_err());
        assert!(GridField::new(4, 4, 1.0, Frame::Parabolic, 0.0, vec![0.0; 256]).is_err());
        assert!(GridField::new(1, 8, 1.0, Frame::Parabolic, 0.0, vec![0.0; 7]).is_err());
        assert!(GridField::new(1, 8, 1.0, Frame::Parabolic, 0.0, vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn gaussian_integrals() {
        let f = GridField::from_fn(2, 64, 10.0, Frame::Parabolic, 0.0, |y| {
            (-(y[0] * y[0] + y[1] * y[1])).exp()
        })
        .unwrap();
        assert!((f.integral() - std::f64::consts::PI).abs() < 1e-13);
        // ∫ |y|² e^{-|y|²} = π in two dimensions.
        assert!((f.radial_moment(2.0) - std::f64::consts::PI).abs() < 1e-12);
        assert!(f.boundary_ratio() < 1e-40);
    }

    #[test]
    fn boundary_check_flags_wide_fields() {
        let f = GridField::from_fn(1, 32, 2.0, Frame::Parabolic, 0.0, |y| (-y[0] * y[0] / 4.0).exp()).unwrap();
        assert!(matches!(
            f.check_boundary(BOUNDARY_TOL, "test"),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let f = GridField::from_fn(2, 8, 3.0, Frame::FokkerPlanck, 0.5, |y| y[0] - 2.0 * y[1]).unwrap();
        let (bin, json) = f.save(&dir.path().join("field")).unwrap();
        assert_eq!(std::fs::metadata(&bin).unwrap().len(), 64 * 8);
        let text = std::fs::read_to_string(json).unwrap();
        assert!(text.contains("\"N\": 8") && text.contains("\"frame\": \"fokker_planck\""));
        assert_eq!(GridField::load(&dir.path().join("field")).unwrap(), f);
    }
}
