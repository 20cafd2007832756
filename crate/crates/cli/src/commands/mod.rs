//! Subcommands. Each resolves its settings (flags over config file over
//! defaults), validates them, then runs inside [`execute`].

pub mod fp;
pub mod kernel;
pub mod moments;
pub mod positivity;
pub mod solve;

use crate::report::{write_failure, Check, Outputs, FAILURE_FILE};
use crate::{CliError, Context};
use polyheat::cauchy::InitialDatum;
use polyheat::fokker_planck::{Frame, GridField};
use serde::Serialize;
use std::fmt;
use std::fs;
use std::str::FromStr;

/// Runs `body` with a fresh output directory and writes the report. A
/// numerical error still leaves `failure.json` with the configuration.
pub fn execute<C: Serialize>(
    ctx: &Context,
    command: &str,
    config: &C,
    body: impl FnOnce(&mut Outputs, &mut Vec<Check>) -> Result<(), CliError>,
) -> Result<bool, CliError> {
    ctx.settings.finish()?;
    let mut out = Outputs::new(&ctx.out)?;
    match fs::remove_file(out.dir().join(FAILURE_FILE)) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
        _ => {}
    }
    let mut checks = Vec::new();
    match body(&mut out, &mut checks) {
        Ok(()) => out.finish(command, config, &checks),
        Err(e) => {
            if e.is_numerical() {
                write_failure(out.dir(), command, config, Some(e.to_string()), &[])?;
            }
            Err(e)
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Initial data offered by `solve` and `positivity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatumChoice {
    Bump,
    Gaussian,
    InversePower,
    PurePower,
    Constant,
}

impl DatumChoice {
    /// Whether the datum decays before the faces of the box.
    pub fn is_localized(self) -> bool {
        matches!(self, DatumChoice::Bump | DatumChoice::Gaussian)
    }
}

impl fmt::Display for DatumChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatumChoice::Bump => "bump",
            DatumChoice::Gaussian => "gaussian",
            DatumChoice::InversePower => "inverse-power",
            DatumChoice::PurePower => "pure-power",
            DatumChoice::Constant => "constant",
        })
    }
}

impl FromStr for DatumChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bump" => Ok(DatumChoice::Bump),
            "gaussian" => Ok(DatumChoice::Gaussian),
            "inverse-power" => Ok(DatumChoice::InversePower),
            "pure-power" => Ok(DatumChoice::PurePower),
            "constant" => Ok(DatumChoice::Constant),
            other => Err(format!(
                "unknown datum {other:?}; expected bump, gaussian, inverse-power, pure-power or constant"
            )),
        }
    }
}

/// Parameters of every datum; each kind reads the ones it needs.
#[derive(Debug, Clone, Serialize)]
pub struct DatumParams {
    pub datum: DatumChoice,
    pub radius: f64,
    pub height: f64,
    pub beta: f64,
    pub g_base: f64,
    pub g_amplitude: f64,
    pub g_width: f64,
}

impl DatumParams {
    pub fn build(&self, n: u32, size: usize, half_width: f64) -> Result<InitialDatum, CliError> {
        let g = polyheat::cauchy::GFamily {
            base: self.g_base,
            amplitude: self.g_amplitude,
            width: self.g_width,
        };
        let d = match self.datum {
            DatumChoice::Bump => InitialDatum::compact_bump(n, size, half_width, self.radius, self.height),
            DatumChoice::Gaussian => GridField::from_fn(n, size, half_width, Frame::Parabolic, 0.0, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                self.height * (-r2 / (self.radius * self.radius)).exp()
            })
            .and_then(InitialDatum::custom),
            DatumChoice::InversePower => InitialDatum::inverse_power(n, size, half_width, g, self.beta),
            DatumChoice::PurePower => InitialDatum::pure_power(n, size, half_width, self.beta),
            DatumChoice::Constant => InitialDatum::constant(n, size, half_width, self.height),
        };
        d.map_err(domain_as_usage)
    }
}

/// Checks the grid before any work: `size` even and at least 8, `L > 0`,
/// at most `2^24` points in total.
pub fn validate_grid(n: u32, size: usize, half_width: f64) -> Result<(), CliError> {
    if !(1..=3).contains(&n) {
        return Err(usage(format!("grid commands support n = 1, 2, 3 (got {n})")));
    }
    if size < 8 || size % 2 != 0 {
        return Err(usage(format!("--size must be even and at least 8 (got {size})")));
    }
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(usage(format!("--half-width must be positive (got {half_width})")));
    }
    if (size as f64).powi(n as i32) > (1u64 << 24) as f64 {
        return Err(usage(format!("{size}^{n} grid points exceed 2^24")));
    }
    Ok(())
}

/// Turns a library domain error into a usage error.
pub fn domain_as_usage(e: polyheat::Error) -> CliError {
    match e {
        polyheat::Error::Domain(msg) => CliError::Usage(msg),
        other => other.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datum_names_round_trip() {
        for d in [
            DatumChoice::Bump,
            DatumChoice::Gaussian,
            DatumChoice::InversePower,
            DatumChoice::PurePower,
            DatumChoice::Constant,
        ] {
            assert_eq!(d.to_string().parse::<DatumChoice>().unwrap(), d);
            assert_eq!(serde_json::to_string(&d).unwrap(), format!("\"{d}\""));
        }
        assert!("square".parse::<DatumChoice>().is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(1, 512, 32.0).is_ok());
        assert!(validate_grid(1, 511, 32.0).is_err());
        assert!(validate_grid(3, 512, 32.0).is_err());
        assert!(validate_grid(4, 16, 32.0).is_err());
        assert!(validate_grid(1, 64, 0.0).is_err());
    }
}
