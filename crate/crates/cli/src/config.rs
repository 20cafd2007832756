//! Run configuration: a flat `key = value` file merged under command-line
//! flags, and the list syntaxes shared by the subcommands.

use crate::CliError;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Output directory when neither a flag, `POLYHEAT_OUT` nor the config file
/// names one.
pub const DEFAULT_OUT: &str = "polyheat-out";

/// Environment variable overriding the configured output directory.
pub const OUT_ENV: &str = "POLYHEAT_OUT";

/// Keys accepted by every subcommand.
const GLOBAL_KEYS: [&str; 3] = ["out", "seed", "threads"];

/// Values read from a config file. Every key must be consumed by the
/// command that runs; leftovers are a usage error.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped and keys may not repeat.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config key {key:?} given twice")));
        }
    }
    Ok(out)
}

impl Settings {
    pub fn from_file(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            used: RefCell::default(),
        })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.file.get(key) else {
            return Ok(None);
        };
        self.used.borrow_mut().insert(key.to_string());
        raw.parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key {key:?}: {e}")))
    }

    /// Flag, then config file, then `default`.
    pub fn value<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.optional(key, flag)?.unwrap_or(default))
    }

    /// Flag, then config file.
    pub fn optional<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = self.lookup(key)?;
        Ok(flag.or(from_file))
    }

    /// A switch is on if the flag is given or the file sets it to `true`.
    pub fn switch(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        let from_file: Option<bool> = self.lookup(key)?;
        Ok(flag || from_file.unwrap_or(false))
    }

    /// Output directory: flag, then `POLYHEAT_OUT`, then the file, then
    /// [`DEFAULT_OUT`].
    pub fn out_dir(&self, flag: Option<PathBuf>, env: Option<String>) -> Result<PathBuf, CliError> {
        let from_file: Option<PathBuf> = self.lookup("out")?;
        Ok(flag
            .or(env.filter(|s| !s.is_empty()).map(PathBuf::from))
            .or(from_file)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)))
    }

    /// Fails on file keys that no setting consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .file
            .keys()
            .map(String::as_str)
            .filter(|k| !used.contains(*k) && !GLOBAL_KEYS.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "unknown config keys for this command: {}",
                unknown.join(", ")
            )))
        }
    }
}

/// Inclusive arithmetic grid `lo:hi:step`, with points `lo + i·step` so no
/// error accumulates.
#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("expected lo:hi:step (got {s:?})"));
        };
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let r = Range {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(r.step > 0.0) || !(r.hi >= r.lo) || !r.hi.is_finite() || !r.lo.is_finite() {
            return Err(format!("need lo ≤ hi and step > 0 (got {s:?})"));
        }
        if (r.hi - r.lo) / r.step > 1e6 {
            return Err(format!("grid {s:?} has more than a million points"));
        }
        Ok(r)
    }
}

/// An explicit list `t1,t2,...` or `geometric:t0:t1:count`.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    List(Vec<f64>),
    Geometric { t0: f64, t1: f64, count: usize },
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        match self {
            TimeGrid::List(v) => Ok(v.clone()),
            TimeGrid::Geometric { t0, t1, count } => Ok(polyheat::cauchy::geometric_times(*t0, *t1, *count)?),
        }
    }
}

impl std::fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeGrid::List(v) => {
                let items: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&items.join(","))
            }
            TimeGrid::Geometric { t0, t1, count } => write!(f, "geometric:{t0}:{t1}:{count}"),
        }
    }
}

impl FromStr for TimeGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        if let Some(rest) = s.strip_prefix("geometric:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [t0, t1, count] = parts[..] else {
                return Err(format!("expected geometric:t0:t1:count (got {s:?})"));
            };
            let count = count.trim().parse::<usize>().map_err(|e| format!("{count:?}: {e}"))?;
            let (t0, t1) = (num(t0)?, num(t1)?);
            if !(t0 > 0.0 && t1 > t0 && t1.is_finite()) || count < 2 {
                return Err(format!("need 0 < t0 < t1 and count ≥ 2 (got {s:?})"));
            }
            return Ok(TimeGrid::Geometric { t0, t1, count });
        }
        let values = s.split(',').map(num).collect::<Result<Vec<f64>, String>>()?;
        if values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("times must be positive and strictly increasing (got {s:?})"));
        }
        Ok(TimeGrid::List(values))
    }
}

/// `lo:hi` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi (got {s:?})"))?;
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("need lo < hi (got {s:?})"));
        }
        Ok(Interval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_skip_comments_and_blanks() {
        let kv = parse_key_values("# run\nm = 2\n\n eta-max=12 # far enough\n").unwrap();
        assert_eq!(kv.len(), 2);
        assert_eq!(kv["m"], "2");
        assert_eq!(kv["eta-max"], "12");
        assert!(parse_key_values("m 2").is_err());
        assert!(parse_key_values("m = 2\nm = 3").is_err());
    }

    #[test]
    fn flags_win_over_file_over_defaults() {
        let s = Settings {
            file: parse_key_values("m = 3\nn = 2").unwrap(),
            used: RefCell::default(),
        };
        assert_eq!(s.value("m", Some(2u32), 1).unwrap(), 2);
        assert_eq!(s.value("n", None, 1u32).unwrap(), 2);
        assert_eq!(s.value("eta-max", None, 12.0).unwrap(), 12.0);
        assert!(s.finish().is_ok());
        let bad = Settings {
            file: parse_key_values("m = two").unwrap(),
            used: RefCell::default(),
        };
        assert!(bad.value::<u32>("m", None, 1).is_err());
    }

    #[test]
    fn leftover_keys_are_rejected() {
        let s = Settings {
            file: parse_key_values("m = 2\nbogus = 1\nseed = 4").unwrap(),
            used: RefCell::default(),
        };
        s.value("m", None, 1u32).unwrap();
        let err = s.finish().unwrap_err().to_string();
        assert!(err.contains("bogus") && !err.contains("seed"), "{err}");
    }

    #[test]
    fn output_directory_precedence() {
        let s = Settings {
            file: parse_key_values("out = from-file").unwrap(),
            used: RefCell::default(),
        };
        let env = Some("from-env".to_string());
        assert_eq!(
            s.out_dir(Some("flag".into()), env.clone()).unwrap(),
            PathBuf::from("flag")
        );
        assert_eq!(s.out_dir(None, env).unwrap(), PathBuf::from("from-env"));
        assert_eq!(s.out_dir(None, None).unwrap(), PathBuf::from("from-file"));
        assert_eq!(
            Settings::default().out_dir(None, None).unwrap(),
            PathBuf::from(DEFAULT_OUT)
        );
    }

    #[test]
    fn range_points_include_the_end() {
        let r: Range = "-0.5:18:0.25".parse().unwrap();
        let p = r.points();
        assert_eq!(p.len(), 75);
        assert_eq!(p[0], -0.5);
        assert_eq!(*p.last().unwrap(), 18.0);
        assert!("1:0:1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
    }

    #[test]
    fn time_grids() {
        let g: TimeGrid = "geometric:0.1:100:20".parse().unwrap();
        let t = g.points().unwrap();
        assert_eq!(t.len(), 20);
        assert_eq!(t[19], 100.0);
        assert_eq!(g.to_string(), "geometric:0.1:100:20");
        let l: TimeGrid = "0.1,0.5,1,2".parse().unwrap();
        assert_eq!(l, TimeGrid::List(vec![0.1, 0.5, 1.0, 2.0]));
        assert_eq!(l.to_string(), "0.1,0.5,1,2");
        assert!("1,0.5".parse::<TimeGrid>().is_err());
        assert!("geometric:1:0.5:3".parse::<TimeGrid>().is_err());
    }

    #[test]
    fn intervals() {
        let i: Interval = "5:15".parse().unwrap();
        assert_eq!((i.lo, i.hi), (5.0, 15.0));
        assert!("5".parse::<Interval>().is_err());
        assert!("5:5".parse::<Interval>().is_err());
    }
}
