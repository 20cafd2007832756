//! Output files of a run: CSV tables carrying a `check` column, JSON
//! documents, and the report that echoes the configuration and records every
//! check.

use crate::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Name of the report written by every run.
pub const REPORT_FILE: &str = "report.json";

/// Name of the document written when a check fails or a numerical error
/// stops the run.
pub const FAILURE_FILE: &str = "failure.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// One numerical check: `value` compared against `limit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The property the check verifies.
    pub check: String,
    pub value: f64,
    pub comparison: Comparison,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, check: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            check: check.into(),
            value,
            comparison: Comparison::AtMost,
            limit,
            pass: value <= limit,
        }
    }

    pub fn at_least(name: &str, check: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            check: check.into(),
            value,
            comparison: Comparison::AtLeast,
            limit,
            pass: value >= limit,
        }
    }

    /// A yes/no property as a count of violations that must be zero.
    pub fn holds(name: &str, check: &str, ok: bool) -> Self {
        Self::at_most(name, check, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

/// Files written into the output directory, in order.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    tables: BTreeMap<String, String>,
}

impl Outputs {
    /// Creates the directory if needed and checks that it is writable.
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        let probe = dir.join(".polyheat-write-probe");
        fs::write(&probe, b"")
            .and_then(|_| fs::remove_file(&probe))
            .map_err(|e| CliError::Usage(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            tables: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes a CSV table; the report embeds it as text.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Serialization(e.to_string()))?;
        let text = String::from_utf8(bytes).map_err(|e| CliError::Serialization(e.to_string()))?;
        fs::write(self.dir.join(name), &text)?;
        self.files.push(name.into());
        self.tables.insert(name.into(), text);
        Ok(())
    }

    /// Writes a table produced by the library with extra trailing columns,
    /// one row of them per data row.
    pub fn extended(
        &mut self,
        name: &str,
        table: &[u8],
        extra_header: &[&str],
        extra: impl Fn(usize) -> Vec<String>,
    ) -> Result<(), CliError> {
        let mut reader = csv::Reader::from_reader(table);
        let mut header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
        header.extend(extra_header.iter().map(|s| s.to_string()));
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let mut row: Vec<String> = record?.iter().map(String::from).collect();
            row.extend(extra(i));
            rows.push(row);
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        self.table(name, &header, &rows)
    }

    /// Writes pretty JSON with a trailing newline.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        fs::write(self.dir.join(name), serde_json::to_string_pretty(value)? + "\n")?;
        self.files.push(name.into());
        Ok(())
    }

    /// Records a file written elsewhere into the directory.
    pub fn record(&mut self, name: &str) {
        self.files.push(name.into());
    }

    /// Writes the report, and the failure document if a check failed.
    /// Returns whether every check passed.
    pub fn finish<C: Serialize>(self, command: &str, config: &C, checks: &[Check]) -> Result<bool, CliError> {
        let passed = checks.iter().all(|c| c.pass);
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let report = Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            created_unix,
            config,
            passed,
            checks,
            outputs: &self.files,
            tables: &self.tables,
        };
        fs::write(
            self.dir.join(REPORT_FILE),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
        if !passed {
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
            write_failure(&self.dir, command, config, None, &failed)?;
        }
        Ok(passed)
    }
}

#[derive(Serialize)]
struct Report<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    /// The only field that differs between identical runs.
    created_unix: u64,
    config: &'a C,
    passed: bool,
    checks: &'a [Check],
    outputs: &'a [String],
    tables: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Failure<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    error: Option<String>,
    failed_checks: &'a [&'a Check],
}

/// Writes [`FAILURE_FILE`] with the failed checks or the error that
/// stopped the run.
pub fn write_failure<C: Serialize>(
    dir: &Path,
    command: &str,
    config: &C,
    error: Option<String>,
    failed: &[&Check],
) -> Result<PathBuf, CliError> {
    let path = dir.join(FAILURE_FILE);
    let doc = Failure {
        command,
        config,
        error,
        failed_checks: failed,
    };
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

/// Shortest text that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
