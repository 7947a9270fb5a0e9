//! Run report, atomic emission and the plain-text summary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};

use whitham_gt::VerificationReport;

use crate::config::JobConfig;

/// Field order here is the key order of the emitted document.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: JobConfig,
    pub reports: Vec<VerificationReport>,
    pub details: Map<String, Value>,
    pub error: Option<String>,
    pub verdict: bool,
}

impl RunReport {
    pub fn new(config: JobConfig, reports: Vec<VerificationReport>, details: Map<String, Value>, error: Option<String>) -> Self {
        let verdict = error.is_none() && !reports.is_empty() && reports.iter().all(|r| r.passed);
        Self { version: env!("CARGO_PKG_VERSION").to_string(), config, reports, details, error, verdict }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human summary; the only place wall-clock time appears.
    pub fn summary(&self, elapsed: Duration) -> String {
        let mut s = format!("whitham-gt {} {} on {}\n", self.version, self.config.command.name(), self.config.structure.family.name());
        for r in &self.reports {
            s.push_str(&format!(
                "{} {:<34} {:<28} max {:.3e} tol {:.1e}\n",
                if r.passed { "PASS" } else { "FAIL" },
                r.identity,
                r.structure,
                r.max_residual,
                r.tolerance
            ));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        s.push_str(&format!("verdict: {}\n", if self.verdict { "pass" } else { "fail" }));
        s.push_str(&format!("elapsed: {:.3} s\n", elapsed.as_secs_f64()));
        s
    }
}

pub fn summary_path(report: &Path) -> PathBuf {
    report.with_extension("txt")
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit_report(r: &RunReport, path: &Path, elapsed: Duration) -> std::io::Result<()> {
    write_atomic(path, &r.to_json())?;
    write_atomic(&summary_path(path), &r.summary(elapsed))
}
