//! Batch runner: a JSON job configuration in, a JSON report and a text
//! summary out.

pub mod config;
pub mod jobs;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;

use config::JobConfig;
use report::{emit_report, RunReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Runs a parsed job. The report carries any numeric error that cut it short.
pub fn execute(cfg: &JobConfig) -> RunReport {
    let mut out = jobs::Outcome::default();
    let error = jobs::run(cfg, &mut out).err().map(|e| e.to_string());
    RunReport::new(cfg.clone(), out.reports, out.details, error)
}

/// Full pipeline behind the binary; returns the process exit code.
pub fn run_cli(config: &Path, out: Option<&Path>, seed: Option<u64>) -> i32 {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config.display());
            return EXIT_IO;
        }
    };
    let raw: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config is not valid JSON: {e}");
            return EXIT_CONFIG;
        }
    };
    let cfg = match JobConfig::from_value(raw, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let Some(path) = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from)) else {
        eprintln!("no output path: pass --out or set \"output\" in the config");
        return EXIT_CONFIG;
    };
    let start = Instant::now();
    let report = execute(&cfg);
    if let Err(e) = emit_report(&report, &path, start.elapsed()) {
        eprintln!("cannot write {}: {e}", path.display());
        return EXIT_IO;
    }
    print!("{}", report.summary(start.elapsed()));
    if report.verdict {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn list_structures() -> String {
    whitham_gt::catalog::FamilyId::ALL
        .iter()
        .map(|f| format!("{:<8} {}{}\n", f.name(), f.description(), if f.enhanced() { " (with potentials)" } else { "" }))
        .collect()
}
