use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

use whitham_gt_cli::config::{CONFIG_SCHEMA, REPORT_SCHEMA};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_whitham-gt"))
}

fn run(dir: &Path, name: &str, cfg: &Value, extra: &[&str]) -> (Output, PathBuf) {
    let cfg_path = dir.join(format!("{name}.config.json"));
    std::fs::write(&cfg_path, serde_json::to_string(cfg).unwrap()).unwrap();
    let out = dir.join(format!("{name}.json"));
    let output = bin().arg("--config").arg(&cfg_path).arg("--out").arg(&out).args(extra).output().unwrap();
    (output, out)
}

fn schema_ok(schema: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn genus0_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(dir.path(), "verify", &json!({"command": "verify", "seed": 1, "structure": {"family": "genus0", "n": 2}}), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["passed"] == json!(true)));
    assert_eq!(doc["verdict"], json!(true));
    schema_ok(REPORT_SCHEMA, &doc);
    schema_ok(CONFIG_SCHEMA, &doc["config"]);
    let summary = std::fs::read_to_string(path.with_extension("txt")).unwrap();
    assert!(summary.contains("verdict: pass"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"command": "report", "seed": 42, "samples": 30, "structure": {"family": "genus0", "n": 2}});
    let (a, pa) = run(dir.path(), "a", &cfg, &[]);
    let (b, pb) = run(dir.path(), "b", &cfg, &[]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn negative_tolerance_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(dir.path(), "neg", &json!({"command": "verify", "seed": 1, "tol": -1, "structure": {"family": "genus0", "n": 2}}), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn degenerate_moduli_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "command": "rauch", "seed": 1, "structure": {"family": "genus2"},
        "rauch": {"moduli": {"a": [2.0, 0.5], "b": [2.0, 0.5], "c": [-1.0, 1.0]}}
    });
    let (o, path) = run(dir.path(), "deg", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coincide"));
    assert!(!path.exists());
}

#[test]
fn unknown_key_and_missing_seed_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), "u", &json!({"command": "verify", "seed": 1, "structure": {"family": "genus0"}, "extra": 1}), &[]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = json!({"command": "verify", "structure": {"family": "genus0"}});
    let (o, _) = run(dir.path(), "s", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let (o, path) = run(dir.path(), "s2", &cfg, &["--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], json!(9));
}

#[test]
fn failed_identity_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let (o, path) = run(dir.path(), "tight", &json!({"command": "verify", "seed": 1, "tol": 1e-30, "structure": {"family": "benney", "n": 2}}), &[]);
    assert_eq!(o.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    assert_eq!(doc["verdict"], json!(false));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    std::fs::write(&cfg_path, r#"{"command": "verify", "seed": 1, "samples": 5, "structure": {"family": "genus0"}}"#).unwrap();
    let o = bin().arg("--config").arg(&cfg_path).arg("--out").arg(dir.path().join("missing/dir/r.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin().arg("--config").arg(dir.path().join("absent.json")).arg("--out").arg(dir.path().join("r.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lists_structures() {
    let o = bin().arg("--list-structures").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["genus0", "genus1", "genus2", "benney"] {
        assert!(text.contains(name));
    }
}

#[test]
fn complex_numbers_are_pairs() {
    let two_pi_i = whitham_gt::c64(0.0, std::f64::consts::TAU);
    assert_eq!(serde_json::to_string(&two_pi_i).unwrap(), "[0.0,6.283185307179586]");
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let g0 = json!({"family": "genus0", "n": 2});
    let cases = [
        json!({"command": "collide", "seed": 3, "samples": 30, "tol": 1e-6, "structure": {"family": "genus0", "n": 3},
               "collide": {"groups": [{"base": 0, "depth": 2}]}}),
        json!({"command": "pushforward", "seed": 3, "samples": 30, "tol": 1e-6, "structure": g0,
               "pushforward": {"poly": [[0.0, 0.0], [1.0, 0.0], [0.1, 0.0]]}}),
        json!({"command": "potentials", "seed": 3, "samples": 30, "structure": {"family": "genus1", "n": 2}}),
        json!({"command": "gtsys", "seed": 3, "structure": {"family": "benney", "n": 1},
               "gtsys": {"big_m": 2, "integrate": {"data": {
                   "origin": {"p": [[1.0, 0.5], [-0.8, -0.3]], "v": [[0.1, -0.6]], "w": [[0.5, 0.2], [-0.4, 0.3]]},
                   "p_slope": [[0.3, 0.1], [-0.2, 0.25]], "w_slope": [[0.2, 0.0], [0.0, -0.3]]}}}}),
        json!({"command": "hydro", "seed": 3, "structure": g0}),
        json!({"command": "reconstruct", "seed": 3, "samples": 30, "structure": {"family": "genus1", "n": 2}}),
        json!({"command": "rauch", "seed": 3, "structure": {"family": "genus2"}}),
    ];
    for (k, cfg) in cases.iter().enumerate() {
        let (o, path) = run(dir.path(), &format!("job{k}"), cfg, &[]);
        assert_eq!(o.status.code(), Some(0), "{cfg}\n{}", String::from_utf8_lossy(&o.stdout));
        let doc: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        schema_ok(REPORT_SCHEMA, &doc);
        schema_ok(CONFIG_SCHEMA, &doc["config"]);
    }
}

#[test]
fn shipped_configs_pass() {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        let out = dir.path().join(path.file_name().unwrap());
        let o = bin().arg("--config").arg(&path).arg("--out").arg(&out).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", path.display());
    }
}
