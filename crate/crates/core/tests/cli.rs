use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cylsde"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

const STABLE_HEAT: &str = r#"{
  "seed": 9,
  "operator": { "n_modes": 8, "horizon": 1.0, "lambda": { "rule": "power", "exponent": 2.0 } },
  "noise": { "kind": "series", "law": { "type": "stable", "alpha": 1.5, "scale": 1.0 } },
  "grid": { "steps": 16 }
}"#;

const DIVERGENT: &str = r#"{
  "operator": { "n_modes": 2048, "horizon": 1.0, "lambda": { "rule": "power", "exponent": 1.0 } },
  "noise": { "kind": "series", "law": { "type": "stable", "alpha": 1.0, "scale": 1.0 } },
  "grid": { "steps": 4 }
}"#;

#[test]
fn simulate_writes_path_with_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), STABLE_HEAT);
    let out = tmp.path().join("out");
    let o = run(&["simulate"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("path.csv")).unwrap();
    assert!(csv.starts_with("# scheme=series_exact\n"));
    assert!(csv.contains("# seed=9\n"));
    assert!(csv.contains("\nt,mode,coeff\n"));
    // 17 nodes, 8 modes.
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 17 * 8);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("overall,pass,,"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), STABLE_HEAT);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(&["simulate"], &cfg, &a);
    bin().args(["simulate", "--seed", "10", "--config"]).arg(&cfg).arg("--out").arg(&b).output().unwrap();
    let pa = fs::read_to_string(a.join("path.csv")).unwrap();
    let pb = fs::read_to_string(b.join("path.csv")).unwrap();
    assert_ne!(pa, pb);
    assert!(pb.contains("# seed=10\n"));
}

#[test]
fn non_integrable_configs_are_refused_unless_forced() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DIVERGENT);
    let out = tmp.path().join("out");
    let check = run(&["check"], &cfg, &out);
    assert_eq!(check.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&check.stdout).contains("integrability_series_stable,fail"));

    let refused = run(&["simulate"], &cfg, &out);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));
    assert!(!out.join("path.csv").exists());

    let forced = bin().arg("simulate").arg("--force").arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(forced.status.code(), Some(1));
    assert!(out.join("path.csv").exists());
}

#[test]
fn config_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &STABLE_HEAT.replace("\"exponent\": 2.0", "\"exponent\": \"two\""));
    let o = run(&["check"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(64));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("operator.lambda.exponent"), "{err}");

    let cfg = write_config(tmp.path(), "{ \"seed\": 1,\n  \"operator\": }");
    let o = run(&["check"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn usage_errors_do_not_collide_with_inconclusive() {
    let o = bin().args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(o.status.code(), Some(64));
    let o = bin().arg("check").output().unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn verifier_needs_its_experiment_block_to_be_an_object() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &STABLE_HEAT.replace("\"grid\"", "\"experiment\": { \"flow\": 3 },\n  \"grid\""));
    let o = run(&["verify", "flow"], &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment.flow"));
}

#[test]
fn verify_flow_defaults_without_experiment_block() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), STABLE_HEAT);
    let out = tmp.path().join("out");
    let o = run(&["verify", "flow"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows = fs::read_to_string(out.join("flow.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
    assert!(out.join("timings.txt").exists());
}
