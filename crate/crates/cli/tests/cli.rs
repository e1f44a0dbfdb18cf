use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 3

[base]
kind = "rotation"

[model]
family = "manneville-pomeau"
beta = 0.5

[potential]
kind = "cosine"
amplitude = 0.02

[numerics]
grid = 256
window = 16
burn_in = 96
samples = 2

[hypotheses]
samples = 32
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> (Output, std::path::PathBuf) {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_qthermo"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (output, out)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_triple_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(dir.path(), SMALL, &["solve-triple"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let manifest = json(&out.join("manifest.json"));
    for key in ["command", "config", "seed", "version", "started", "elapsed_s", "outputs"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest["command"], "solve-triple");
    assert_eq!(manifest["seed"], 3);
    for file in manifest["outputs"].as_array().unwrap() {
        assert!(out.join(file.as_str().unwrap()).exists(), "{file} listed but missing");
    }
    let lambda = std::fs::read_to_string(out.join("lambda.csv")).unwrap();
    assert_eq!(lambda.lines().next(), Some("j,lambda"));
    assert_eq!(lambda.lines().count(), 17);
    let resolved = std::fs::read_to_string(out.join("config.resolved.toml")).unwrap();
    assert!(resolved.contains("grid = 256"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(dir.path(), SMALL, &["threshold", "--seed", "99"]);
    assert!(output.status.success());
    assert_eq!(json(&out.join("manifest.json"))["seed"], 99);
    assert_eq!(json(&out.join("threshold.json"))["threshold"]["status"], "applicable");
}

#[test]
fn config_errors_exit_with_two_and_suggest_keys() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL.replace("samples = 2", "sampels = 2").replace("amplitude = 0.02", "amplitude = \"big\"");
    let (output, out) = run(dir.path(), &bad, &["solve-triple"]);
    assert_eq!(output.status.code(), Some(2));
    let err = json(&out.join("error.json"));
    assert_eq!(err["kind"], "config");
    let details: Vec<String> = err["details"].as_array().unwrap().iter().map(|d| d.as_str().unwrap().to_string()).collect();
    assert!(details.iter().any(|d| d.contains("did you mean `numerics.samples`")), "{details:?}");
    assert!(details.iter().any(|d| d.contains("potential.amplitude")), "{details:?}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let strong = SMALL.replace("amplitude = 0.02", "amplitude = 0.2");
    let (output, out) = run(dir.path(), &strong, &["check-hypotheses"]);
    assert_eq!(output.status.code(), Some(1), "{}", String::from_utf8_lossy(&output.stderr));
    let err = json(&out.join("error.json"));
    assert_eq!(err["kind"], "assertion");
    assert!(out.join("hypotheses.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn passing_checks_exit_with_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (output, out) = run(dir.path(), SMALL, &["check-hypotheses"]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report = json(&out.join("hypotheses.json"));
    assert_eq!(report["p"]["verdict"], "holds");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_qthermo"))
        .args(["gibbs", "--config"])
        .arg(dir.path().join("absent.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(out.join("error.json").exists());
}
