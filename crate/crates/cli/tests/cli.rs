use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pauli");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn pauli(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).env("PAULI_OUT_DIR", out).output().expect("spawn pauli")
}

fn run_dir(o: &Output) -> PathBuf {
    let stdout = String::from_utf8_lossy(&o.stdout);
    PathBuf::from(stdout.lines().next().expect("run dir line").trim())
}

fn summary(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("summary.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn flux_of_the_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("disk-flux.toml");
    let o = pauli(&["flux", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&o);
    assert!(dir.starts_with(tmp.path()));
    let s = summary(&dir);
    assert!((s["outputs"]["flux"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert_eq!(s["outputs"]["integer_part"], 2);
    assert_eq!(s["passed"], true);
    assert_eq!(s["task"], "flux");
}

#[test]
fn certify_finds_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("disk-certify.toml");
    let o = pauli(&["certify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS count_lower_bound"));
    let s = summary(&run_dir(&o));
    assert!(s["outputs"]["count_lower_bound"].as_f64().unwrap() >= 3.0);
}

#[test]
fn identity_on_two_bumps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("two-bump-identity.toml");
    let o = pauli(&["identity", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failing_assertion_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[[assert]]\nmetric = \"flux\"\nop = \"<\"\nvalue = 1\n",
    );
    let o = pauli(&["flux", "--config", cfg.to_str().unwrap()], &tmp.path().join("runs"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL flux"));
    assert_eq!(summary(&run_dir(&o))["passed"], false);
}

#[test]
fn missing_metric_fails_the_assertion() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[[assert]]\nmetric = \"no.such.path\"\nop = \">\"\nvalue = 0\n",
    );
    let o = pauli(&["flux", "--config", cfg.to_str().unwrap()], &tmp.path().join("runs"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_one_with_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[physics]\nlambdas = [0.5, -2]\n");
    let o = pauli(&["spectrum", "--config", cfg.to_str().unwrap()], &tmp.path().join("runs"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("physics.lambdas[1]"));
    assert!(!tmp.path().join("runs").exists(), "no run dir for a rejected config");
}

#[test]
fn unknown_key_and_task_mismatch_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[numerics]\nplanar_hh = 0.1\n");
    let o = pauli(&["flux", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("planar_hh"));

    let cfg = scenario("disk-flux.toml");
    let o = pauli(&["certify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_error_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pauli(&["flux"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = pauli(&["--help"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reruns_are_deterministic_and_append_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "task = \"spectrum\"\n[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[physics]\ng = 2.5\nell_max = 2\n",
    );
    let args = ["spectrum", "--config", cfg.to_str().unwrap(), "--seed", "7"];
    let out = tmp.path().join("runs");
    let a = pauli(&args, &out);
    let b = pauli(&args, &out);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let (da, db) = (run_dir(&a), run_dir(&b));
    assert_ne!(da, db);
    assert!(da.to_string_lossy().ends_with("-001") && db.to_string_lossy().ends_with("-002"));
    let ta = std::fs::read(da.join("spectrum.csv")).unwrap();
    let tb = std::fs::read(db.join("spectrum.csv")).unwrap();
    assert_eq!(ta, tb);
    let (sa, sb) = (summary(&da), summary(&db));
    assert_eq!(sa["config_hash"], sb["config_hash"]);
    assert_eq!(sa["seed"], 7);
}

#[test]
fn out_flag_beats_env() {
    let tmp = tempfile::tempdir().unwrap();
    let flag = tmp.path().join("flag");
    let cfg = scenario("disk-flux.toml");
    let o = pauli(&["flux", "--config", cfg.to_str().unwrap(), "--out", flag.to_str().unwrap()], &tmp.path().join("env"));
    assert_eq!(o.status.code(), Some(0));
    assert!(run_dir(&o).starts_with(&flag));
    assert!(!tmp.path().join("env").exists());
}

#[test]
fn json_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[profile]\nkind = \"builtin\"\nname = \"uniform-disk\"\n[physics]\ng = 2.5\n");
    let o = pauli(&["spectrum", "--config", cfg.to_str().unwrap(), "--format", "json"], &tmp.path().join("runs"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Value = serde_json::from_slice(&std::fs::read(run_dir(&o).join("spectrum.json")).unwrap()).unwrap();
    assert!(rows.as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn profiles_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pauli(&["profiles"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("name,kind,flux"));
    assert!(text.contains("uniform-disk"));
    let o = pauli(&["profiles", "--format", "json"], tmp.path());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_array().is_some_and(|a| a.len() > 3));
}
