use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn fixiter(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixiter"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FIXITER_MAX_ITERS")
        .output()
        .unwrap()
}

fn table_csv(cfg: &str, dir: &Path) -> String {
    let out = dir.join("table.csv");
    let o = fixiter(&["table", "--config", config(cfg).to_str().unwrap(), "--out", out.to_str().unwrap()], dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(out).unwrap()
}

#[test]
fn tables_one_and_two_match_golden_bytes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(table_csv("sahu_table1.json", dir.path()), golden("table1.csv"));
    assert_eq!(table_csv("sahu_table2.json", dir.path()), golden("table2.csv"));
}

#[test]
fn table_three_matches_printed_rows() {
    let dir = TempDir::new().unwrap();
    let produced = table_csv("sahu_table3.json", dir.path());
    let lines: Vec<&str> = produced.lines().collect();
    assert_eq!(lines.len(), 48);
    let expected = golden("table3.csv");
    let mut expected = expected.lines();
    assert_eq!(lines[0], expected.next().unwrap());
    for row in expected {
        let n: usize = row.split(',').next().unwrap().parse().unwrap();
        assert_eq!(lines[n], row);
    }
}

#[test]
fn config_output_path_and_json_format() {
    let dir = TempDir::new().unwrap();
    let o = fixiter(&["table", "--config", config("sahu_table1.json").to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(dir.path().join("table1.csv")).unwrap(), golden("table1.csv"));

    let out = dir.path().join("t.json");
    let o = fixiter(
        &["table", "--config", config("sahu_table1.json").to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"],
        dir.path(),
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["schemes"][0], "Picard-S");
    assert_eq!(v["rows"][0]["values"][1], "12.99923955");
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for cfg in ["sahu_table1.json", "sahu_table3.json", "exp_expr.json"] {
        assert_eq!(table_csv(cfg, dir.path()), table_csv(cfg, dir.path()));
    }
    let dde = |name: &str| {
        let out = dir.path().join(name);
        let problem = config("dde_worked.json");
        let args = ["dde", "--problem", problem.to_str().unwrap(), "--step", "0.001", "--tol", "1e-10", "--out", out.to_str().unwrap()];
        let o = fixiter(&args, dir.path());
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(dde("a.csv"), dde("b.csv"));
    let compare = || fixiter(&["compare", "--config", config("sahu_compare.json").to_str().unwrap(), "--a", "Picard-S", "--b", "CR"], dir.path()).stdout;
    assert_eq!(compare(), compare());
}

#[test]
fn compare_verdicts() {
    let dir = TempDir::new().unwrap();
    let verdict = |a: &str, b: &str| {
        let o = fixiter(&["compare", "--config", config("sahu_compare.json").to_str().unwrap(), "--a", a, "--b", b], dir.path());
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["classification"].as_str().unwrap().to_string()
    };
    assert_eq!(verdict("Picard-S", "CR"), "FasterA");
    assert_eq!(verdict("Noor", "Noor"), "SameRate");
    assert_eq!(verdict("Picard", "SP"), "FasterA");
    assert_eq!(verdict("Mann", "Picard-S"), "FasterB");
    let o = fixiter(&["compare", "--config", config("sahu_compare.json").to_str().unwrap(), "--a", "Halpern", "--b", "CR"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dde_worked_example_and_gates() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let run = |problem: &str| {
        fixiter(
            &["dde", "--problem", config(problem).to_str().unwrap(), "--step", "0.001", "--tol", "1e-10", "--out", out.to_str().unwrap()],
            dir.path(),
        )
    };
    let o = run("dde_worked.json");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["x_end"].as_f64().unwrap() - 1.42).abs() < 1e-5);
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,x\n"));
    assert_eq!(csv.lines().count(), 602);

    let o = run("dde_long.json");
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A5"));

    let o = run("dde_zero.json");
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    for line in csv.lines().skip(1) {
        let (t, x) = line.split_once(',').unwrap();
        if t.parse::<f64>().unwrap() >= 0.0 {
            assert_eq!(x, "2.0000000000000000");
        }
    }
}

#[test]
fn dde_default_output_path() {
    let dir = TempDir::new().unwrap();
    let o = fixiter(&["dde", "--problem", config("dde_zero.json").to_str().unwrap(), "--step", "0.1", "--tol", "1e-12"], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("dde_zero_solution.csv").exists());
}

#[test]
fn datadep_command() {
    let dir = TempDir::new().unwrap();
    let run = |cfg: &Path, eps: &str, c: &str| fixiter(&["datadep", "--config", cfg.to_str().unwrap(), "--epsilon", eps, "--perturb", c], dir.path());
    let o = run(&config("sahu_datadep.json"), "0.05", "0.05");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["satisfied"], true);
    let o = run(&config("sahu_datadep.json"), "0.05", "0");
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["empirical_gap"], 0.0);
    let o = run(&config("sahu_datadep.json"), "0.02", "-0.02");
    assert!(o.status.success());

    let o = run(&config("sahu_table1.json"), "0.05", "0.05");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis (i)"));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"map": {"kind": "sahu"}, "x0": 1, "schemes": []}"#).unwrap();
    assert_eq!(fixiter(&["table", "--config", bad.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(fixiter(&["table", "--config", "missing.json"], dir.path()).status.code(), Some(2));

    let nan = dir.path().join("nan.json");
    fs::write(&nan, r#"{"map": {"kind": "expr", "expr": "sqrt(x - 10)", "delta": 0.5, "fixed_point": 0}, "x0": 1, "schemes": ["Mann"]}"#).unwrap();
    assert_eq!(fixiter(&["table", "--config", nan.to_str().unwrap()], dir.path()).status.code(), Some(3));
}

#[test]
fn max_iters_environment_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("mann.json");
    fs::write(&cfg, r#"{"map": {"kind": "sahu"}, "x0": 1000, "schemes": ["Mann"], "arithmetic": "f64"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fixiter"))
        .args(["table", "--config", cfg.to_str().unwrap()])
        .env("FIXITER_MAX_ITERS", "7")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 8);
    let o = Command::new(env!("CARGO_BIN_EXE_fixiter"))
        .args(["table", "--config", cfg.to_str().unwrap()])
        .env("FIXITER_MAX_ITERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
