use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_grushin-lab"));
    c.env_remove("GRUSHIN_LAB_WORKERS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    let mut c = bin();
    c.args(args).arg("--out").arg(out);
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check_schema(command: &str, report: &Path) -> Value {
    let schema = read_json(&schema_dir().join(format!("{command}.schema.json")));
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let value = read_json(report);
    if let Err(errors) = compiled.validate(&value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{command} report violates its schema: {msgs:?}");
    }
    value
}

fn ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

const FLAT: [&str; 8] = [
    "minimal-time",
    "--profile",
    "monomial:1",
    "--L",
    "1",
    "--zone",
    "0.5:1",
    "--xi",
];

#[test]
fn minimal_time_flat_measure() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = FLAT.to_vec();
    args.push("64,91,128,181,256,362,512");
    let o = run(&args, dir.path());
    ok(&o);
    let v = check_schema("minimal-time", &dir.path().join("minimal-time.json"));
    let t = v["T_lower"].as_f64().unwrap();
    assert!((0.10..=0.15).contains(&t), "{t}");
    assert!(dir.path().join("ratios.csv").exists());
}

#[test]
fn minimal_time_unbounded_for_gamma_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "minimal-time", "--profile", "monomial:2", "--L", "3", "--n", "4095", "--zone", "2.5:3", "--xi",
            "16,23,32,45,64,91,128", "--T", "0.1,1,10",
        ],
        dir.path(),
    );
    ok(&o);
    let v = check_schema("minimal-time", &dir.path().join("minimal-time.json"));
    assert_eq!(v["T_lower"], "unbounded");
}

#[test]
fn localized_sweep_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = FLAT.to_vec();
    args.extend(["64,91,128,181,256", "--localized-delta", "4", "--nodes", "8"]);
    let o = run(&args, dir.path());
    ok(&o);
    let v = check_schema("minimal-time", &dir.path().join("minimal-time.json"));
    assert!(v["localized_delta"].is_number());
    assert!(dir.path().join("localized.csv").exists());
}

#[test]
fn validate_reports_order_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--profile", "monomial:2", "--gamma", "1"], dir.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("q^(1)(0)"), "{err}");
    let v = check_schema("validate", &dir.path().join("validate.json"));
    assert_eq!(v["pass"], false);
    let ok_dir = tempfile::tempdir().unwrap();
    ok(&run(&["validate", "--profile", "poly:0,1,0,0.3"], ok_dir.path()));
}

#[test]
fn bump_check_partition_residual() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["bump-check", "--R", "1", "--delta", "0.5"], dir.path()));
    let csv = fs::read_to_string(dir.path().join("bump-check.csv")).unwrap();
    let worst = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
    check_schema("bump-check", &dir.path().join("bump-check.json"));
}

#[test]
fn every_report_matches_its_schema() {
    let cases: [(&str, Vec<&str>); 6] = [
        ("spectrum", vec!["--profile", "monomial:1", "--n", "1023", "--xi", "8,16", "--count", "3", "--export-operator"]),
        ("asymptotics", vec!["--profile", "monomial:2", "--n", "2047", "--xi", "16,32,64,128,256"]),
        ("agmon", vec!["--profile", "poly:0,1,0,0.3", "--delta", "0.01", "--zone", "0.5:1", "--n", "1023"]),
        ("decay", vec!["--profile", "monomial:1", "--n", "2047", "--zone", "-1:-0.5,0.5:1", "--xi", "32,64"]),
        ("simulate", vec!["--n", "63", "--ny", "31", "--mode", "1,2", "--T", "0.01", "--dt", "1e-3", "--snapshot"]),
        ("koenig-demo", vec!["--stages", "8,16,24", "--samples", "512"]),
    ];
    for (cmd, extra) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec![cmd];
        args.extend(extra);
        ok(&run(&args, dir.path()));
        check_schema(cmd, &dir.path().join(format!("{cmd}.json")));
    }
}

#[test]
fn simulate_tracks_eigenmode_decay() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["simulate", "--n", "127", "--ny", "63", "--mode", "1,4", "--T", "0.05", "--dt", "1e-3"], dir.path()));
    let v = read_json(&dir.path().join("simulate.json"));
    assert!(v["max_rel_error"].as_f64().unwrap() < 5e-3);
    assert!(v["norm_violation"].is_null());
    let norms = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert_eq!(norms.lines().count(), 52);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# flat measure\nprofile = monomial:1\nzone = 0.5:1\nxi = 64,91,128,181,256\nT = 0.1\n").unwrap();
    let a = dir.path().join("a");
    let o = bin().args(["minimal-time", "--config"]).arg(&cfg).arg("--out").arg(&a).output().unwrap();
    ok(&o);
    let from_file = read_json(&a.join("minimal-time.json"));
    assert_eq!(from_file["frequencies"].as_array().unwrap().len(), 5);
    let b = dir.path().join("b");
    let o = bin()
        .args(["minimal-time", "--config"])
        .arg(&cfg)
        .args(["--xi", "64,128,256,512,1024,2048"])
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    ok(&o);
    let overridden = read_json(&b.join("minimal-time.json"));
    assert_eq!(overridden["frequencies"].as_array().unwrap().len(), 6);
    fs::write(&cfg, "profile = monomial:1\ncolour = blue\n").unwrap();
    let o = bin().args(["minimal-time", "--config"]).arg(&cfg).arg("--out").arg(&a).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(workers);
        let mut args = FLAT.to_vec();
        args.push("64,91,128,181,256,362");
        let o = bin().env("GRUSHIN_LAB_WORKERS", workers).args(&args).arg("--out").arg(&out).output().unwrap();
        ok(&o);
        reports.push((
            fs::read(out.join("minimal-time.json")).unwrap(),
            fs::read(out.join("ratios.csv")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // resolution rule
    let o = run(&["decay", "--profile", "monomial:1", "--n", "31", "--zone", "0.5:1", "--xi", "4096"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    // CG starved of iterations
    let o = run(&["simulate", "--n", "63", "--ny", "31", "--mode", "2,3", "--T", "0.01", "--dt", "1e-3", "--cg-tol", "1e-300"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    // above the time threshold
    let o = run(&["koenig-demo", "--T", "0.2"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["spectrum", "--profile", "monomial:1", "--xi", "2,1"], dir.path());
    assert_eq!(code(&o), 2);
    let o = run(&["spectrum", "--frobnicate"], dir.path());
    assert_eq!(code(&o), 2);
    let o = bin().env("GRUSHIN_LAB_WORKERS", "0").args(["bump-check", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = run(&["spectrum", "--profile", "monomial:1", "--xi", "1", "--potential", "table:/nonexistent.csv"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn tabulated_and_file_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("q.csv");
    let mut text = String::from("x,value\n");
    for k in 0..=200 {
        let x = -1.0 + k as f64 / 100.0;
        text.push_str(&format!("{x},{}\n", x + 0.3 * x * x * x));
    }
    fs::write(&table, text).unwrap();
    let spec = dir.path().join("q.kv");
    fs::write(&spec, "form = tabulated\ntable = q.csv\ngamma = 1\nL_minus = 1\nL_plus = 1\n").unwrap();
    let out = dir.path().join("o");
    let o = bin()
        .args(["agmon", "--profile-file"])
        .arg(&spec)
        .args(["--zone", "0.5:1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    let v = check_schema("agmon", &out.join("agmon.json"));
    let d = v["zone_distance"].as_f64().unwrap();
    // ∫_0^0.5 x + 0.3x³ dx
    assert!((d - (0.125 + 0.3 * 0.0625 / 4.0)).abs() < 1e-3, "{d}");
    let arg = format!("table:{}", table.display());
    let o = bin().args(["agmon", "--profile", &arg, "--out"]).arg(&out).output().unwrap();
    ok(&o);
}
