use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polarity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarity"))
        .args(args)
        .env_remove("POLARITY_THREADS")
        .output()
        .expect("binary runs")
}

fn run(command: &str, config: &Path, out: &Path) -> Output {
    polarity(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SQUARE: &str = r#"{"schema_version": 1, "seed": 1,
    "body": {"variant": "box", "dim": 2, "half_extents": [1, 1]}}"#;

const EPSILON: &str = r#"{"schema_version": 1, "seed": 1, "c": 1, "n": 1, "deltas": [0.5, 1, 2]}"#;

const INTERVAL_SEARCH: &str = r#"{"schema_version": 1, "seed": 11, "exponents": {"p": 2, "q": 2},
    "pair": {"u": {"kind": "constant", "value": 1}, "v": {"kind": "constant", "value": 1}},
    "search": {"parameterization": {"kind": "box", "dim": 1},
               "optimizer": {"kind": "annealing", "steps": 400}}}"#;

#[test]
fn polar_of_the_square_is_the_cross_polytope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "square.json", SQUARE);
    let out = dir.path().join("out");
    let o = run("polar", &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = json(&out.join("polar.json"));
    assert_eq!(p["variant"], "sympoly_v");
    let gens: Vec<f64> = p["generators"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(gens, vec![1.0, 0.0, 0.0, 1.0]);
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["tolerances"]["membership_slack"], 1e-9);
    assert!(!out.join(".polarity.lock").exists());
}

#[test]
fn epsilon_map_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "eps.json", EPSILON);
    let out = dir.path().join("out");
    assert_eq!(run("epsilon-map", &cfg, &out).status.code(), Some(0));
    let text = fs::read_to_string(out.join("epsilon_map.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let expect = [(0.5, 1.0 / 6.0), (1.0, 0.25), (2.0, 1.0 / 3.0)];
    assert_eq!(rows.len(), 3);
    for ((d, e), (d0, e0)) in rows.iter().zip(expect) {
        assert_eq!(*d, d0);
        assert!((e - e0).abs() < 1e-12);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn missing_seed_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "exponents": {"p": 2, "q": 2},
            "pair": {"u": {"kind": "constant", "value": 1}, "v": {"kind": "constant", "value": 1}}}"#,
    );
    let out = dir.path().join("out");
    let o = run("check-condition", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!out.exists());
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mismatched = SQUARE.replace(r#""seed": 1,"#, r#""seed": 1, "command": "mahler","#);
    let cases = [
        ("region", r#"{"schema_version": 1, "seed": 0, "exponents": {"p": 0.5, "q": 2}, "case": "b"}"#),
        ("region", r#"{"schema_version": 2, "seed": 0, "exponents": {"p": 2, "q": 4}, "case": "b"}"#),
        ("region", r#"{"schema_version": 1, "seed": -4, "exponents": {"p": 2, "q": 4}, "case": "b"}"#),
        ("region", r#"{"schema_version": 1, "seed": 0, "exponents": {"p": 2, "q": 4}, "case": "b", "extra": 1}"#),
        ("polar", mismatched.as_str()),
    ];
    for (i, (cmd, text)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("c{i}.json"), text);
        let out = dir.path().join(format!("out{i}"));
        assert_eq!(run(cmd, &cfg, &out).status.code(), Some(2), "case {i}");
        assert!(!out.exists());
    }
}

#[test]
fn module_errors_exit_3_and_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "off.json",
        r#"{"schema_version": 1, "seed": 0, "body": {"variant": "box", "dim": 2, "center": [3, 0], "half_extents": [1, 1]}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run("polar", &cfg, &out).status.code(), Some(3));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["error"]["name"], "BodyNotContainingOrigin");
    assert_eq!(m["exit_code"], 3);
}

#[test]
fn reproduce_passes_then_detects_an_edited_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "search.json", INTERVAL_SEARCH);
    let out = dir.path().join("out");
    assert_eq!(run("conjecture", &cfg, &out).status.code(), Some(0));
    let manifest = out.join("manifest.json");
    assert_eq!(polarity(&["reproduce", manifest.to_str().unwrap()]).status.code(), Some(0));
    let report = json(&out.join("report.json"));
    assert!((report["report"]["search"]["best_value"].as_f64().unwrap() - 2.0).abs() < 0.02);
    fs::write(&cfg, INTERVAL_SEARCH.replace("400", "500")).unwrap();
    assert_eq!(polarity(&["reproduce", manifest.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reproduce_flags_changed_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "eps.json", EPSILON);
    let out = dir.path().join("out");
    assert_eq!(run("epsilon-map", &cfg, &out).status.code(), Some(0));
    let csv = out.join("epsilon_map.csv");
    let text = fs::read_to_string(&csv).unwrap().replace("0.25", "0.26");
    fs::write(&csv, text).unwrap();
    assert_eq!(polarity(&["reproduce", out.join("manifest.json").to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn equal_config_and_seed_give_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "search.json", INTERVAL_SEARCH);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("conjecture", &cfg, &a).status.success());
    assert!(run("conjecture", &cfg, &b).status.success());
    assert_eq!(fs::read(a.join("trajectory.csv")).unwrap(), fs::read(b.join("trajectory.csv")).unwrap());
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn seed_override_is_recorded_and_reproduced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "search.json", INTERVAL_SEARCH);
    let out = dir.path().join("out");
    let o = polarity(&[
        "conjecture",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed-override",
        "99",
    ]);
    assert!(o.status.success());
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["seed"], 99);
    assert_eq!(m["seed_override"], 99);
    assert_eq!(polarity(&["reproduce", out.join("manifest.json").to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn locked_output_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "eps.json", EPSILON);
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join(".polarity.lock"), "1").unwrap();
    let o = run("epsilon-map", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "eps.json", EPSILON);
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_polarity"))
        .args(["epsilon-map", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("POLARITY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_polarity"))
        .args(["epsilon-map", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("POLARITY_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&out.join("manifest.json"))["threads"], 2);
}

#[test]
fn mahler_of_the_square_is_exactly_eight() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"schema_version": 1, "seed": 0, "body": {"variant": "box", "dim": 2, "half_extents": [2, 0.5]},
            "method": {"method": "exact"}}"#,
    );
    let out = dir.path().join("out");
    assert!(run("mahler", &cfg, &out).status.success());
    let r = json(&out.join("report.json"));
    assert_eq!(r["accuracy"]["method"], "exact");
    assert!((r["report"]["mahler_volume"]["value"].as_f64().unwrap() - 8.0).abs() < 1e-12);
}

#[test]
fn shipped_configs_run_and_reproduce() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let mut ran = 0;
    for entry in fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        let command = json(&path)["command"].as_str().unwrap().to_string();
        let out = dir.path().join(path.file_stem().unwrap());
        let o = run(&command, &path, &out);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        let m = out.join("manifest.json");
        assert_eq!(polarity(&["reproduce", m.to_str().unwrap()]).status.code(), Some(0), "{}", path.display());
        ran += 1;
    }
    assert!(ran >= 8);
}
