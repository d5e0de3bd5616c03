//! End-to-end runs of the `surflab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_surflab"));
    c.env_remove("SURFLAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn config_file(name: &str, text: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn families_lists_the_catalog() {
    let o = run(&["families"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with(' '))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert!(ids.len() >= 12, "{ids:?}");
    assert!(ids.contains(&"classA/nullscroll"));

    let o = run(&["families", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), ids.len());
    assert!(arr
        .iter()
        .all(|s| s["id"].is_string() && s["params"].is_object()));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["families", "--bogus"])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&run(&["construct", "--config", "x.toml"])), 2);
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn construct_writes_a_v_major_mesh() {
    let cfg = configs().join("classA-e31.toml");
    let out = scratch("e31.csv");
    let o = run(&[
        "construct",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# "));
    assert_eq!(lines[1], "u,v,x0,x1,x2,z,e,h1,h2,h3");
    let rows: Vec<Vec<f64>> = lines[2..]
        .iter()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 441);
    assert!(lines[1..].iter().all(|l| !l.starts_with('#')));
    assert!(rows.iter().all(|r| r.len() == 10));
    // v-major: u varies fastest; generated form has z = u
    assert_eq!(rows[0][1], rows[20][1]);
    assert!(rows[1][0] > rows[0][0]);
    assert!(rows[21][1] > rows[0][1]);
    assert!(rows.iter().all(|r| r[5] == r[0]));

    let again = scratch("e31-again.csv");
    let o = run(&[
        "construct",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn parameter_domain_errors_exit_three() {
    let cfg = configs().join("totumb-h31-k0.toml");
    let o = run(&[
        "construct",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        scratch("never.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("params.k"), "{}", stderr(&o));

    let bad = config_file(
        "unknown-key.toml",
        "family = \"classA/e31\"\nwarpping = 1\n",
    );
    let o = run(&["analyze", "--config", &bad, "--report", "/dev/null"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("unknown-key.toml"), "{}", stderr(&o));

    let o = run(&[
        "analyze",
        "--config",
        "/nonexistent.toml",
        "--report",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 3);
}

fn verdicts(config: &str) -> Value {
    let report = scratch(&format!("{}.json", config.replace('/', "_")));
    let o = run(&[
        "classify",
        "--config",
        config,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let mut out = serde_json::Map::new();
    for p in v["properties"].as_array().unwrap() {
        out.insert(
            p["property"].as_str().unwrap().to_string(),
            p["verdict"].clone(),
        );
    }
    assert_eq!(v["shape_samples"].as_array().unwrap().len(), 5);
    Value::Object(out)
}

#[test]
fn classification_reports() {
    let quadric = verdicts(&config_file(
        "quadric.toml",
        "family = \"classA/h31-quadric\"\n",
    ));
    assert_eq!(quadric["class_a"], "pass");

    let cone = verdicts(configs().join("pseudoumb-e31-cone.json").to_str().unwrap());
    assert_eq!(cone["class_a"], "fail");
    assert_eq!(cone["pseudo_umbilical"], "pass");
    assert_eq!(cone["flat_normal_bundle"], "pass");

    let s31 = verdicts(&config_file("s31.toml", "family = \"classA/s31\"\n"));
    assert_eq!(s31["pseudo_umbilical"], "fail");
}

#[test]
fn numerics_suite_is_fast_and_passes() {
    let start = Instant::now();
    let o = run(&["verify", "--suite", "numerics"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for e in v["entries"].as_array().unwrap() {
        for key in [
            "suite",
            "case",
            "quantity",
            "residual",
            "tolerance",
            "verdict",
        ] {
            assert!(e.get(key).is_some(), "{key} missing in {e}");
        }
    }
}

#[test]
fn corrupted_fixture_fails_with_the_case_listed() {
    let dir = scratch("corrupted");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("cone.toml"),
        "family = \"pseudoumb/e31-cone\"\n\n[expect]\nclass_a = \"pass\"\n",
    )
    .unwrap();
    let o = run(&[
        "verify",
        "--suite",
        "numerics",
        "--config-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(
        err.lines()
            .any(|l| l.starts_with("FAIL fixtures cone:") && l.contains("class_a")),
        "{err}"
    );
}

#[test]
fn shipped_fixtures_pass() {
    let o = run(&[
        "verify",
        "--suite",
        "numerics",
        "--config-dir",
        configs().join("fixtures").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn missing_config_dir_exits_three() {
    let o = run(&[
        "verify",
        "--suite",
        "numerics",
        "--config-dir",
        "/nonexistent-dir",
    ]);
    assert_eq!(code(&o), 3);
    let empty = scratch("empty-dir");
    std::fs::create_dir_all(&empty).unwrap();
    let o = run(&[
        "verify",
        "--suite",
        "numerics",
        "--config-dir",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["verify", "--suite", "frames"];
    let default = run(&args);
    let capped = bin()
        .args(args)
        .env("SURFLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&default), 0);
    assert_eq!(default.stdout, capped.stdout);
    let bad = bin()
        .args(["families"])
        .env("SURFLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 3);
}
