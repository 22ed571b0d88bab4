use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    root.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrfrob"))
        .args(args)
        .env("ARRFROB_THREADS", "2")
        .output()
        .unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("arrfrob-cli-{}-{name}", std::process::id()))
}

#[test]
fn check_passes_on_three_points() {
    let out = run(&[
        "check",
        "--config",
        &config("pts3.json"),
        "--suites",
        "basis,flatness,canonical,potential",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS basis/")));
    assert!(!text.contains("FAIL"));
}

#[test]
fn zero_tolerance_fails_numeric_checks() {
    let out = run(&[
        "check",
        "--config",
        &config("pts3.json"),
        "--suites",
        "canonical",
        "--tol",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        run(&[
            "check",
            "--config",
            &config("pts3.json"),
            "--suites",
            "nonsense"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["basis", "--config", "/nonexistent/family.json"])
            .status
            .code(),
        Some(2)
    );
    let bad = temp_path("balanced.json");
    std::fs::write(&bad, r#"{"k":1,"n":2,"b":[[1],[1]],"weights":[1,-1]}"#).unwrap();
    let out = run(&["basis", "--config", bad.to_str().unwrap()]);
    std::fs::remove_file(&bad).ok();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn critical_points_of_four_lines() {
    let out = run(&["critical", "--config", &config("lines4.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "arrfrob-report/1");
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn json_report_is_deterministic() {
    let (a, b) = (temp_path("a.json"), temp_path("b.json"));
    for (path, threads) in [(&a, "1"), (&b, "4")] {
        let out = Command::new(env!("CARGO_BIN_EXE_arrfrob"))
            .args([
                "check",
                "--config",
                &config("lines4.json"),
                "--suites",
                "circuits,basis,potential",
                "--seed",
                "3",
            ])
            .args(["--json", path.to_str().unwrap()])
            .env("ARRFROB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["schema"], "arrfrob-report/1");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["passed"], true);
}

#[test]
fn gm_flow_emits_one_sample_per_line() {
    let out = run(&["gm-flow", "--config", &config("pts3.json"), "--steps", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["s"], 0.0);
    assert_eq!(first["I"].as_array().unwrap().len(), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("return discrepancy"));
}

#[test]
fn circuits_verb_lists_relations() {
    let out = run(&["circuits", "--config", &config("lines4.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["circuits"].as_array().unwrap().len(), 4);
}
