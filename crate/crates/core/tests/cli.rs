use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jensen-bounds"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jensen-bounds-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const HAND: &str = r#"{"function":{"kind":"power","n":2,"domain":[0,1]},
"x":[0,1],"p":[0.25,0.75],"q":[0.5,0.5],"theorem":"thm19_lower"}"#;

#[test]
fn check_hand_instance() {
    let path = scratch("hand.json");
    std::fs::write(&path, HAND).unwrap();
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["lhs"], 0.0625);
    assert_eq!(v["report"]["rhs"], 0.0625);
    assert_eq!(v["manifest"]["command"], "check");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_output_carries_manifest() {
    let out = run(&["check", HAND, "--format", "csv", "--tol-abs", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# version: "));
    let manifest = lines.next().unwrap();
    assert!(manifest.contains("\"tol_abs\":1e-6"), "{manifest}");
    assert_eq!(lines.next(), Some("theorem,term,value"));
    assert!(text.contains("thm19_lower,lhs,0.0625"));
}

#[test]
fn violation_exits_two() {
    let inst = r#"{"function":{"kind":"power","n":2,"domain":[0,4]},
"x":[0.3,1.7,2.2,3.9,0.8],"a":[0.1,0.3,0.2,0.15,0.25],
"class":"phi_convex","error_scale":2.5}"#;
    assert_eq!(
        run(&["check", inst, "--theorem", "thm13_printed"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check", inst, "--theorem", "thm13"]).status.code(),
        Some(0)
    );
}

#[test]
fn errors_exit_one() {
    let out = run(&["fuzz", r#"{"seed":1,"trials":0}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));

    let out = run(&[
        "check",
        "{\"function\":{\"kind\":\"power\",\"n\":2,\"domain\":[0,1]},\n\"x\":[0,1],\"lamda\":[1]}",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("lamda"), "{err}");

    // Steffensen prefix above A_n
    let out = run(&[
        "check",
        r#"{"function":{"kind":"power","n":2,"domain":[0,4]},"x":[1,2,3],"a":[0.6,0.6,-0.5]}"#,
        "--theorem",
        "thm6",
    ]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(
        run(&["sweep", HAND, "--theorem", "thm7"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["check", HAND, "--format", "xml"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["check", "/nonexistent/instance.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn sweep_emits_rows() {
    let inst = r#"{"function":{"kind":"power","n":2,"domain":[0,2]},"x":[0,2],"a":[0.5,0.5],"class":"superquadratic"}"#;
    let out = run(&[
        "sweep",
        inst,
        "--theorem",
        "thm16",
        "--density",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,lhs,mid,rhs,slack,pass");
    assert_eq!(rows.len(), 6);
    assert!(rows[5].starts_with("1.0,0.0,0.0,0.0,"));
}

#[test]
fn certify_reports() {
    let cube = r#"{"kind":"power","n":3,"domain":[0,4]}"#;
    assert_eq!(
        run(&["certify", cube, "--class", "superquadratic"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["certify", cube, "--superadditive"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["certify", cube, "--superadditive", "--phi-scale", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["certify", cube]).status.code(), Some(1));
}

#[test]
fn fuzz_writes_identical_files() {
    let cfg = r#"{"seed":7,"trials":15,"theorem_set":["thm7","thm13","thm19_lower"]}"#;
    let (a, b) = (scratch("fuzz_a.json"), scratch("fuzz_b.json"));
    for p in [&a, &b] {
        let out = run(&["fuzz", cfg, "--out", p.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["summary"]["theorems"]["thm7"]["trials"], 15);

    let out = run(&["fuzz", cfg, "--seed", "8", "--trials", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["seed"], 8);
    assert_eq!(v["summary"]["config"]["seed"], 8);
    assert_eq!(v["summary"]["theorems"]["thm7"]["trials"], 3);
}
