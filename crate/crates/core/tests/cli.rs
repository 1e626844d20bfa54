use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

static COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Problem file in the temp directory, removed on drop.
struct Scratch(PathBuf);

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn problem(src: &str) -> Scratch {
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let path = std::env::temp_dir().join(format!("workbench-cli-{}-{n}.json", std::process::id()));
    std::fs::File::create(&path)
        .unwrap()
        .write_all(src.as_bytes())
        .unwrap();
    Scratch(path)
}

fn workbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(args)
        .env_remove("WORKBENCH_THREADS")
        .output()
        .unwrap()
}

fn run(src: &str, extra: &[&str]) -> (i32, String, String) {
    let f = problem(src);
    let mut args = vec!["run", f.0.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = workbench(&args);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn endoscopy_report_for_c2() {
    let (code, out, _) = run(
        r#"{"root_datum": "C2", "q": 5, "characters": {"chi": [2, 2]},
            "tasks": [{"task": "endoscopy", "character": "chi"}]}"#,
        &["--no-timestamp"],
    );
    assert_eq!(code, 0);
    let r = json(&out);
    let p = &r["tasks"][0]["payload"];
    assert_eq!(r["tasks"][0]["status"], "pass");
    assert_eq!(p["w_prime_order"], 4);
    assert_eq!(p["c_chi0_order"], 2);
    assert_eq!(p["s_order"], 2);
    assert_eq!(p["affine_components"], 2);
}

#[test]
fn elementary_match_sl2_passes() {
    let (code, out, _) = run(
        r#"{"root_datum": "SL2", "q": 5, "characters": {"chi": [2]},
            "tasks": [{"task": "elementary-match", "character": "chi"}]}"#,
        &["--no-timestamp", "--nu-box", "3"],
    );
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["tasks"][0]["payload"]["checked"], 3);
    assert_eq!(r["summary"]["pass"], 1);
}

#[test]
fn uniform_normalization_fails_with_witness() {
    let src = r#"{"root_datum": "GL3", "q": 7, "characters": {"chi": [0, 0, 2]},
        "tasks": [{"task": "elementary-match", "character": "chi"}, {"task": "inspect"}]}"#;
    let (code, out, _) = run(src, &["--no-timestamp", "--normalization", "verbatim"]);
    assert_eq!(code, 1);
    let r = json(&out);
    let t = &r["tasks"][0];
    assert_eq!(t["status"], "fail");
    let w = &t["payload"]["failures"][0]["witness"];
    assert!(w["component"].is_array());
    assert!(w["lhs"].is_array() && w["rhs"].is_array());
    // the other task still ran
    assert_eq!(r["tasks"][1]["status"], "pass");

    let (code, _, _) = run(src, &["--no-timestamp", "--normalization", "per-w"]);
    assert_eq!(code, 0);
}

#[test]
fn task_errors_are_isolated() {
    let (code, out, _) = run(
        r#"{"root_datum": "GL3", "q": 7, "characters": {"chi": [0, 0, 2]},
            "tasks": [{"task": "hecke-mul", "character": "chi", "left": [{"nu": [0, 0, 0], "w": [1]}], "right": []},
                      {"task": "inspect"}]}"#,
        &["--no-timestamp"],
    );
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["tasks"][0]["status"], "fail");
    assert!(r["tasks"][0]["payload"]["error"].is_string());
    assert_eq!(r["tasks"][1]["status"], "pass");
}

#[test]
fn input_errors_exit_2() {
    let (code, _, err) = run(r#"{"root_datum": "SL2", "q": 1, "tasks": []}"#, &[]);
    assert_eq!(code, 2);
    assert!(err.contains("prime power"));
    let (code, _, _) = run(r#"{"root_datum": "SL2", "q": 6, "tasks": []}"#, &[]);
    assert_eq!(code, 2);
    let (code, _, err) = run(
        "{\"root_datum\": \"SL2\",\n \"q\": 5,\n \"tasks\": [{\"task\": \"nope\"}]}",
        &[],
    );
    assert_eq!(code, 2);
    assert!(err.contains("line 3"), "{err}");
    let (code, _, err) = run(
        r#"{"root_datum": "SL2", "q": 5, "characters": {"chi": [1, 2]}, "tasks": []}"#,
        &[],
    );
    assert_eq!(code, 2);
    assert!(err.contains("length"));
    let (code, _, _) = run(
        r#"{"root_datum": "SL2", "q": 5, "tasks": [{"task": "endoscopy", "character": "missing"}]}"#,
        &[],
    );
    assert_eq!(code, 2);
    let out = workbench(&["run", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_output_and_timestamps() {
    let src = r#"{"root_datum": "C2", "q": 5, "characters": {"chi": [2, 2], "psi": [1, 0]},
        "tasks": [{"task": "center-transfer", "character": "chi", "psi": "psi", "terms": [{"nu": [2, 1], "coeff": "3/2"}]},
                  {"task": "descent-check", "character": "chi"},
                  {"task": "length-audit", "character": "chi"},
                  {"task": "surgery", "mode": "z_extension"}]}"#;
    let (c1, a, _) = run(src, &["--no-timestamp", "--threads", "1"]);
    let (c2, b, _) = run(src, &["--no-timestamp", "--threads", "3"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert!(!a.contains("timestamp") && !a.contains("elapsed_ms"));
    let (_, c, _) = run(src, &[]);
    let r = json(&c);
    assert!(r["timestamp"].is_u64());
    assert!(r["tasks"][0]["elapsed_ms"].is_u64());
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn threads_from_environment() {
    let f = problem(r#"{"root_datum": "SL2", "q": 3, "tasks": [{"task": "inspect"}]}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_workbench"))
        .args(["run", f.0.to_str().unwrap(), "--no-timestamp"])
        .env("WORKBENCH_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn presets_and_schema() {
    let out = workbench(&["presets"]);
    assert!(out.status.success());
    let p = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(p.as_array().unwrap().len(), 7);
    let out = workbench(&["schema"]);
    assert!(out.status.success());
    let s = json(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        s["required"],
        serde_json::json!(["root_datum", "q", "tasks"])
    );
}

#[test]
fn explicit_root_data() {
    let (code, out, _) = run(
        r#"{"root_datum": {"rank": 2, "simple_roots": [[1, -1]], "simple_coroots": [[1, -1]]},
            "q": 4, "characters": {"chi": [1, 0]},
            "tasks": [{"task": "inspect"}, {"task": "elementary-match", "character": "chi"}]}"#,
        &["--no-timestamp"],
    );
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(
        r#"{"root_datum": {"rank": 1, "roots": [[2], [-2]], "coroots": [[1], [-1]], "simple": [0]},
            "q": 9, "tasks": [{"task": "inspect"}]}"#,
        &["--no-timestamp"],
    );
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["tasks"][0]["payload"]["weyl_order"], 2);
}
