use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], stdin: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_circle-pattern"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn fixture(args: &[&str]) -> String {
    let mut all = vec!["fixture"];
    all.extend_from_slice(args);
    let r = cli(&all, "");
    assert_eq!(r.code, 0, "{}", r.stderr);
    r.stdout
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("json output")
}

#[test]
fn jessen_z_form_has_one_dimensional_kernel() {
    let r = cli(&["hqd", "--form", "z"], &fixture(&["jessen"]));
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["dimension"], 1);
    assert!(v["q_projection_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn solve_then_render() {
    let solved = cli(&["solve", "--A", "0.5,-0.3"], &fixture(&["regular-torus", "2", "2"]));
    assert_eq!(solved.code, 0, "{}", solved.stderr);
    let v = json(&solved.stdout);
    assert!(v["point"]["newton_residual"].as_f64().unwrap() <= 1e-10);
    let svg = cli(&["render"], &solved.stdout);
    assert_eq!(svg.code, 0, "{}", svg.stderr);
    assert!(svg.stdout.starts_with("<?xml"));
    assert_eq!(svg.stdout.matches("<circle").count(), 32);
    let bare = cli(&["render", "--circles", "off"], &solved.stdout);
    assert_eq!(bare.stdout.matches("<circle").count(), 0);
    assert!(bare.stdout.contains("<line"));
}

#[test]
fn solved_bundle_verifies() {
    let solved = cli(&["solve", "--A", "-0.4,0.2"], &fixture(&["regular-torus", "2", "3"]));
    let r = cli(&["verify"], &solved.stdout);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r.stdout)["valid"], true);
}

#[test]
fn non_delaunay_input_is_rejected() {
    let r = cli(&["verify"], &fixture(&["one-vertex-torus-b", "2"]));
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("non-Delaunay"), "{}", r.stderr);
}

#[test]
fn bad_angles_report_a_cycle() {
    let r = cli(&["verify"], &fixture(&["octahedron-bad-angles"]));
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("dual cycle"), "{}", r.stderr);
}

#[test]
fn develop_traversals_agree() {
    let input = fixture(&["one-vertex-torus-a"]);
    let a = json(&cli(&["develop", "--traversal", "bfs"], &input).stdout);
    let b = json(&cli(&["develop", "--traversal", "random", "--seed", "9"], &input).stdout);
    assert_eq!(a["holonomy"]["kind"], b["holonomy"]["kind"]);
    assert!(a["closure_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn rigidity_and_scan_run() {
    let input = fixture(&["regular-torus", "2", "2"]);
    let r = json(&cli(&["rigidity", "--A", "0.3,0.1", "--trials", "3"], &input).stdout);
    assert_eq!(r["converged"], 3);
    let s = cli(&["scan", "--grid", "3"], &input);
    assert_eq!(s.code, 0, "{}", s.stderr);
    assert!(json(&s.stdout)["duplicates"].as_array().unwrap().is_empty());
    let sphere = json(&cli(&["rigidity", "--trials", "4"], &fixture(&["icosahedron-sphere"])).stdout);
    assert_eq!(sphere["converged"], 4);
    assert!(sphere["max_cr_distance"].as_f64().unwrap() < 1e-7);
}

#[test]
fn malformed_input_fails_cleanly() {
    let r = cli(&["verify"], "{ not json");
    assert_eq!(r.code, 1);
    assert!(!r.stderr.is_empty());
    let r = cli(&["fixture", "no-such-fixture"], "");
    assert_ne!(r.code, 0);
}
