use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use motion_insight_core::model::{load_dataset, ParseMode};
use motion_insight_core::synthgen::{composite_day, generate, Scenario, ScenarioSpec};
use motion_insight_core::{Analysis, Config};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motion-insight"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const JOINTS: &str = r#"["pelvis","left_hip","right_hip","neck","left_hand","right_hand","left_foot","right_foot"]"#;

fn tiny_capture(frames: usize, units: &str) -> String {
    let frame = "[[0,1,0],[-0.1,0.95,0],[0.1,0.95,0],[0,1.5,0],[-0.3,0.8,0],[0.3,0.8,0],[-0.1,0,0],[0.1,0,0]]";
    let frames = vec![frame; frames].join(",");
    format!(r#"{{"version":1,"fps":30,"units":"{units}","up_axis":"y","joints":{JOINTS},"frames":[{frames}]}}"#)
}

fn tiny_labels(end: usize) -> String {
    format!(r#"{{"version":1,"actions":[{{"action":"standing","start_frame":0,"end_frame":{end}}}]}}"#)
}

fn pair(dir: &Path, capture: &str, labels: &str) -> (PathBuf, PathBuf) {
    let c = dir.join("c.json");
    let l = dir.join("l.json");
    std::fs::write(&c, capture).unwrap();
    std::fs::write(&l, labels).unwrap();
    (c, l)
}

#[test]
fn validate_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (c, l) = pair(dir.path(), &tiny_capture(10, "meters"), &tiny_labels(10));
    let o = run(&["validate", "--capture", p(&c), "--labels", p(&l)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let (c, l) = pair(dir.path(), &tiny_capture(10, "meters"), &tiny_labels(11));
    let o = run(&["validate", "--capture", p(&c), "--labels", p(&l)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("range_error"), "{}", stderr(&o));

    let (c, l) = pair(dir.path(), &tiny_capture(10, "feet"), &tiny_labels(10));
    let o = run(&["validate", "--capture", p(&c), "--labels", p(&l)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unit_error"));
}

#[test]
fn validate_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let labels = r#"{"version":1,"actions":[
        {"action":"jogging","start_frame":0,"end_frame":5},
        {"action":"standing","start_frame":4,"end_frame":2},
        {"action":"walking","start_frame":0,"end_frame":50}]}"#;
    let (c, l) = pair(dir.path(), &tiny_capture(10, "meters"), labels);
    let o = run(&["validate", "--capture", p(&c), "--labels", p(&l)]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("vocabulary_error"));
    assert_eq!(err.matches("range_error").count(), 2, "{err}");
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "/nonexistent/manifest.json"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&run(&["validate"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn validate_generated_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::FallStand, 1))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let o = run(&["validate", p(&m)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn analyze_json(manifest: &Path, extra: &[&str]) -> (Vec<u8>, Value) {
    let mut args = vec!["analyze", p(manifest)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = serde_json::from_slice(&o.stdout).unwrap();
    (o.stdout, v)
}

#[test]
fn analyze_composite_day_matches_api_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let m = composite_day(7).write(dir.path()).unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("frames.csv");
    let o = run(&["analyze", p(&m), "--out", p(&out), "--csv", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["freezes"].as_array().unwrap().len(), 3);

    let a = Analysis::new(load_dataset(&m, ParseMode::Strict).unwrap(), Config::default());
    assert_eq!(report["global"], lib(&a.global_stats()));
    assert_eq!(report["actions"], lib(&a.action_summary()));
    assert_eq!(report["freezes"], lib(&a.freezes(None).unwrap()));
    for e in report["events"].as_array().unwrap() {
        let id = e["event"]["id"].as_str().unwrap();
        assert_eq!(e["stats"], lib(&a.event_stats(id).unwrap()));
    }

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "segment,frame,global_frame,valid,trunk,arm_l,arm_r,foot_l,foot_r,weight_l,weight_r"
    );
    assert_eq!(lines.count(), a.dataset().total_frames());
}

fn lib<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap()
}

#[test]
fn analyze_is_deterministic_and_honours_flags() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::FreezeWalk, 3))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let (a, report) = analyze_json(&m, &[]);
    let (b, _) = analyze_json(&m, &[]);
    assert_eq!(a, b);
    assert_eq!(report["freezes"].as_array().unwrap().len(), 1);
    assert!(report["selection"].is_null());

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"freeze":{"min_freeze_s":3.0}}"#).unwrap();
    let (_, r) = analyze_json(&m, &["--config", p(&cfg)]);
    assert_eq!(r["freezes"].as_array().unwrap().len(), 0);
    let (_, r) = analyze_json(&m, &["--config", p(&cfg), "--min-freeze", "1.0"]);
    assert_eq!(r["freezes"].as_array().unwrap().len(), 1);
    assert_eq!(r["config"]["freeze"]["min_freeze_s"], 1.0);

    let (_, r) = analyze_json(&m, &["--filter", "potential_freezes", "--filter", "min_duration=10"]);
    assert_eq!(r["selection"]["events"].as_array().unwrap().len(), 1);

    assert_eq!(code(&run(&["analyze", p(&m), "--filter", "sneezing"])), 2);
    std::fs::write(&cfg, r#"{"freeze":{"min_freeze_s":-3.0}}"#).unwrap();
    assert_eq!(code(&run(&["analyze", p(&m), "--config", p(&cfg)])), 1);
}

#[test]
fn analyze_clean_walk_and_empty_labels() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::CleanWalk, 5))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let (_, r) = analyze_json(&m, &[]);
    assert!(r["freezes"].as_array().unwrap().is_empty());

    std::fs::write(dir.path().join("segment_0_labels.json"), r#"{"version":1,"actions":[]}"#).unwrap();
    let (_, r) = analyze_json(&m, &[]);
    let actions = r["actions"].as_array().unwrap();
    assert_eq!(actions.len(), 7);
    assert!(actions.iter().all(|a| a["event_count"] == 0 && a["total_s"] == 0.0));
    assert!(r["events"].as_array().unwrap().is_empty());
}

#[test]
fn lenient_analyze_drops_unknown_actions() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::CleanWalk, 5).with_duration(10.0))
        .unwrap()
        .write(dir.path())
        .unwrap();
    std::fs::write(
        dir.path().join("segment_0_labels.json"),
        r#"{"version":1,"actions":[{"action":"jogging","start_frame":0,"end_frame":5},{"action":"walking","start_frame":0,"end_frame":300}]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["analyze", p(&m)])), 1);
    let o = run(&["analyze", p(&m), "--lenient"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("jogging"));
}

#[test]
fn synth_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["synth", "composite_day", "--seed", "7", "--out", p(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 10);
    assert!(names.contains(&"truth.json".to_string()));
    assert!(names.contains(&"segment_3_capture.json".to_string()));
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn synth_flags_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = run(&[
        "synth", "freeze_walk", "--seed", "2", "--out", p(&out), "--duration", "30", "--freeze-count", "2",
        "--freeze-duration", "2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let truth: Value = serde_json::from_slice(&std::fs::read(out.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["deficits"].as_array().unwrap().len(), 2);

    assert_eq!(code(&run(&["synth", "moonwalk", "--out", p(&out)])), 2);
    assert_eq!(code(&run(&["synth", "clean_walk", "--out", p(&out), "--duration", "-1"])), 2);
}

#[test]
fn serve_port_busy_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::CleanWalk, 1).with_duration(5.0))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let o = run(&["serve", p(&m), "--port", &port]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("cannot bind"));
}

#[cfg(unix)]
#[test]
fn serve_stops_cleanly_on_sigint() {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::process::Stdio;

    let dir = tempfile::tempdir().unwrap();
    let m = generate(&ScenarioSpec::new(Scenario::CleanWalk, 1).with_duration(5.0))
        .unwrap()
        .write(dir.path())
        .unwrap();
    let mut child = bin()
        .args(["serve", p(&m), "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut err = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    err.read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect(&line).to_string();

    let mut conn = std::net::TcpStream::connect(&addr).unwrap();
    conn.write_all(b"GET /api/v1/meta HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
    let mut body = String::new();
    conn.read_to_string(&mut body).unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));

    let status = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(status.success());
    assert_eq!(child.wait().unwrap().code(), Some(0));
}
