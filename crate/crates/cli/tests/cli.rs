use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_disasm-plan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn plan(dir: &Path, model: &Path, out: &str, extra: &[&str]) -> Output {
    let out = dir.join(out);
    let mut args = vec!["plan", "--model", s(model), "--seed", "5", "--out", s(&out), "--generations", "5", "--population", "12"];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn gen_fixture_reproduces_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen-fixture", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(dir.path().join("fig3.json")).unwrap(), fs::read(fixtures().join("fig3.json")).unwrap());
    let mut n = 0;
    for entry in fs::read_dir(fixtures().join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let ours = dir.path().join("corpus").join(path.file_name().unwrap());
        assert_eq!(fs::read(&ours).unwrap(), fs::read(&path).unwrap(), "{}", path.display());
        n += 1;
    }
    assert_eq!(n, 30);
}

#[test]
fn gen_fixture_rejects_tiny_models() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen-fixture", "--out", s(&dir.path().join("m.json")), "--eta", "2"]);
    assert_eq!(code(&o), 2);
    let o = run(&["gen-fixture", "--out", s(&dir.path().join("m.json")), "--eta", "9", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("m.json").exists());
}

#[test]
fn plan_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixtures().join("fig3.json");
    let a = plan(dir.path(), &model, "a", &[]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let stdout = String::from_utf8_lossy(&a.stdout);
    assert!(stdout.contains("removal order:") && stdout.contains("makespan"), "{stdout}");
    let b = plan(dir.path(), &model, "b", &["--sequential"]);
    assert_eq!(code(&b), 0);
    let names = [
        "sequence_front.json",
        "sequence_trace.csv",
        "task_plan.json",
        "motion_plan.json",
        "schedule.json",
        "gantt.svg",
        "report.json",
    ];
    for name in names {
        let x = fs::read(dir.path().join("a").join(name)).unwrap();
        let y = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["removal_order"].as_array().unwrap().len(), 6);
    let trace = fs::read_to_string(dir.path().join("a/sequence_trace.csv")).unwrap();
    assert!(trace.starts_with("generation,best_scalar,best_difficulty,best_efficiency,best_priority,best_allocation\n"));
    assert_eq!(trace.lines().count(), 1 + 6);
}

#[test]
fn fixed_stage_flag_drops_pose_adjustments() {
    let dir = tempfile::tempdir().unwrap();
    let o = plan(dir.path(), &fixtures().join("fig3.json"), "fixed", &["--fixed-stage"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("fixed/report.json")).unwrap()).unwrap();
    assert_eq!(report["pose_adjust_count"], 0);
}

#[test]
fn schedule_only_matches_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = plan(dir.path(), &fixtures().join("corpus/corpus_00_eta12.json"), "full", &[]);
    assert_eq!(code(&o), 0);
    let full = dir.path().join("full");
    let again = dir.path().join("again");
    let o = run(&[
        "schedule-only",
        "--task-plan",
        s(&full.join("task_plan.json")),
        "--motion-plan",
        s(&full.join("motion_plan.json")),
        "--out",
        s(&again),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["schedule.json", "gantt.svg"] {
        assert_eq!(fs::read(full.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn unproven_schedule_with_required_optimality_times_out() {
    let dir = tempfile::tempdir().unwrap();
    let o = plan(dir.path(), &fixtures().join("corpus/corpus_15_eta36.json"), "full", &[]);
    assert_eq!(code(&o), 0);
    let config = dir.path().join("strict.toml");
    fs::write(&config, "[scheduler]\nnode_limit = 1\nrequire_optimal = true\n").unwrap();
    let full = dir.path().join("full");
    let o = run(&[
        "schedule-only",
        "--task-plan",
        s(&full.join("task_plan.json")),
        "--motion-plan",
        s(&full.join("motion_plan.json")),
        "--config",
        s(&config),
        "--out",
        s(&dir.path().join("strict")),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn init_compare_reports_na_for_empty_populations() {
    let model = fixtures().join("fig3.json");
    let o = run(&["init-compare", "--model", s(&model), "--n-genes", "0", "--seeds", "1,2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.matches("n/a").count(), 2, "{text}");
    let o = run(&["init-compare", "--model", s(&model), "--n-genes", "20", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["availability"], 1.0);
    assert!((v["exact_random_availability"].as_f64().unwrap() - 4.0 / 720.0).abs() < 1e-12);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let o = plan(dir.path(), &dir.path().join("missing.json"), "x", &[]);
    assert_eq!(code(&o), 1);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"eta\": 3").unwrap();
    assert_eq!(code(&plan(dir.path(), &bad, "x", &[])), 2);

    let config = dir.path().join("unknown.toml");
    fs::write(&config, "generation_count = 10\n").unwrap();
    let model = fixtures().join("fig3.json");
    assert_eq!(code(&plan(dir.path(), &model, "x", &["--config", s(&config)])), 2);

    // A part whose only way out is through the base can never be removed.
    let stuck = dir.path().join("stuck.json");
    fs::write(
        &stuck,
        r#"{"eta": 2, "parts": [
            {"id": 1, "kind": "base", "task_kind": "grasp", "com_mm": [0, 0, 0], "removal_dirs": [], "orientations": {"arm1": [], "arm2": []}},
            {"id": 2, "kind": "regular", "task_kind": "grasp", "com_mm": [0, 0, 10], "removal_dirs": ["-Z"], "orientations": {"arm1": [0], "arm2": [0]}}
        ], "contact": [[1, 2]], "connection": [], "constraint": [], "interference": [[2, 1, "-Z"]]}"#,
    )
    .unwrap();
    let o = plan(dir.path(), &stuck, "x", &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
