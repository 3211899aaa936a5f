use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use mcflow::run::run_path;
use mcflow::sweep::sweep;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn mcflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcflow"))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            walk(&p, out);
        } else {
            out.push(p);
        }
    }
}

#[test]
fn circle_run_writes_finalized_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("circle");
    let overrides = ["scenario.nodes=64".to_string(), "sampling.interval=0.02".to_string()];
    let report = run_path(&scenarios().join("circle.cfg"), &out, &overrides).unwrap();
    assert!(report.all_matched, "{report:?}");
    assert_eq!(report.termination.as_ref().map(|t| t.signal.as_str()), Some("FiniteTimeSingularity"));
    assert_eq!(report.scenario.config.get("scenario.nodes").map(String::as_str), Some("64"));
    let mut files = Vec::new();
    walk(&out, &mut files);
    assert!(files.iter().all(|p| p.extension().is_none_or(|e| e != "partial")), "{files:?}");
    for a in &report.artifacts {
        assert!(a.exists(), "{}", a.display());
    }
    let steps = fs::read_to_string(out.join("steps.jsonl")).unwrap();
    let mut kinds = (0, 0);
    for line in steps.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        match v["kind"].as_str() {
            Some("step") => kinds.0 += 1,
            Some("sample") => kinds.1 += 1,
            other => panic!("unexpected record kind {other:?}"),
        }
    }
    assert_eq!(kinds.0 as u64, report.steps);
    assert_eq!(kinds.1, report.samples);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["verdicts"].as_array().unwrap().len(), 4);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("line.cfg");
    let set = ["scenario.spacing=0.2".to_string(), "flow.horizon=0.5".to_string(), "expect.last_window=0.25, 0.5".to_string(), "expect.first_window=0, 0.25".to_string()];
    run_path(&cfg, &dir.path().join("a"), &set).unwrap();
    run_path(&cfg, &dir.path().join("b"), &set).unwrap();
    let mut files = Vec::new();
    walk(&dir.path().join("a"), &mut files);
    let mut compared = 0;
    for p in files {
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if name == "summary.json" {
            continue;
        }
        let rel = p.strip_prefix(dir.path().join("a")).unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(dir.path().join("b").join(rel)).unwrap(), "{name}");
        compared += 1;
    }
    assert!(compared >= 5);
}

#[test]
fn eh_graph_reproduces_expected_failure() {
    let dir = tempfile::tempdir().unwrap();
    let status = mcflow()
        .args(["run", scenarios().join("eh_graph.cfg").to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert!(status.status.success(), "{stdout}");
    assert!(stdout.contains("deficit_vanishing    FAIL"), "{stdout}");
}

#[test]
fn missing_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflow().args(["run", "missing.cfg", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[scenario]\nname = circle\nradius = big\n").unwrap();
    let out = mcflow().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("scenario.radius"), "{err}");
}

#[test]
fn empty_glob_fails() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = format!("{}/*.cfg", dir.path().display());
    let out = mcflow().args(["sweep", &pattern, "--jobs", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no configuration matches"));
}

#[test]
fn control_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("cfg");
    fs::create_dir_all(&src).unwrap();
    for name in ["circle", "line", "plane_graph"] {
        let text = fs::read_to_string(scenarios().join(format!("{name}.cfg"))).unwrap();
        fs::write(src.join(format!("{name}.cfg")), text).unwrap();
    }
    let report = sweep(&format!("{}/*.cfg", src.display()), &dir.path().join("out"), 3).unwrap();
    assert_eq!((report.matched, report.total), (3, 3));
    assert!(dir.path().join("out/aggregate.json").exists());
}

#[test]
fn refinement_ladder_is_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = format!("{}/ladder/*.cfg", scenarios().display());
    let report = sweep(&pattern, dir.path(), 3).unwrap();
    assert_eq!(report.ladders.len(), 1);
    let l = &report.ladders[0];
    assert!(l.order >= 1.9, "{l:?}");
    assert!(report.all_matched);
}

#[test]
fn expander_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflow()
        .args(["expander", "--n", "2", "--u0", "1", "--tol", "1e-5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-5);
    assert!(dir.path().join("profile.csv").exists() && dir.path().join("profile.json").exists());
    let bad = mcflow().args(["expander", "--n", "2", "--u0", "1", "--tol", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn default_output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflow()
        .env(mcflow::OUT_ENV, dir.path())
        .args(["run", scenarios().join("line.cfg").to_str().unwrap(), "--set", "flow.horizon=0.5", "--set", "expect.first_window=0, 0.25", "--set", "expect.last_window=0.25, 0.5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("line/summary.json").exists());
}
