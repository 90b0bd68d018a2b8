use std::path::Path;
use std::process::{Command, Output};

fn passive_nav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_passive-nav")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_names_every_bundled_scenario() {
    let o = passive_nav(&["list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    for n in ["maze_ada", "circuit_uav", "swarm_11", "single_uav", "task_push", "passivity"] {
        assert!(names.iter().any(|l| l == n), "{n} missing from {names:?}");
    }
}

#[test]
fn validate_bundled_and_file() {
    let o = passive_nav(&["validate", "maze_ada"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok: maze_ada (1 agents, 3 DoF"), "{}", stdout(&o));

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/circuit_uav.scn");
    let o = passive_nav(&["validate", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn invalid_scenario_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "name = \"bad\"\nduration = 1.0\ndt = -0.1\n").unwrap();
    let o = passive_nav(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));

    let o = passive_nav(&["run", "no_such_scenario"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/task_free.scn")).unwrap();
    let short = dir.path().join("short.scn");
    std::fs::write(&short, src.replace("duration = 40.0", "duration = 1.0")).unwrap();
    let out = dir.path().join("out");
    let o = passive_nav(&["run", short.to_str().unwrap(), "--out", out.to_str().unwrap(), "--feedback-hz", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("scenario = task_free"), "{text}");
    assert!(text.contains("steps = 500"), "{text}");
    let csv = std::fs::read_to_string(out.join("task_free.csv")).unwrap();
    assert!(csv.starts_with("t,ada.via,ada.x_vp.x,"));
    assert_eq!(csv.lines().count(), 1 + 100);
    let summary = std::fs::read_to_string(out.join("task_free.summary.txt")).unwrap();
    assert!(text.starts_with(&summary[..summary.find("wall_clock_s").unwrap()]));
}

#[test]
fn bench_rejects_zero_repeats() {
    let o = passive_nav(&["bench", "single_uav", "swarm_11", "--repeats", "0", "--duration", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("repeats"), "{}", stderr(&o));
}

#[test]
fn bench_reports_ratio() {
    let o = passive_nav(&["bench", "single_uav", "swarm_11", "--repeats", "2", "--duration", "0.2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("repeats = 2") && text.contains("ratio = "), "{text}");
}
