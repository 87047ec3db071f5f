use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_floorplan"));
    c.env_remove("FLOORPLAN_MILP_SOLVER");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} in {line}"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn named_instances_match_the_shipped_files() {
    for name in ["sM-3M", "M-18S", "M-9M", "M-3XL", "C-11L", "MC-15L"] {
        let o = run(&["gen", name]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), std::fs::read_to_string(data(&format!("{name}.json"))).unwrap(), "{name}");
    }
}

#[test]
fn random_generation_is_seeded() {
    let a = run(&["gen", "--random", "--seed", "9", "--floors", "3"]);
    let b = run(&["gen", "--random", "--seed", "9", "--floors", "3"]);
    let c = run(&["gen", "--random", "--seed", "10", "--floors", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn solve_eval_render_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let sol = dir.path().join("s.json");
    let svg = dir.path().join("plan.svg");
    let gen = ["gen", "--random", "--seed", "4", "--floors", "2", "--max-rooms", "6", "-o", p(&inst)];
    assert!(run(&gen).status.success());

    let o = run(&[
        "solve",
        p(&inst),
        "--mode",
        "split-heuristic",
        "--solver",
        "builtin",
        "--time-limit",
        "20",
        "-o",
        p(&sol),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert_eq!(field(&line, "status"), "feasible");
    assert_eq!(field(&line, "mode"), "split-heuristic");
    assert_eq!(field(&line, "backend"), "builtin");
    let cost = field(&line, "cost").to_string();

    let o = run(&["eval", p(&sol), p(&inst)]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert_eq!(field(&line, "valid"), "true");
    assert_eq!(field(&line, "cost_match"), "true");
    assert_eq!(field(&line, "cost"), cost);

    let o = run(&["render", p(&sol), p(&inst), "-o", p(&svg)]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "files"), "1");
    let first = std::fs::read(&svg).unwrap();
    assert!(run(&["render", p(&sol), p(&inst), "-o", p(&svg)]).status.success());
    assert_eq!(std::fs::read(&svg).unwrap(), first);

    let o = run(&["render", p(&sol), p(&inst), "-o", p(&svg), "--per-floor-svg"]);
    assert_eq!(field(&stdout(&o), "files"), "2");
    assert!(dir.path().join("plan-floor1.svg").exists() && dir.path().join("plan-floor2.svg").exists());
}

#[test]
fn eval_flags_a_tampered_solution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let sol = dir.path().join("s.json");
    assert!(run(&["gen", "--random", "--seed", "2", "--floors", "2", "--max-rooms", "5", "-o", p(&inst)])
        .status
        .success());
    let o = run(&["solve", p(&inst), "--mode", "split-heuristic", "--solver", "builtin", "-o", p(&sol)]);
    assert!(o.status.success());
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    let c = doc["cost"].as_f64().unwrap();
    doc["cost"] = serde_json::json!(c + 3.0);
    std::fs::write(&sol, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = run(&["eval", p(&sol), p(&inst)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(field(&stdout(&o), "cost_match"), "false");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "/nonexistent.json"]).status.code(), Some(4));
    assert_eq!(run(&["gen", "Z-1Q"]).status.code(), Some(4));
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(4));
    assert_eq!(run(&["gen", "--random", "--fill", "2"]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{\"format\": \"other\"}").unwrap();
    assert_eq!(run(&["solve", p(&garbage)]).status.code(), Some(4));

    let inst = dir.path().join("i.json");
    assert!(run(&["gen", "--random", "--seed", "1", "--floors", "1", "--max-rooms", "3", "-o", p(&inst)])
        .status
        .success());
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    for g in doc["groups"].as_array_mut().unwrap() {
        for d in g["demand"].as_array_mut().unwrap() {
            *d = serde_json::json!(d.as_u64().unwrap() * 40 + 40);
        }
    }
    std::fs::write(&inst, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = run(&["solve", p(&inst), "--solver", "builtin"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&stdout(&o), "status"), "infeasible");
}

#[test]
fn timeout_without_incumbent_exits_three() {
    let o = run(&["solve", p(&data("sM-3M.json")), "--solver", "builtin", "--time-limit", "0.001"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert_eq!(field(&stdout(&o), "status"), "time_limit");
}
