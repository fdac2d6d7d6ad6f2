use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_baseplan"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tasks").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn plan_writes_plan_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let svg = dir.path().join("plan.svg");
    let scp = dir.path().join("scp.txt");
    let o = run(bin()
        .arg("plan")
        .arg(corpus("small.json"))
        .arg("-o")
        .arg(&plan)
        .arg("--svg")
        .arg(&svg)
        .arg("--dump-scp")
        .arg(&scp)
        .arg("--no-cache"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&plan).unwrap();
    let parsed = baseplan::io::plan_from_json(&text, "plan").unwrap();
    assert_eq!(parsed.target_sequence.len(), 12);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<?xml"));
    let inst = baseplan::scp::read_exchange(&std::fs::read_to_string(&scp).unwrap()).unwrap();
    assert_eq!(inst.n, 12);
    assert!(stderr(&o).contains("base poses"));
}

#[test]
fn overrides_reach_the_planner() {
    let o = run(bin()
        .arg("plan")
        .arg(corpus("small.json"))
        .args(["--solver", "exact", "--seed", "3", "--no-cache"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let plan = baseplan::io::plan_from_json(&String::from_utf8_lossy(&o.stdout), "stdout").unwrap();
    assert_eq!(plan.stats.solver, baseplan::SolverKind::Exact);
}

#[test]
fn render_redraws_a_saved_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let o = run(bin()
        .arg("plan")
        .arg(corpus("small.json"))
        .arg("-o")
        .arg(&plan)
        .arg("--no-cache"));
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(bin().arg("render").arg(&plan).arg(corpus("small.json")));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("class=\"base\""));
    let o = run(bin().arg("render").arg(&plan).arg(corpus("missing.json")));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_task_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(corpus("small.json"))
        .unwrap()
        .replacen("\"seed\"", "\"sede\"", 1);
    std::fs::write(&path, text).unwrap();
    let o = run(bin().arg("plan").arg(&path));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));
}

#[test]
fn unreachable_target_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("high.json");
    let mut f = baseplan::io::TaskFile::load(&corpus("small.json")).unwrap();
    f.targets[4].z = 3.0;
    f.save(&path).unwrap();
    let o = run(bin().arg("plan").arg(&path).arg("--no-cache"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[4]"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_3() {
    let o = run(bin().args(["plan", "--solver", "simplex", "x.json"]));
    assert_eq!(o.status.code(), Some(3));
    let o = run(bin().arg("--help"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn benchmark_prints_one_row_per_cell() {
    let o = run(bin()
        .arg("benchmark")
        .arg(corpus("two_sided.json"))
        .args(["--grid-sizes", "0.1", "--no-cache"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let clusters = |solver: &str| -> usize {
        let row = rows.iter().find(|r| r.starts_with(solver)).unwrap();
        row.split(',').nth(5).unwrap().parse().unwrap()
    };
    assert!(clusters("lrg") <= clusters("greedy"));
}

#[test]
fn gen_db_fills_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("task.json");
    std::fs::copy(corpus("low_bench_fitted.json"), &task).unwrap();
    let o = run(bin().arg("gen-db").arg(&task).args(["--voxel-size", "0.1"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let cached: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".db"))
        .collect();
    assert_eq!(cached.len(), 1);
    let o = run(bin().arg("gen-db").arg(corpus("small.json")));
    assert_eq!(o.status.code(), Some(3));
}
