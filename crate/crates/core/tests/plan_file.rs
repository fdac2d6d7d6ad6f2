use baseplan::io::{load_plan, plan_from_json, plan_to_json, save_plan};
use baseplan::pipeline::run_pipeline;
use baseplan::synthetic::{drilling_task, small_targets, two_sided_targets};
use baseplan::{Plan, SolverKind, Timing};

fn plan_for(seed: u64, solver: SolverKind) -> Plan {
    let mut f = drilling_task(&two_sided_targets(seed));
    f.solver = solver;
    f.seed = seed;
    run_pipeline(&f.to_task().unwrap(), None).unwrap()
}

#[test]
fn plan_round_trips_exactly() {
    for solver in [SolverKind::Greedy, SolverKind::Lpr, SolverKind::Lrg] {
        let plan = plan_for(1, solver);
        let back = plan_from_json(&plan_to_json(&plan), "mem").unwrap();
        assert_eq!(back, plan);
    }
}

#[test]
fn plan_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let plan = run_pipeline(&drilling_task(&small_targets(2)).to_task().unwrap(), None).unwrap();
    save_plan(&plan, &path).unwrap();
    assert_eq!(load_plan(&path).unwrap(), plan);
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let strip = |mut p: Plan| {
        p.stats.timing = Timing::default();
        plan_to_json(&p)
    };
    for seed in [0, 4] {
        assert_eq!(
            strip(plan_for(seed, SolverKind::Lrg)),
            strip(plan_for(seed, SolverKind::Lrg))
        );
    }
}

#[test]
fn unknown_plan_field_is_rejected() {
    let plan = plan_for(0, SolverKind::Greedy);
    let text = plan_to_json(&plan).replacen("\"home_base\"", "\"home\"", 1);
    let err = plan_from_json(&text, "edited").unwrap_err();
    assert!(err.to_string().contains("home"), "{err}");
}

#[test]
fn stage_times_account_for_the_total() {
    let t = plan_for(3, SolverKind::Lrg).stats.timing;
    assert!(t.stage_sum() <= t.total);
    assert!(t.stage_sum() >= 0.95 * t.total, "{t:?}");
}
