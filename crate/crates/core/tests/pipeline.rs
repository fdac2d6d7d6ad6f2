use std::time::Instant;

use baseplan::io::{ReachabilitySpec, RegionSource, TaskFile};
use baseplan::pipeline::{database_sweep, run_benchmark, run_pipeline, verify_plan, Sweep};
use baseplan::synthetic::{drilling_arm, drilling_task, one_sided_targets, two_sided_targets};
use baseplan::{PlanError, RobotParams, SolverKind, Target};

#[test]
fn unreachable_targets_are_listed() {
    let mut targets = two_sided_targets(0)[..20].to_vec();
    targets[3].z = 2.5;
    targets[11].z = -1.0;
    let err = run_pipeline(&drilling_task(&targets).to_task().unwrap(), None).unwrap_err();
    match err {
        PlanError::Infeasible { uncovered } => assert_eq!(uncovered, vec![3, 11]),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn one_sided_task_needs_few_bases() {
    let task = drilling_task(&one_sided_targets(0)).to_task().unwrap();
    let start = Instant::now();
    let plan = run_pipeline(&task, None).unwrap();
    assert!(start.elapsed().as_secs_f64() <= 60.0);
    assert!(plan.clusters.len() <= 4, "{}", plan.clusters.len());
    verify_plan(&plan, &task).unwrap();
}

#[test]
fn lrg_never_needs_more_clusters_than_greedy() {
    let task = drilling_task(&two_sided_targets(0)).to_task().unwrap();
    let sweep = Sweep {
        solvers: vec![SolverKind::Greedy, SolverKind::Lpr, SolverKind::Lrg],
        grid_sizes: vec![0.10],
        target_counts: vec![336],
    };
    let rows = run_benchmark(&task, &sweep, None).unwrap();
    assert_eq!(rows.len(), 3);
    let greedy = rows[0].clusters.unwrap();
    let lrg = rows[2].clusters.unwrap();
    assert!(lrg <= greedy, "lrg {lrg} greedy {greedy}");
}

#[test]
fn single_cell_sweep_is_one_row() {
    let task = drilling_task(&two_sided_targets(0)).to_task().unwrap();
    let sweep = Sweep {
        solvers: vec![SolverKind::Lrg],
        grid_sizes: vec![0.2],
        target_counts: vec![50],
    };
    assert_eq!(run_benchmark(&task, &sweep, None).unwrap().len(), 1);
}

#[test]
fn finer_voxels_cost_more() {
    let sizes = [0.04, 0.05, 0.07, 0.10];
    let rows = database_sweep(&RobotParams::default_arm(), &sizes).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].voxels > w[1].voxels);
        assert!(w[0].seconds > w[1].seconds, "{rows:?}");
    }
}

#[test]
fn fitted_region_is_cached_beside_the_task() {
    let dir = tempfile::tempdir().unwrap();
    let mut targets = Vec::new();
    for k in 0..6 {
        targets.push(Target::new(0.0, -0.25 + 0.1 * k as f64, 0.6, 2.2, 0.0).unwrap());
    }
    let mut f = TaskFile::with_targets(
        &targets,
        0.1,
        RegionSource::Fitted(ReachabilitySpec {
            voxel_size: 0.1,
            x_min: 0.4,
            z_min: 0.4,
            z_max: 1.2,
        }),
    );
    f.robot = Some((&drilling_arm()).into());
    let task = f.to_task().unwrap();
    let first = run_pipeline(&task, Some(dir.path())).unwrap();
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(cached.len(), 1);
    let second = run_pipeline(&task, Some(dir.path())).unwrap();
    assert_eq!(first.region, second.region);
    assert_eq!(first.clusters, second.clusters);
    verify_plan(&second, &task).unwrap();
}
