//! End-to-end planning and the benchmark sweeps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::assignment::{assign_clusters, verify_clusters, AzimuthLimit};
use crate::error::{PlanError, Result};
use crate::io::{ReachabilitySpec, RegionSource, Task};
use crate::kinematics::AnalyticArm;
use crate::model::{
    check_feasibility, euclidean, BasePose, FloorGrid, GeometricRegion, Plan, PlanStats, RobotParams, ScpInstance,
    SolverKind, Target, Timing, TourProblem,
};
use crate::reachability::{cache_key, fit_region, generate_database, Aabb, ReachabilityDatabase};
use crate::scp::{build_bigraph, floor_grid_for, solve, CoverSolution, SolverOptions};
use crate::sequencing::{build_config_graph, solve_config_sequence, solve_target_sequence, solve_tsp_2opt};

fn secs(since: Instant) -> f64 {
    since.elapsed().as_secs_f64()
}

/// Cache file for a database, named by the content hash of its inputs.
pub fn database_cache_path(dir: &Path, params: &RobotParams, voxel_size: f64, bounds: &Aabb) -> PathBuf {
    let key = cache_key(params, voxel_size, bounds);
    dir.join(format!("reach-{}.db", &key[..16]))
}

/// Loads the database from `cache_dir` when present, otherwise generates it
/// and (with a cache directory) stores it there.
pub fn load_or_generate_database(
    params: &RobotParams,
    voxel_size: f64,
    cache_dir: Option<&Path>,
) -> Result<ReachabilityDatabase> {
    let bounds = Aabb::default_for(params);
    let cached = cache_dir.map(|d| database_cache_path(d, params, voxel_size, &bounds));
    if let Some(path) = cached.as_deref().filter(|p| p.exists()) {
        return ReachabilityDatabase::load(path);
    }
    let arm = AnalyticArm::new(params.clone())?;
    let db = generate_database(&arm, voxel_size, bounds)?;
    if let Some(path) = cached {
        db.save(&path)?;
    }
    Ok(db)
}

/// Region for a task plus the seconds spent on the database and the fit.
pub fn resolve_region(task: &Task, cache_dir: Option<&Path>) -> Result<(GeometricRegion, f64, f64)> {
    match task.region {
        RegionSource::Explicit(r) => Ok((r, 0.0, 0.0)),
        RegionSource::Fitted(ReachabilitySpec {
            voxel_size,
            x_min,
            z_min,
            z_max,
        }) => {
            let t = Instant::now();
            let db = load_or_generate_database(&task.robot, voxel_size, cache_dir)?;
            let db_secs = secs(t);
            let t = Instant::now();
            let region = fit_region(&db, x_min, z_min, z_max, &task.robot)?;
            Ok((region, db_secs, secs(t)))
        }
    }
}

fn floor_grid(task: &Task, targets: &[Target], region: &GeometricRegion, cell_size: f64) -> Result<FloorGrid> {
    match task.floor_extent {
        Some([x0, y0, x1, y1]) => FloorGrid::covering(x0, y0, x1, y1, cell_size),
        None => floor_grid_for(targets, region, cell_size),
    }
}

/// Floor grid and bigraph for a task, as the planner builds them.
pub fn bigraph_for(task: &Task, cache_dir: Option<&Path>) -> Result<ScpInstance> {
    let (region, _, _) = resolve_region(task, cache_dir)?;
    let grid = floor_grid(task, &task.targets, &region, task.cell_size)?;
    build_bigraph(&task.targets, &grid, &region)
}

fn solver_options(task: &Task) -> SolverOptions {
    SolverOptions {
        lrg_iters: task.lrg_iters,
        seed: task.seed,
        simplex_cap: None,
    }
}

/// Runs every planning stage and times each one.
pub fn run_pipeline(task: &Task, cache_dir: Option<&Path>) -> Result<Plan> {
    let start = Instant::now();
    let mut timing = Timing::default();

    let (region, db_secs, fit_secs) = resolve_region(task, cache_dir)?;
    timing.database = db_secs;
    timing.region_fit = fit_secs;

    let t = Instant::now();
    let grid = floor_grid(task, &task.targets, &region, task.cell_size)?;
    let inst = build_bigraph(&task.targets, &grid, &region)?;
    timing.bigraph = secs(t);

    let t = Instant::now();
    let report = check_feasibility(&inst);
    timing.feasibility = secs(t);
    if !report.feasible {
        return Err(PlanError::Infeasible {
            uncovered: report.uncovered,
        });
    }

    let t = Instant::now();
    let cover = solve(&inst, task.solver, &solver_options(task))?;
    timing.scp = secs(t);

    let t = Instant::now();
    let limit = AzimuthLimit::from_params(&task.robot)?;
    let clusters = assign_clusters(&cover, &grid, &task.targets, limit)?;
    verify_clusters(&clusters, &task.targets, &region, limit)?;
    timing.assignment = secs(t);

    let t = Instant::now();
    let home_base = task.home_base.unwrap_or(BasePose {
        x: grid.origin[0],
        y: grid.origin[1],
        heading: 0.0,
    });
    let base_problem = TourProblem::new(
        vec![home_base.x, home_base.y],
        clusters.iter().map(|c| vec![c.base.x, c.base.y]).collect(),
    )?;
    let base_sequence = solve_tsp_2opt(&base_problem, task.seed);
    timing.base_tour = secs(t);

    let t = Instant::now();
    let home_point = [home_base.x, home_base.y, 0.0];
    let target_sequence = solve_target_sequence(
        &task.targets,
        &clusters,
        &base_sequence,
        task.h_scale,
        task.seed,
        home_point,
    )?;
    timing.target_tour = secs(t);

    let t = Instant::now();
    let arm = AnalyticArm::new(task.robot.clone())?;
    let graph = build_config_graph(&arm, &task.targets, &clusters, &target_sequence, task.home_joints)?;
    timing.ik_layers = secs(t);

    let t = Instant::now();
    let (config_sequence, config_path_length) = solve_config_sequence(&graph)?;
    timing.config_search = secs(t);

    let t = Instant::now();
    let target_points: Vec<Vec<f64>> = target_sequence
        .iter()
        .map(|&i| task.targets[i].position().to_vec())
        .collect();
    let target_tour_length = TourProblem::new(home_point.to_vec(), target_points)?
        .tour_length(&(0..target_sequence.len()).collect::<Vec<_>>());
    let stats = PlanStats {
        solver: task.solver,
        chosen_sets: cover.size(),
        cluster_count: clusters.len(),
        floor_points: grid.len(),
        base_tour_length: base_problem.tour_length(&base_sequence),
        target_tour_length,
        config_path_length,
        timing: Timing::default(),
    };
    let mut plan = Plan {
        region,
        clusters,
        home_base,
        base_sequence,
        target_sequence,
        config_sequence,
        stats,
    };
    timing.assembly = secs(t);
    timing.total = secs(start);
    plan.stats.timing = timing;
    Ok(plan)
}

/// Checks the structural guarantees of a plan against its task.
pub fn verify_plan(plan: &Plan, task: &Task) -> Result<()> {
    let targets = &task.targets;
    let limit = AzimuthLimit::from_params(&task.robot)?;
    verify_clusters(&plan.clusters, targets, &plan.region, limit)?;

    let mut order = plan.base_sequence.clone();
    order.sort_unstable();
    if order != (0..plan.clusters.len()).collect::<Vec<_>>() {
        return Err(PlanError::Contract(
            "base sequence is not a permutation of the clusters".into(),
        ));
    }
    let mut pos = 0;
    for &c in &plan.base_sequence {
        let mut block = plan
            .target_sequence
            .get(pos..pos + plan.clusters[c].target_indices.len())
            .ok_or_else(|| PlanError::Contract("target sequence is too short".into()))?
            .to_vec();
        block.sort_unstable();
        if block != plan.clusters[c].target_indices {
            return Err(PlanError::Contract(format!("cluster {c} is not visited contiguously")));
        }
        pos += block.len();
    }
    if pos != targets.len() || plan.target_sequence.len() != targets.len() {
        return Err(PlanError::Contract(
            "target sequence length differs from the target count".into(),
        ));
    }
    if plan.config_sequence.len() != targets.len() + 2 {
        return Err(PlanError::Contract(
            "configuration sequence has the wrong length".into(),
        ));
    }
    let arm = AnalyticArm::new(task.robot.clone())?;
    let mut cluster_of = vec![0; targets.len()];
    for (c, cl) in plan.clusters.iter().enumerate() {
        for &i in &cl.target_indices {
            cluster_of[i] = c;
        }
    }
    for (k, &i) in plan.target_sequence.iter().enumerate() {
        let q = &plan.config_sequence[k + 1];
        let pose = arm.forward_at(&plan.clusters[cluster_of[i]].base, q);
        let t = &targets[i];
        let tip = [pose.tip.x, pose.tip.y, pose.tip.z];
        let axis = [pose.axis.x, pose.axis.y, pose.axis.z];
        if euclidean(&tip, &t.position()) > 1e-6 || euclidean(&axis, &t.direction()) > 1e-6 {
            return Err(PlanError::Contract(format!("configuration for target {i} misses it")));
        }
    }
    Ok(())
}

/// One cell of a clustering benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub solver: SolverKind,
    pub grid_size: f64,
    pub targets: usize,
    pub floor_points: usize,
    /// `None` when the instance was infeasible.
    pub chosen_sets: Option<usize>,
    pub clusters: Option<usize>,
    pub seconds: f64,
}

/// Solver × grid size × target count sweep. Targets are taken as prefixes of
/// the task's target list.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub solvers: Vec<SolverKind>,
    pub grid_sizes: Vec<f64>,
    pub target_counts: Vec<usize>,
}

pub fn run_benchmark(task: &Task, sweep: &Sweep, cache_dir: Option<&Path>) -> Result<Vec<BenchRow>> {
    if sweep.solvers.is_empty() || sweep.grid_sizes.is_empty() || sweep.target_counts.is_empty() {
        return Err(PlanError::InvalidInput("benchmark sweep has an empty axis".into()));
    }
    if let Some(&n) = sweep.target_counts.iter().find(|&&n| n == 0 || n > task.targets.len()) {
        return Err(PlanError::InvalidInput(format!(
            "target count {n} is outside 1..={}",
            task.targets.len()
        )));
    }
    let (region, _, _) = resolve_region(task, cache_dir)?;
    let limit = AzimuthLimit::from_params(&task.robot)?;
    let mut rows = Vec::new();
    for &grid_size in &sweep.grid_sizes {
        for &n in &sweep.target_counts {
            let targets = &task.targets[..n];
            let grid = floor_grid(task, targets, &region, grid_size)?;
            let inst = build_bigraph(targets, &grid, &region)?;
            for &solver in &sweep.solvers {
                let t = Instant::now();
                let outcome = cluster_once(&inst, &grid, targets, solver, task, limit);
                let seconds = secs(t);
                let (chosen_sets, clusters) = match outcome {
                    Ok((cover, count)) => (Some(cover.size()), Some(count)),
                    Err(PlanError::Infeasible { .. }) => (None, None),
                    Err(e) => return Err(e),
                };
                rows.push(BenchRow {
                    solver,
                    grid_size,
                    targets: n,
                    floor_points: grid.len(),
                    chosen_sets,
                    clusters,
                    seconds,
                });
            }
        }
    }
    Ok(rows)
}

fn cluster_once(
    inst: &ScpInstance,
    grid: &FloorGrid,
    targets: &[Target],
    solver: SolverKind,
    task: &Task,
    limit: AzimuthLimit,
) -> Result<(CoverSolution, usize)> {
    let report = check_feasibility(inst);
    if !report.feasible {
        return Err(PlanError::Infeasible {
            uncovered: report.uncovered,
        });
    }
    let cover = solve(inst, solver, &solver_options(task))?;
    let clusters = assign_clusters(&cover, grid, targets, limit)?;
    Ok((cover, clusters.len()))
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("solver,grid_size,targets,floor_points,chosen_sets,clusters,seconds\n");
    let opt = |v: Option<usize>| v.map_or_else(|| "infeasible".to_string(), |v| v.to_string());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6}",
            r.solver.name(),
            r.grid_size,
            r.targets,
            r.floor_points,
            opt(r.chosen_sets),
            opt(r.clusters),
            r.seconds
        );
    }
    out
}

/// Database generation cost at one voxel size.
#[derive(Debug, Clone, PartialEq)]
pub struct DbRow {
    pub voxel_size: f64,
    pub voxels: usize,
    pub valid: usize,
    pub seconds: f64,
}

/// Generates a fresh database per voxel size; nothing is cached.
pub fn database_sweep(params: &RobotParams, voxel_sizes: &[f64]) -> Result<Vec<DbRow>> {
    let arm = AnalyticArm::new(params.clone())?;
    let bounds = Aabb::default_for(params);
    voxel_sizes
        .iter()
        .map(|&vs| {
            let t = Instant::now();
            let db = generate_database(&arm, vs, bounds)?;
            Ok(DbRow {
                voxel_size: vs,
                voxels: db.len(),
                valid: db.valid_count(),
                seconds: secs(t),
            })
        })
        .collect()
}

pub fn database_csv(rows: &[DbRow]) -> String {
    let mut out = String::from("voxel_size,voxels,valid,seconds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:.6}", r.voxel_size, r.voxels, r.valid, r.seconds);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::TaskFile;

    fn small_task() -> Task {
        let mut targets = Vec::new();
        for k in 0..8 {
            let y = -0.35 + 0.1 * k as f64;
            targets.push(Target::new(1.0, y, 0.75, 125f64.to_radians(), 0.0).unwrap());
            targets.push(Target::new(1.0, y, 0.55, 140f64.to_radians(), 0.0).unwrap());
        }
        let region = GeometricRegion {
            x_min: 0.3,
            z_min: 0.3,
            z_max: 1.0,
            x_s: 0.19,
            z_s: 0.23,
            r_min: 0.3,
            r_max: 0.8,
        };
        TaskFile::with_targets(&targets, 0.1, RegionSource::Explicit(region))
            .to_task()
            .unwrap()
    }

    #[test]
    fn timing_adds_up() {
        let plan = run_pipeline(&small_task(), None).unwrap();
        let t = &plan.stats.timing;
        assert!(t.stage_sum() <= t.total * 1.0001);
        assert!(t.stage_sum() >= t.total * 0.95 || t.total < 1e-3);
    }

    #[test]
    fn benchmark_rows_follow_the_sweep() {
        let task = small_task();
        let sweep = Sweep {
            solvers: vec![SolverKind::Greedy, SolverKind::Lrg],
            grid_sizes: vec![0.1],
            target_counts: vec![4, 16],
        };
        let rows = run_benchmark(&task, &sweep, None).unwrap();
        assert_eq!(rows.len(), 4);
        let csv = bench_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        let bad = Sweep {
            target_counts: vec![17],
            ..sweep
        };
        assert!(run_benchmark(&task, &bad, None).is_err());
    }
}
