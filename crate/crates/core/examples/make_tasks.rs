//! Regenerates the task corpus under `tasks/`.
//!
//!     cargo run -p baseplan --example make_tasks

use std::path::Path;

use baseplan::io::{ReachabilitySpec, RegionSource, TaskFile};
use baseplan::synthetic::{drilling_task, one_sided_targets, small_targets, two_sided_targets};
use baseplan::{SolverKind, Target};

fn low_bench_targets() -> Vec<Target> {
    let mut out = Vec::new();
    for k in 0..9 {
        let y = -0.4 + 0.1 * k as f64;
        for (j, z) in [0.3, 0.4, 0.5].into_iter().enumerate() {
            let theta = (115.0 + 15.0 * j as f64).to_radians();
            let phi = (-20.0 + 5.0 * k as f64).to_radians();
            out.push(Target::new(0.0, y, z, theta, phi).unwrap());
        }
    }
    for k in 0..5 {
        let x = 0.1 + 0.1 * k as f64;
        for z in [0.35, 0.45] {
            out.push(Target::new(x, 0.6, z, 130f64.to_radians(), (-90f64).to_radians()).unwrap());
        }
    }
    out
}

/// Rounds angles and coordinates to 1e-9 so the files read cleanly.
fn tidy(mut f: TaskFile) -> TaskFile {
    let r = |v: f64| (v * 1e9).round() / 1e9;
    for t in &mut f.targets {
        t.x = r(t.x);
        t.y = r(t.y);
        t.z = r(t.z);
        t.theta_deg = r(t.theta_deg);
        t.phi_deg = r(t.phi_deg);
    }
    if let Some(robot) = &mut f.robot {
        robot.j1_lim_deg = r(robot.j1_lim_deg);
        robot.j1_res_deg = r(robot.j1_res_deg);
        robot.joint_limits_deg = robot.joint_limits_deg.map(r);
        robot.polar_range_deg = robot.polar_range_deg.map(r);
    }
    f
}

fn main() -> baseplan::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tasks");
    std::fs::create_dir_all(&dir).map_err(|source| baseplan::PlanError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    tidy(drilling_task(&two_sided_targets(0))).save(&dir.join("two_sided.json"))?;
    tidy(drilling_task(&one_sided_targets(0))).save(&dir.join("one_sided.json"))?;

    let mut small = drilling_task(&small_targets(0));
    small.solver = SolverKind::Greedy;
    tidy(small).save(&dir.join("small.json"))?;

    let mut lpr = drilling_task(&two_sided_targets(7));
    lpr.solver = SolverKind::Lpr;
    lpr.seed = 7;
    tidy(lpr).save(&dir.join("two_sided_lpr.json"))?;

    let fitted = RegionSource::Fitted(ReachabilitySpec {
        voxel_size: 0.05,
        x_min: 0.3,
        z_min: 0.2,
        z_max: 0.6,
    });
    tidy(TaskFile::with_targets(&low_bench_targets(), 0.10, fitted)).save(&dir.join("low_bench_fitted.json"))?;
    Ok(())
}
