//! Brute-force reference implementations for tests and acceptance runs.
//!
//! Only [`crate::model`] is used here, so none of these share code with the
//! routines they check.

use itertools::Itertools;

use crate::error::{PlanError, Result};
use crate::model::{config_distance, ConfigGraph, GeometricRegion, ScpInstance, Target, TourProblem, BOUNDARY_TOL};

pub const ORACLE_MAX_SETS: usize = 24;
pub const ORACLE_MAX_TOUR_NODES: usize = 9;
pub const ORACLE_MAX_PATHS: usize = 10_000;

/// Places a robot at `floor_point` facing the target's azimuth, expresses the
/// target in that robot frame and tests the region inequalities directly.
pub fn oracle_membership(region: &GeometricRegion, target: &Target, floor_point: [f64; 2]) -> bool {
    let (s, c) = target.phi.sin_cos();
    let dx = target.x - floor_point[0];
    let dy = target.y - floor_point[1];
    let xr = c * dx + s * dy;
    let yr = -s * dx + c * dy;
    let zr = target.z;
    let in_slab = zr >= region.z_min - BOUNDARY_TOL && zr <= region.z_max + BOUNDARY_TOL;
    let in_front = xr >= region.x_min - BOUNDARY_TOL;
    let rho2 = (xr - region.x_s).powi(2) + yr * yr + (zr - region.z_s).powi(2);
    let in_shell =
        rho2 >= region.r_min * region.r_min - BOUNDARY_TOL && rho2 <= region.r_max * region.r_max + BOUNDARY_TOL;
    in_slab && in_front && in_shell
}

/// Minimum cover by enumerating subsets in order of cardinality. Returns the
/// first (lexicographically smallest) optimal selection.
pub fn oracle_scp(inst: &ScpInstance) -> Result<Vec<usize>> {
    if inst.m() > ORACLE_MAX_SETS {
        return Err(PlanError::TooLarge {
            what: "sets",
            size: inst.m(),
            budget: ORACLE_MAX_SETS,
        });
    }
    let covers = |pick: &[usize]| {
        let mut hit = vec![false; inst.n];
        for &j in pick {
            for &i in &inst.sets[j] {
                hit[i] = true;
            }
        }
        hit.into_iter().all(|h| h)
    };
    for k in 0..=inst.m() {
        if let Some(pick) = (0..inst.m()).combinations(k).find(|p| covers(p)) {
            return Ok(pick);
        }
    }
    Err(PlanError::Infeasible {
        uncovered: (0..inst.n)
            .filter(|i| !inst.sets.iter().any(|s| s.contains(i)))
            .collect(),
    })
}

/// Shortest closed tour through every node from home, by permutation.
pub fn oracle_tsp(problem: &TourProblem) -> Result<(Vec<usize>, f64)> {
    let n = problem.nodes.len();
    if n > ORACLE_MAX_TOUR_NODES {
        return Err(PlanError::TooLarge {
            what: "tour nodes",
            size: n,
            budget: ORACLE_MAX_TOUR_NODES,
        });
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() };
    let mut best: (Vec<usize>, f64) = (Vec::new(), f64::INFINITY);
    for perm in (0..n).permutations(n) {
        let mut len = 0.0;
        let mut prev: &[f64] = &problem.home;
        for &k in &perm {
            len += dist(prev, &problem.nodes[k]);
            prev = &problem.nodes[k];
        }
        len += dist(prev, &problem.home);
        if len < best.1 {
            best = (perm, len);
        }
    }
    Ok(best)
}

/// Cheapest path through the layered graph, by enumerating every path.
/// Returns the chosen node index per layer and the cost.
pub fn oracle_path(graph: &ConfigGraph) -> Result<(Vec<usize>, f64)> {
    let count = graph
        .layers
        .iter()
        .try_fold(1usize, |acc, l| acc.checked_mul(l.len()))
        .unwrap_or(usize::MAX);
    if count > ORACLE_MAX_PATHS {
        return Err(PlanError::TooLarge {
            what: "paths",
            size: count,
            budget: ORACLE_MAX_PATHS,
        });
    }
    if count == 0 {
        return Err(PlanError::InvalidInput("graph has an empty layer".into()));
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), f64::INFINITY);
    for choice in graph.layers.iter().map(|l| 0..l.len()).multi_cartesian_product() {
        let cost: f64 = choice
            .windows(2)
            .enumerate()
            .map(|(k, w)| config_distance(&graph.layers[k][w[0]], &graph.layers[k + 1][w[1]]))
            .sum();
        if cost < best.1 {
            best = (choice, cost);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JointVector;

    #[test]
    fn zero_azimuth_is_plain_translation() {
        let r = GeometricRegion {
            x_min: 0.4,
            z_min: 0.4,
            z_max: 1.2,
            x_s: 0.22,
            z_s: 0.64,
            r_min: 0.51,
            r_max: 0.84,
        };
        let t = Target::new(1.1, 0.3, 0.7, 2.2, 0.0).unwrap();
        for f in [[0.2, 0.0], [0.5, 0.3], [0.9, 0.9]] {
            let p = [t.x - f[0], t.y - f[1], t.z];
            let rho = ((p[0] - r.x_s).powi(2) + p[1].powi(2) + (p[2] - r.z_s).powi(2)).sqrt();
            let direct = p[0] >= r.x_min && rho >= r.r_min && rho <= r.r_max;
            assert_eq!(oracle_membership(&r, &t, f), direct);
        }
    }

    #[test]
    fn shell_boundary_counts_as_inside() {
        let r = GeometricRegion {
            x_min: 0.0,
            z_min: 0.0,
            z_max: 2.0,
            x_s: 0.0,
            z_s: 1.0,
            r_min: 0.25,
            r_max: 0.5,
        };
        let t = Target::new(0.5, 0.0, 1.0, 2.0, 0.0).unwrap();
        assert!(oracle_membership(&r, &t, [0.0, 0.0]));
    }

    #[test]
    fn scp_partition() {
        let inst = ScpInstance::new(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
        assert_eq!(oracle_scp(&inst).unwrap(), vec![0, 1, 2]);
        let bad = ScpInstance::new(2, vec![vec![0]]).unwrap();
        assert!(matches!(oracle_scp(&bad), Err(PlanError::Infeasible { .. })));
    }

    #[test]
    fn square_tour_is_perimeter() {
        let p = TourProblem::new(vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let (_, len) = oracle_tsp(&p).unwrap();
        assert!((len - 4.0).abs() < 1e-12);
    }

    #[test]
    fn budgets_are_enforced() {
        let p = TourProblem::new(vec![0.0], (0..10).map(|k| vec![k as f64]).collect()).unwrap();
        assert!(oracle_tsp(&p).is_err());
        let layer = vec![JointVector::ZERO; 11];
        let g = ConfigGraph {
            layers: vec![layer.clone(), layer.clone(), layer.clone(), layer.clone()],
            targets: vec![0, 1],
            clusters: vec![0, 0],
        };
        assert!(oracle_path(&g).is_err());
    }
}
