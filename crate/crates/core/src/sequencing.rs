//! Base tour, global target order and the configuration path.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{PlanError, Result};
use crate::kinematics::{solve_ik, ArmModel};
use crate::model::{config_distance, euclidean, Cluster, ConfigGraph, JointVector, Target, TourProblem};

/// Minimum gain for a 2-exchange to count as an improvement.
pub const IMPROVE_EPS: f64 = 1e-12;

/// Separation used when every cluster is a single point.
pub const DEFAULT_SEPARATION: f64 = 1.0;

/// Full distance matrix over home (row 0) and the nodes.
fn distance_matrix(problem: &TourProblem) -> Vec<Vec<f64>> {
    let k = problem.nodes.len() + 1;
    (0..k)
        .map(|a| (0..k).map(|b| euclidean(problem.point(a), problem.point(b))).collect())
        .collect()
}

/// Greedy tour from home, always moving to the closest unvisited node (lowest
/// index on ties).
pub fn nearest_neighbour(problem: &TourProblem) -> Vec<usize> {
    let n = problem.nodes.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut here: &[f64] = &problem.home;
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (k, p) in problem.nodes.iter().enumerate() {
            if !visited[k] {
                let d = euclidean(here, p);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        here = &problem.nodes[best];
    }
    order
}

/// `path[0]` and `path[n + 1]` are home (point 0); interior entries are node
/// indices shifted by one.
fn improving_exchange(dist: &[Vec<f64>], path: &[usize], from: usize) -> Option<(usize, usize)> {
    let last = path.len() - 2;
    for i in from..=last {
        for j in i + 1..=last {
            let before = dist[path[i - 1]][path[i]] + dist[path[j]][path[j + 1]];
            let after = dist[path[i - 1]][path[j]] + dist[path[i]][path[j + 1]];
            if after - before < -IMPROVE_EPS {
                return Some((i, j));
            }
        }
    }
    None
}

fn to_path(order: &[usize]) -> Vec<usize> {
    let mut path = Vec::with_capacity(order.len() + 2);
    path.push(0);
    path.extend(order.iter().map(|&k| k + 1));
    path.push(0);
    path
}

/// First-improvement 2-Opt from the given order until no improving segment
/// reversal remains. Home stays fixed at both ends.
pub fn two_opt(problem: &TourProblem, order: &[usize]) -> Vec<usize> {
    if order.len() < 2 {
        return order.to_vec();
    }
    let dist = distance_matrix(problem);
    let mut path = to_path(order);
    let mut from = 1;
    loop {
        match improving_exchange(&dist, &path, from) {
            Some((i, j)) => {
                path[i..=j].reverse();
                from = i;
            }
            None if from > 1 => from = 1,
            None => break,
        }
    }
    path[1..path.len() - 1].iter().map(|&k| k - 1).collect()
}

/// True when no segment reversal shortens the tour by more than [`IMPROVE_EPS`].
pub fn is_two_optimal(problem: &TourProblem, order: &[usize]) -> bool {
    order.len() < 2 || improving_exchange(&distance_matrix(problem), &to_path(order), 1).is_none()
}

/// Nearest-neighbour start followed by 2-Opt. Returns the visiting order of
/// the nodes (home excluded).
pub fn solve_tsp_2opt(problem: &TourProblem, seed: u64) -> Vec<usize> {
    solve_tsp_2opt_restarts(problem, seed, 0)
}

/// As [`solve_tsp_2opt`], plus `restarts` extra runs from seeded random
/// orders. The shortest tour wins; the first found wins ties.
pub fn solve_tsp_2opt_restarts(problem: &TourProblem, seed: u64, restarts: usize) -> Vec<usize> {
    let mut best = two_opt(problem, &nearest_neighbour(problem));
    let mut best_len = problem.tour_length(&best);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let mut start: Vec<usize> = (0..problem.nodes.len()).collect();
        start.shuffle(&mut rng);
        let cand = two_opt(problem, &start);
        let len = problem.tour_length(&cand);
        if len < best_len {
            best = cand;
            best_len = len;
        }
    }
    best
}

/// Lifted target tour: node `k` stands for target `targets_of[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedTour {
    pub problem: TourProblem,
    pub targets_of: Vec<usize>,
    pub h: f64,
}

/// Largest pairwise distance within any cluster.
pub fn max_cluster_diameter(targets: &[Target], clusters: &[Cluster]) -> f64 {
    clusters
        .iter()
        .map(|c| {
            let mut d: f64 = 0.0;
            for (a, &i) in c.target_indices.iter().enumerate() {
                for &j in &c.target_indices[a + 1..] {
                    d = d.max(euclidean(&targets[i].position(), &targets[j].position()));
                }
            }
            d
        })
        .fold(0.0, f64::max)
}

fn check_base_order(clusters: &[Cluster], base_order: &[usize]) -> Result<()> {
    let mut seen = vec![false; clusters.len()];
    for &c in base_order {
        if c >= clusters.len() || std::mem::replace(&mut seen[c], true) {
            return Err(PlanError::InvalidInput(format!(
                "base order {base_order:?} is not a permutation of {} clusters",
                clusters.len()
            )));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(PlanError::InvalidInput("base order misses a cluster".into()));
    }
    Ok(())
}

/// Lifts targets to 4D with a fourth coordinate of `rank · h·√2`, where rank
/// is the cluster's position in `base_order` and `h = h_scale ·` the largest
/// cluster diameter. Home sits at rank 0.
pub fn virtual_separation(
    targets: &[Target],
    clusters: &[Cluster],
    base_order: &[usize],
    h_scale: f64,
    home: [f64; 3],
) -> Result<LiftedTour> {
    if !(h_scale >= 1.0 && h_scale.is_finite()) {
        return Err(PlanError::InvalidInput(format!(
            "h_scale must be at least 1, got {h_scale}"
        )));
    }
    check_base_order(clusters, base_order)?;
    let diameter = max_cluster_diameter(targets, clusters);
    let h = if diameter > 0.0 {
        h_scale * diameter
    } else {
        h_scale * DEFAULT_SEPARATION
    };
    let step = h * std::f64::consts::SQRT_2;
    let mut nodes = Vec::new();
    let mut targets_of = Vec::new();
    for (rank, &c) in base_order.iter().enumerate() {
        for &i in &clusters[c].target_indices {
            let t = &targets[i];
            nodes.push(vec![t.x, t.y, t.z, rank as f64 * step]);
            targets_of.push(i);
        }
    }
    let problem = TourProblem::new(vec![home[0], home[1], home[2], 0.0], nodes)?;
    Ok(LiftedTour { problem, targets_of, h })
}

/// Global target order: 2-Opt on the lifted problem, then a stable partition
/// by base order so every cluster is visited contiguously.
pub fn solve_target_sequence(
    targets: &[Target],
    clusters: &[Cluster],
    base_order: &[usize],
    h_scale: f64,
    seed: u64,
    home: [f64; 3],
) -> Result<Vec<usize>> {
    let lifted = virtual_separation(targets, clusters, base_order, h_scale, home)?;
    let order = solve_tsp_2opt(&lifted.problem, seed);
    let mut rank_of = HashMap::new();
    for (rank, &c) in base_order.iter().enumerate() {
        for &i in &clusters[c].target_indices {
            rank_of.insert(i, rank);
        }
    }
    let mut seq: Vec<usize> = order.iter().map(|&k| lifted.targets_of[k]).collect();
    seq.sort_by_key(|i| rank_of[i]);
    Ok(seq)
}

/// One layer of IK solutions per sequenced target, computed at its cluster's
/// base pose with the full joint-1 range, framed by the home configuration.
pub fn build_config_graph<M: ArmModel + ?Sized>(
    model: &M,
    targets: &[Target],
    clusters: &[Cluster],
    target_sequence: &[usize],
    home: JointVector,
) -> Result<ConfigGraph> {
    let mut cluster_of = vec![usize::MAX; targets.len()];
    for (c, cl) in clusters.iter().enumerate() {
        for &i in &cl.target_indices {
            cluster_of[i] = c;
        }
    }
    let owners: Vec<usize> = target_sequence
        .iter()
        .map(|&i| {
            cluster_of
                .get(i)
                .copied()
                .filter(|&c| c != usize::MAX)
                .ok_or_else(|| PlanError::Contract(format!("target {i} has no cluster")))
        })
        .collect::<Result<_>>()?;
    let interior: Vec<Vec<JointVector>> = target_sequence
        .par_iter()
        .zip(owners.par_iter())
        .map(|(&i, &c)| solve_ik(model, &clusters[c].base, &targets[i], false))
        .collect();
    let mut layers = Vec::with_capacity(interior.len() + 2);
    layers.push(vec![home]);
    layers.extend(interior);
    layers.push(vec![home]);
    Ok(ConfigGraph {
        layers,
        targets: target_sequence.to_vec(),
        clusters: owners,
    })
}

/// Shortest path through the layered graph by dynamic programming. Returns the
/// chosen node index per layer and the path cost.
pub fn shortest_layer_path(graph: &ConfigGraph) -> Result<(Vec<usize>, f64)> {
    if graph.layers.is_empty() {
        return Err(PlanError::InvalidInput("configuration graph has no layers".into()));
    }
    if let Some(k) = graph.layers.iter().position(|l| l.is_empty()) {
        return Err(
            match (
                graph.targets.get(k.wrapping_sub(1)),
                graph.clusters.get(k.wrapping_sub(1)),
            ) {
                (Some(&target), Some(&cluster)) => PlanError::EmptyLayer { target, cluster },
                _ => PlanError::InvalidInput(format!("configuration layer {k} is empty")),
            },
        );
    }
    let mut cost = vec![0.0; graph.layers[0].len()];
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(graph.layers.len());
    back.push(Vec::new());
    for k in 1..graph.layers.len() {
        let prev = &graph.layers[k - 1];
        let mut next_cost = Vec::with_capacity(graph.layers[k].len());
        let mut next_back = Vec::with_capacity(graph.layers[k].len());
        for q in &graph.layers[k] {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for (a, p) in prev.iter().enumerate() {
                let c = cost[a] + config_distance(p, q);
                if c < best {
                    best = c;
                    arg = a;
                }
            }
            next_cost.push(best);
            next_back.push(arg);
        }
        cost = next_cost;
        back.push(next_back);
    }
    let mut end = 0;
    for (a, &c) in cost.iter().enumerate() {
        if c < cost[end] {
            end = a;
        }
    }
    let total = cost[end];
    let mut path = vec![end];
    for k in (1..graph.layers.len()).rev() {
        let b = back[k][*path.last().expect("path is never empty")];
        path.push(b);
    }
    path.reverse();
    Ok((path, total))
}

/// The joint vectors along the shortest home-to-home path.
pub fn solve_config_sequence(graph: &ConfigGraph) -> Result<(Vec<JointVector>, f64)> {
    let (path, cost) = shortest_layer_path(graph)?;
    let seq = path.iter().enumerate().map(|(k, &a)| graph.layers[k][a]).collect();
    Ok((seq, cost))
}

/// Length of a joint-space polyline.
pub fn config_path_length(seq: &[JointVector]) -> f64 {
    seq.windows(2).map(|w| config_distance(&w[0], &w[1])).sum()
}
