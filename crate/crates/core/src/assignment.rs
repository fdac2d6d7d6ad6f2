//! Turning chosen floor points into clusters whose targets one base heading
//! can serve.

use std::f64::consts::TAU;

use crate::error::{PlanError, Result};
use crate::model::{wrap_angle, BasePose, Cluster, FloorGrid, GeometricRegion, RobotParams, Target, BOUNDARY_TOL};
use crate::scp::{floor_point_reaches, CoverSolution};

/// Circular extent of a set of azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthalSpan {
    /// Azimuths in `(-π, π]`, ascending.
    pub sorted: Vec<f64>,
    /// `gaps[i]` runs from `sorted[i]` to the next azimuth, the last one
    /// wrapping around to `sorted[0]`.
    pub gaps: Vec<f64>,
    /// `2π` minus the largest gap.
    pub width: f64,
    /// Middle of the covered arc.
    pub mid: f64,
    /// Position in `sorted` where the covered arc starts.
    pub start: usize,
}

pub fn azimuthal_width(azimuths: &[f64]) -> Result<AzimuthalSpan> {
    if azimuths.is_empty() {
        return Err(PlanError::InvalidInput("azimuthal width of an empty set".into()));
    }
    let mut sorted: Vec<f64> = azimuths.iter().map(|&a| wrap_angle(a)).collect();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let gaps: Vec<f64> = (0..k)
        .map(|i| {
            if i + 1 < k {
                sorted[i + 1] - sorted[i]
            } else {
                TAU + sorted[0] - sorted[k - 1]
            }
        })
        .collect();
    let mut g = 0;
    for (i, &gap) in gaps.iter().enumerate() {
        if gap > gaps[g] {
            g = i;
        }
    }
    let start = (g + 1) % k;
    let width = (TAU - gaps[g]).max(0.0);
    let mid = wrap_angle(sorted[start] + width / 2.0);
    Ok(AzimuthalSpan {
        sorted,
        gaps,
        width,
        mid,
        start,
    })
}

/// Largest azimuthal width a single base heading can serve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthLimit {
    pub delta_phi_max: f64,
}

impl AzimuthLimit {
    pub fn new(delta_phi_max: f64) -> Result<Self> {
        if !(delta_phi_max > 0.0 && delta_phi_max.is_finite()) {
            return Err(PlanError::InvalidInput(format!(
                "azimuth limit must be positive, got {delta_phi_max}"
            )));
        }
        Ok(AzimuthLimit { delta_phi_max })
    }

    pub fn from_params(params: &RobotParams) -> Result<Self> {
        AzimuthLimit::new(params.delta_phi_max())
    }

    fn admits(&self, width: f64) -> bool {
        width <= self.delta_phi_max + BOUNDARY_TOL
    }
}

/// Emits chosen sets as clusters, largest satisfiable set first, splitting an
/// oversized set into the fewest admissible arcs when nothing else fits.
///
/// Chosen sets keep their full membership until a target is emitted, so a
/// target covered by several chosen sets joins the first one emitted.
pub fn assign_clusters(
    solution: &CoverSolution,
    grid: &FloorGrid,
    targets: &[Target],
    limit: AzimuthLimit,
) -> Result<Vec<Cluster>> {
    let n = targets.len();
    if solution.covered.len() != n {
        return Err(PlanError::Contract(format!(
            "cover has {} assignments for {n} targets",
            solution.covered.len()
        )));
    }
    let mut pending: Vec<(usize, Vec<usize>)> = solution
        .chosen
        .iter()
        .zip(&solution.members)
        .map(|(&j, m)| (j, m.clone()))
        .collect();
    let mut emitted = vec![false; n];
    let mut clusters = Vec::new();

    loop {
        for (_, members) in pending.iter_mut() {
            members.retain(|&i| !emitted[i]);
        }
        pending.retain(|(_, m)| !m.is_empty());
        if pending.is_empty() {
            break;
        }
        let spans: Vec<AzimuthalSpan> = pending
            .iter()
            .map(|(_, m)| azimuthal_width(&azimuths(targets, m)))
            .collect::<Result<_>>()?;

        let mut pick: Option<usize> = None;
        for (k, span) in spans.iter().enumerate() {
            if limit.admits(span.width) && pick.is_none_or(|p| pending[k].1.len() > pending[p].1.len()) {
                pick = Some(k);
            }
        }
        match pick {
            Some(k) => {
                let (floor, members) = pending.remove(k);
                for &i in &members {
                    emitted[i] = true;
                }
                clusters.push(make_cluster(grid, floor, members, spans[k].mid));
            }
            None => {
                let mut k = 0;
                for c in 1..pending.len() {
                    if pending[c].1.len() > pending[k].1.len() {
                        k = c;
                    }
                }
                let (floor, members) = pending.remove(k);
                let pieces = split_arcs(targets, &members, limit.delta_phi_max);
                for (offset, piece) in pieces.into_iter().enumerate() {
                    pending.insert(k + offset, (floor, piece));
                }
            }
        }
    }

    if let Some(i) = emitted.iter().position(|&e| !e) {
        return Err(PlanError::Contract(format!(
            "target {i} was not assigned to any cluster"
        )));
    }
    for (c, cluster) in clusters.iter().enumerate() {
        let span = azimuthal_width(&azimuths(targets, &cluster.target_indices))?;
        if !limit.admits(span.width) {
            return Err(PlanError::Contract(format!(
                "cluster {c} spans {:.6} rad, over the limit {:.6}",
                span.width, limit.delta_phi_max
            )));
        }
    }
    Ok(clusters)
}

fn azimuths(targets: &[Target], members: &[usize]) -> Vec<f64> {
    members.iter().map(|&i| targets[i].phi).collect()
}

fn make_cluster(grid: &FloorGrid, floor: usize, mut members: Vec<usize>, heading: f64) -> Cluster {
    members.sort_unstable();
    let [x, y] = grid.point(floor);
    Cluster {
        target_indices: members,
        base: BasePose { x, y, heading },
        floor_index: Some(floor),
    }
}

/// Fewest circular arcs of width at most `max_width` covering the members'
/// azimuths. Every anchor point is tried; ties keep the anchor that follows
/// the largest gap.
fn split_arcs(targets: &[Target], members: &[usize], max_width: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = members.to_vec();
    order.sort_by(|&a, &b| targets[a].phi.total_cmp(&targets[b].phi).then(a.cmp(&b)));
    let phis: Vec<f64> = order.iter().map(|&i| targets[i].phi).collect();
    let k = order.len();
    let first = azimuthal_width(&phis).map(|s| s.start).unwrap_or(0);

    let sweep = |anchor: usize| -> Vec<Vec<usize>> {
        let mut arcs: Vec<Vec<usize>> = Vec::new();
        let mut arc_start = f64::NEG_INFINITY;
        for step in 0..k {
            let idx = (anchor + step) % k;
            let unwrapped = phis[idx] + if idx < anchor { TAU } else { 0.0 };
            if arcs.is_empty() || unwrapped - arc_start > max_width + BOUNDARY_TOL {
                arcs.push(Vec::new());
                arc_start = unwrapped;
            }
            arcs.last_mut().expect("arc pushed above").push(order[idx]);
        }
        arcs
    };

    let mut best = sweep(first);
    for anchor in (0..k).filter(|&a| a != first) {
        let arcs = sweep(anchor);
        if arcs.len() < best.len() {
            best = arcs;
        }
    }
    best
}

/// Checks partition, width bound and base admissibility of a cluster list.
pub fn verify_clusters(
    clusters: &[Cluster],
    targets: &[Target],
    region: &GeometricRegion,
    limit: AzimuthLimit,
) -> Result<()> {
    let mut seen = vec![false; targets.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        if cluster.target_indices.is_empty() {
            return Err(PlanError::Contract(format!("cluster {c} is empty")));
        }
        for &i in &cluster.target_indices {
            if i >= targets.len() || seen[i] {
                return Err(PlanError::Contract(format!("target {i} is repeated or out of range")));
            }
            seen[i] = true;
            let t = &targets[i];
            let off = wrap_angle(t.phi - cluster.base.heading).abs();
            if off > limit.delta_phi_max / 2.0 + 1e-9 {
                return Err(PlanError::Contract(format!(
                    "target {i} lies {off:.6} rad off the heading of cluster {c}"
                )));
            }
            if !floor_point_reaches(t, [cluster.base.x, cluster.base.y], region) {
                return Err(PlanError::Contract(format!(
                    "target {i} is outside the region of cluster {c}'s base"
                )));
            }
        }
        let span = azimuthal_width(&azimuths(targets, &cluster.target_indices))?;
        if !limit.admits(span.width) {
            return Err(PlanError::Contract(format!("cluster {c} exceeds the azimuth limit")));
        }
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(PlanError::Contract(format!("target {i} is in no cluster")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ScpInstance, SolverKind};
    use proptest::prelude::*;

    fn deg(v: f64) -> f64 {
        v.to_radians()
    }

    fn circ_eq(a: f64, b: f64) -> bool {
        wrap_angle(a - b).abs() < 1e-12
    }

    fn at_origin(phis_deg: &[f64]) -> Vec<Target> {
        phis_deg
            .iter()
            .map(|&p| Target::new(1.0, 0.0, 0.8, deg(130.0), deg(p)).unwrap())
            .collect()
    }

    fn cover(n: usize, sets: Vec<Vec<usize>>) -> CoverSolution {
        let inst = ScpInstance::new(n, sets).unwrap();
        let chosen: Vec<usize> = (0..inst.m()).collect();
        CoverSolution::from_chosen(&inst, SolverKind::Greedy, chosen).unwrap()
    }

    fn grid() -> FloorGrid {
        FloorGrid::new([0.0, 0.0], 0.1, 10, 10).unwrap()
    }

    #[test]
    fn single_azimuth() {
        let s = azimuthal_width(&[0.7]).unwrap();
        assert_eq!(s.width, 0.0);
        assert_eq!(s.mid, 0.7);
    }

    #[test]
    fn symmetric_triple() {
        let s = azimuthal_width(&[deg(-37.0), 0.0, deg(37.0)]).unwrap();
        let want = [37.0, 37.0, 286.0];
        for (g, w) in s.gaps.iter().zip(want) {
            assert!((g - deg(w)).abs() < 1e-12);
        }
        assert!((s.width - deg(74.0)).abs() < 1e-12);
        assert!(circ_eq(s.mid, 0.0));
    }

    #[test]
    fn wrap_around_pair() {
        let s = azimuthal_width(&[deg(170.0), deg(-170.0)]).unwrap();
        assert!((s.width - deg(20.0)).abs() < 1e-12);
        assert!(circ_eq(s.mid, deg(180.0)));
    }

    #[test]
    fn empty_is_rejected() {
        assert!(azimuthal_width(&[]).is_err());
    }

    #[test]
    fn limit_from_default_arm_is_160_degrees() {
        let l = AzimuthLimit::from_params(&RobotParams::default_arm()).unwrap();
        assert!((l.delta_phi_max - deg(160.0)).abs() < 1e-12);
        assert!(AzimuthLimit::new(0.0).is_err());
    }

    #[test]
    fn narrow_set_is_one_cluster() {
        let targets = at_origin(&[-37.0, 0.0, 37.0]);
        let sol = cover(3, vec![vec![0, 1, 2]]);
        let out = assign_clusters(&sol, &grid(), &targets, AzimuthLimit::new(deg(160.0)).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].target_indices, vec![0, 1, 2]);
        assert!(circ_eq(out[0].base.heading, 0.0));
        assert_eq!(out[0].floor_index, Some(0));
    }

    #[test]
    fn full_circle_splits_into_three() {
        let phis: Vec<f64> = (0..36).map(|k| -180.0 + 10.0 * k as f64 + 5.0).collect();
        let targets = at_origin(&phis);
        let sol = cover(36, vec![(0..36).collect()]);
        let limit = AzimuthLimit::new(deg(160.0)).unwrap();
        let out = assign_clusters(&sol, &grid(), &targets, limit).unwrap();
        assert_eq!(out.len(), 3);
        for c in &out {
            let s = azimuthal_width(&azimuths(&targets, &c.target_indices)).unwrap();
            assert!(s.width <= limit.delta_phi_max);
        }
    }

    #[test]
    fn disjoint_sets_pass_through() {
        let targets = at_origin(&[0.0, 10.0, 90.0, 100.0]);
        let sol = cover(4, vec![vec![0, 1], vec![2, 3]]);
        let out = assign_clusters(&sol, &grid(), &targets, AzimuthLimit::new(deg(160.0)).unwrap()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].target_indices, vec![0, 1]);
        assert_eq!(out[1].target_indices, vec![2, 3]);
        assert_eq!(out[1].floor_index, Some(1));
    }

    #[test]
    fn larger_set_claims_shared_targets() {
        let targets = at_origin(&[0.0, 10.0, 20.0]);
        let sol = cover(3, vec![vec![0], vec![0, 1, 2]]);
        let out = assign_clusters(&sol, &grid(), &targets, AzimuthLimit::new(deg(160.0)).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].floor_index, Some(1));
    }

    #[test]
    fn split_uses_the_wrap_gap() {
        // Width 200° needs two arcs of 100°: {0°, 100°} and {-160°}.
        let targets = at_origin(&[0.0, 100.0, -160.0]);
        let sol = cover(3, vec![vec![0, 1, 2]]);
        let out = assign_clusters(&sol, &grid(), &targets, AzimuthLimit::new(deg(100.0)).unwrap()).unwrap();
        assert_eq!(out.len(), 2);
    }

    proptest! {
        #[test]
        fn gaps_sum_to_full_turn(phis in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            let s = azimuthal_width(&phis).unwrap();
            let total: f64 = s.gaps.iter().sum();
            prop_assert!((total - TAU).abs() < 1e-9);
            prop_assert!(s.width >= 0.0 && s.width < TAU);
            for &p in &phis {
                prop_assert!(wrap_angle(p - s.mid).abs() <= s.width / 2.0 + 1e-9);
            }
        }

        #[test]
        fn split_is_minimal_and_partitions(
            phis in prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, 1..10),
            limit_deg in 20.0f64..200.0,
        ) {
            let targets: Vec<Target> = phis.iter().map(|&p| Target::new(0.0, 0.0, 0.0, 1.0, p).unwrap()).collect();
            let members: Vec<usize> = (0..targets.len()).collect();
            let limit = deg(limit_deg);
            let arcs = split_arcs(&targets, &members, limit);
            let mut all: Vec<usize> = arcs.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, members);
            for a in &arcs {
                prop_assert!(azimuthal_width(&azimuths(&targets, a)).unwrap().width <= limit + 1e-9);
            }
            prop_assert_eq!(arcs.len(), fewest_arcs_brute(&phis, limit));
        }
    }

    /// Some optimal covering has every arc starting at a point, so trying all
    /// subsets of start points by size finds the optimum.
    fn fewest_arcs_brute(phis: &[f64], limit: f64) -> usize {
        use itertools::Itertools;
        let inside = |start: f64, p: f64| (p - start).rem_euclid(TAU) <= limit + BOUNDARY_TOL;
        for c in 1..=phis.len() {
            let found = (0..phis.len())
                .combinations(c)
                .any(|starts| phis.iter().all(|&p| starts.iter().any(|&s| inside(phis[s], p))));
            if found {
                return c;
            }
        }
        unreachable!("one arc per point always covers")
    }
}
