//! Domain types shared by every stage of the planner.
//!
//! Everything here is an immutable value once constructed. Angles are radians
//! and lengths are metres; conversion to degrees happens only in [`crate::io`].

use std::f64::consts::{PI, TAU};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Slack applied to every half-space and shell inequality.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Wraps an angle into `(-π, π]`.
pub fn normalize_azimuth(angle: f64) -> Result<f64> {
    if !angle.is_finite() {
        return Err(PlanError::InvalidInput(format!("azimuth must be finite, got {angle}")));
    }
    Ok(wrap_angle(angle))
}

/// Infallible variant of [`normalize_azimuth`] for values known to be finite.
pub(crate) fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    // rem_euclid can return TAU itself for tiny negative inputs
    if a <= -PI {
        a += TAU;
    }
    a
}

/// A 5D task point: tool-tip position plus tool-axis direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Polar angle of the tool axis, measured from +z.
    pub theta: f64,
    /// Azimuthal angle of the tool axis, in `(-π, π]`.
    pub phi: f64,
}

impl Target {
    pub fn new(x: f64, y: f64, z: f64, theta: f64, phi: f64) -> Result<Self> {
        for (name, v) in [("x", x), ("y", y), ("z", z), ("theta", theta), ("phi", phi)] {
            if !v.is_finite() {
                return Err(PlanError::InvalidInput(format!(
                    "target coordinate {name} must be finite, got {v}"
                )));
            }
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(PlanError::InvalidInput(format!(
                "polar angle must lie in [0, π], got {theta}"
            )));
        }
        Ok(Target {
            x,
            y,
            z,
            theta,
            phi: wrap_angle(phi),
        })
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unit tool-axis direction.
    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Regular grid of candidate base positions on the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorGrid {
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl FloorGrid {
    pub fn new(origin: [f64; 2], cell_size: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(PlanError::InvalidInput(format!(
                "floor cell size must be positive, got {cell_size}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(PlanError::InvalidInput("floor grid has no points".into()));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(PlanError::InvalidInput("floor origin must be finite".into()));
        }
        Ok(FloorGrid {
            origin,
            cell_size,
            nx,
            ny,
        })
    }

    /// Grid covering `[x_min, x_max] × [y_min, y_max]`, origin snapped down to a
    /// multiple of `cell_size`.
    pub fn covering(x_min: f64, y_min: f64, x_max: f64, y_max: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(PlanError::InvalidInput(format!(
                "floor cell size must be positive, got {cell_size}"
            )));
        }
        if !(x_max >= x_min && y_max >= y_min) {
            return Err(PlanError::InvalidInput("floor extent is empty".into()));
        }
        let ox = (x_min / cell_size).floor() * cell_size;
        let oy = (y_min / cell_size).floor() * cell_size;
        let nx = ((x_max - ox) / cell_size - 1e-9).ceil().max(0.0) as usize + 1;
        let ny = ((y_max - oy) / cell_size - 1e-9).ceil().max(0.0) as usize + 1;
        FloorGrid::new([ox, oy], cell_size, nx, ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: index = row·nx + col.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let row = index / self.nx;
        let col = index % self.nx;
        [
            self.origin[0] + col as f64 * self.cell_size,
            self.origin[1] + row as f64 * self.cell_size,
        ]
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.nx + col
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Kinematic description of the arm and the reachability sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Hardware limit of joint 1 (symmetric).
    pub j1_lim: f64,
    /// Joint-1 range used while generating the reachability database.
    pub j1_res: f64,
    /// Height of joint 2 above the floor.
    pub z_j2: f64,
    pub l1: f64,
    pub l2: f64,
    /// Tool length from the wrist centre to the tip.
    pub l: f64,
    /// Symmetric bounds of q1..q6. q1's entry is superseded by `j1_lim`.
    pub joint_limits: [f64; 6],
    pub polar_range: [f64; 2],
    pub n_sam: usize,
}

/// Default wrist limit (q4..q6).
pub const DEFAULT_WRIST_LIMIT: f64 = 2.0;

impl RobotParams {
    /// A VS-087-sized arm on a low mobile base.
    pub fn default_arm() -> Self {
        RobotParams {
            j1_lim: 170f64.to_radians(),
            j1_res: 90f64.to_radians(),
            z_j2: 0.395,
            l1: 0.445,
            l2: 0.445,
            l: 0.25,
            joint_limits: [
                170f64.to_radians(),
                135f64.to_radians(),
                150f64.to_radians(),
                DEFAULT_WRIST_LIMIT,
                DEFAULT_WRIST_LIMIT,
                DEFAULT_WRIST_LIMIT,
            ],
            polar_range: [110f64.to_radians(), 150f64.to_radians()],
            n_sam: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PlanError::InvalidInput(msg));
        let finite = [self.j1_lim, self.j1_res, self.z_j2, self.l1, self.l2, self.l]
            .iter()
            .chain(self.joint_limits.iter())
            .chain(self.polar_range.iter())
            .all(|v| v.is_finite());
        if !finite {
            return bad("robot parameters must be finite".into());
        }
        if !(self.j1_res > 0.0 && self.j1_res <= self.j1_lim && self.j1_lim <= PI) {
            return bad(format!(
                "joint-1 ranges must satisfy 0 < j1_res <= j1_lim <= π (got {} and {})",
                self.j1_res, self.j1_lim
            ));
        }
        if self.n_sam < 2 {
            return bad(format!("n_sam must be at least 2, got {}", self.n_sam));
        }
        if !(self.polar_range[0] < self.polar_range[1]) {
            return bad("polar range must be increasing".into());
        }
        if !(0.0..=PI).contains(&self.polar_range[0]) || !(0.0..=PI).contains(&self.polar_range[1]) {
            return bad("polar range must lie in [0, π]".into());
        }
        if !(self.l1 > 0.0 && self.l2 > 0.0 && self.l > 0.0 && self.z_j2 > 0.0) {
            return bad("link lengths and shoulder height must be positive".into());
        }
        if self.joint_limits.iter().any(|&v| v < 0.0) {
            return bad("joint limits must be non-negative".into());
        }
        Ok(())
    }

    /// Azimuthal width servable from one base pose.
    pub fn delta_phi_max(&self) -> f64 {
        2.0 * (self.j1_lim - self.j1_res)
    }

    /// `n_sam` polar angles evenly spaced over `polar_range`, endpoints included.
    pub fn sampling_polar(&self) -> Vec<f64> {
        let [lo, hi] = self.polar_range;
        let steps = (self.n_sam - 1) as f64;
        (0..self.n_sam).map(|k| lo + (hi - lo) * k as f64 / steps).collect()
    }

    pub fn mean_sampling_polar(&self) -> f64 {
        let s = self.sampling_polar();
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Inner approximation of the reachable workspace: three limit planes and a
/// spherical shell, all in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricRegion {
    pub x_min: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub x_s: f64,
    pub z_s: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl GeometricRegion {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.x_min, self.z_min, self.z_max, self.x_s, self.z_s, self.r_min, self.r_max,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(PlanError::InvalidInput("region values must be finite".into()));
        }
        if !(self.z_min < self.z_max) {
            return Err(PlanError::InvalidInput("region needs z_min < z_max".into()));
        }
        if !(0.0 <= self.r_min && self.r_min < self.r_max) {
            return Err(PlanError::InvalidInput("region needs 0 <= r_min < r_max".into()));
        }
        // Non-empty: the shell must reach past the x_min plane inside the slab.
        let dz = if self.z_s < self.z_min {
            self.z_min - self.z_s
        } else if self.z_s > self.z_max {
            self.z_s - self.z_max
        } else {
            0.0
        };
        if dz >= self.r_max || self.x_s + (self.r_max * self.r_max - dz * dz).sqrt() < self.x_min {
            return Err(PlanError::InvalidInput("region is empty".into()));
        }
        Ok(())
    }
}

/// Planar base pose: position on the floor and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl BasePose {
    pub const ORIGIN: BasePose = BasePose {
        x: 0.0,
        y: 0.0,
        heading: 0.0,
    };
}

/// Joint angles q1..q6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointVector(pub [f64; 6]);

impl JointVector {
    pub const ZERO: JointVector = JointVector([0.0; 6]);
}

/// Uniform-cost set cover instance built from the target/floor bigraph.
#[derive(Debug, Clone, PartialEq)]
pub struct ScpInstance {
    /// Universe size (number of targets).
    pub n: usize,
    /// Reachable target indices per floor point, sorted ascending.
    pub sets: Vec<Vec<usize>>,
    pub floor: Option<FloorGrid>,
}

impl ScpInstance {
    pub fn new(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets = sets;
        for (j, s) in sets.iter_mut().enumerate() {
            if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                return Err(PlanError::InvalidInput(format!(
                    "set {j} contains index {bad} outside the universe of size {n}"
                )));
            }
            s.sort_unstable();
            s.dedup();
        }
        Ok(ScpInstance { n, sets, floor: None })
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn bitsets(&self) -> Vec<FixedBitSet> {
        self.sets
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(self.n);
                for &i in s {
                    b.insert(i);
                }
                b
            })
            .collect()
    }

    /// Maximum number of sets that contain any single element.
    pub fn max_frequency(&self) -> usize {
        let mut freq = vec![0usize; self.n];
        for s in &self.sets {
            for &i in s {
                freq[i] += 1;
            }
        }
        freq.into_iter().max().unwrap_or(0)
    }
}

/// Outcome of the union check over all reachable sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub uncovered: Vec<usize>,
}

/// A task is feasible when every target lies in at least one reachable set.
pub fn check_feasibility(scp: &ScpInstance) -> FeasibilityReport {
    let mut covered = FixedBitSet::with_capacity(scp.n);
    for s in &scp.sets {
        for &i in s {
            covered.insert(i);
        }
    }
    let uncovered: Vec<usize> = covered.zeroes().collect();
    FeasibilityReport {
        feasible: uncovered.is_empty(),
        uncovered,
    }
}

/// Targets served from one base pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cluster {
    pub target_indices: Vec<usize>,
    pub base: BasePose,
    /// Floor-grid index the base sits on, when it came from a grid.
    pub floor_index: Option<usize>,
}

/// Nodes of a closed tour that starts and ends at `home`.
#[derive(Debug, Clone, PartialEq)]
pub struct TourProblem {
    pub home: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
}

impl TourProblem {
    pub fn new(home: Vec<f64>, nodes: Vec<Vec<f64>>) -> Result<Self> {
        let dim = home.len();
        if nodes.iter().any(|p| p.len() != dim) {
            return Err(PlanError::InvalidInput("tour nodes have mixed dimensions".into()));
        }
        if home.iter().chain(nodes.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(PlanError::InvalidInput("tour coordinates must be finite".into()));
        }
        Ok(TourProblem { home, nodes })
    }

    /// Point `k` of the problem: 0 is home, `k + 1` is node `k`.
    pub fn point(&self, k: usize) -> &[f64] {
        if k == 0 {
            &self.home
        } else {
            &self.nodes[k - 1]
        }
    }

    /// Length of home → order… → home.
    pub fn tour_length(&self, order: &[usize]) -> f64 {
        let mut prev: &[f64] = &self.home;
        let mut total = 0.0;
        for &k in order {
            total += euclidean(prev, &self.nodes[k]);
            prev = &self.nodes[k];
        }
        total + euclidean(prev, &self.home)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Layered configuration graph: home, one layer of IK solutions per sequenced
/// target, home again.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigGraph {
    pub layers: Vec<Vec<JointVector>>,
    /// Target index of each interior layer (`layers[k + 1]` belongs to `targets[k]`).
    pub targets: Vec<usize>,
    /// Cluster index of each interior layer.
    pub clusters: Vec<usize>,
}

/// Unweighted joint-space L2 distance.
pub fn config_distance(a: &JointVector, b: &JointVector) -> f64 {
    a.0.iter()
        .zip(b.0.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Greedy,
    Lpr,
    Lrg,
    Exact,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::Lpr => "lpr",
            SolverKind::Lrg => "lrg",
            SolverKind::Exact => "exact",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SolverKind::Greedy),
            "lpr" => Ok(SolverKind::Lpr),
            "lrg" => Ok(SolverKind::Lrg),
            "exact" => Ok(SolverKind::Exact),
            other => Err(PlanError::InvalidInput(format!(
                "unknown solver `{other}` (expected greedy, lpr, lrg or exact)"
            ))),
        }
    }
}

/// Wall-clock seconds spent in each pipeline stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub database: f64,
    pub region_fit: f64,
    pub bigraph: f64,
    pub feasibility: f64,
    pub scp: f64,
    pub assignment: f64,
    pub base_tour: f64,
    pub target_tour: f64,
    pub ik_layers: f64,
    pub config_search: f64,
    pub assembly: f64,
    pub total: f64,
}

impl Timing {
    pub fn stage_sum(&self) -> f64 {
        self.database
            + self.region_fit
            + self.bigraph
            + self.feasibility
            + self.scp
            + self.assignment
            + self.base_tour
            + self.target_tour
            + self.ik_layers
            + self.config_search
            + self.assembly
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStats {
    pub solver: SolverKind,
    /// Number of sets chosen by the set-cover solver, before azimuthal splitting.
    pub chosen_sets: usize,
    pub cluster_count: usize,
    pub floor_points: usize,
    pub base_tour_length: f64,
    pub target_tour_length: f64,
    pub config_path_length: f64,
    pub timing: Timing,
}

/// Complete visit plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    /// Geometric region the clusters were built against.
    pub region: GeometricRegion,
    pub clusters: Vec<Cluster>,
    pub home_base: BasePose,
    /// Cluster indices in visiting order, without the home pose at the ends.
    pub base_sequence: Vec<usize>,
    pub target_sequence: Vec<usize>,
    /// Home configuration, one joint vector per entry of `target_sequence`, home again.
    pub config_sequence: Vec<JointVector>,
    pub stats: PlanStats,
}
