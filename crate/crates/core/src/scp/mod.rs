//! Target/floor bigraph construction and the uniform-cost set cover solvers.

mod exact;
mod greedy;
mod lpr;
mod lrg;
pub mod simplex;

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::{solve_exact, EXACT_MAX_SETS};
pub use greedy::solve_greedy;
pub use lpr::{solve_lpr, LprOutcome};
pub use lrg::solve_lrg;

use crate::error::{PlanError, Result};
use crate::model::{check_feasibility, FloorGrid, GeometricRegion, ScpInstance, SolverKind, Target, BOUNDARY_TOL};

/// Closed-form membership: does a base at `floor_point`, turned to face the
/// target's azimuth, hold the target inside its geometric region?
pub fn floor_point_reaches(target: &Target, floor_point: [f64; 2], region: &GeometricRegion) -> bool {
    match Disk::of(target, region) {
        Some(disk) => disk.contains(target, floor_point, region),
        None => false,
    }
}

/// Horizontal annulus of admissible floor points for one target, with the
/// half-plane cut applied separately.
struct Disk {
    sin: f64,
    cos: f64,
    centre: [f64; 2],
    r_min2: f64,
    r_max2: f64,
}

impl Disk {
    fn of(target: &Target, region: &GeometricRegion) -> Option<Disk> {
        if target.z < region.z_min - BOUNDARY_TOL || target.z > region.z_max + BOUNDARY_TOL {
            return None;
        }
        let dz2 = (target.z - region.z_s).powi(2);
        let big2 = region.r_max * region.r_max;
        if dz2 > big2 + BOUNDARY_TOL {
            return None;
        }
        let small2 = region.r_min * region.r_min;
        let (sin, cos) = target.phi.sin_cos();
        Some(Disk {
            sin,
            cos,
            centre: [target.x - region.x_s * cos, target.y - region.x_s * sin],
            r_min2: if dz2 > small2 { 0.0 } else { small2 - dz2 },
            r_max2: big2 - dz2,
        })
    }

    fn contains(&self, target: &Target, [xf, yf]: [f64; 2], region: &GeometricRegion) -> bool {
        let along = (target.x - xf) * self.cos + (target.y - yf) * self.sin;
        if along < region.x_min - BOUNDARY_TOL {
            return false;
        }
        let ex = self.centre[0] - xf;
        let ey = self.centre[1] - yf;
        let d2 = ex * ex + ey * ey;
        d2 >= self.r_min2 - BOUNDARY_TOL && d2 <= self.r_max2 + BOUNDARY_TOL
    }
}

/// Floor points from which the (rotated) geometric region contains the target,
/// by the closed-form disk/half-plane test. Sorted ascending.
pub fn reachable_floor_points(target: &Target, grid: &FloorGrid, region: &GeometricRegion) -> Vec<usize> {
    let Some(disk) = Disk::of(target, region) else {
        return Vec::new();
    };
    let radius = disk.r_max2.max(0.0).sqrt();
    let cs = grid.cell_size;
    let span = |centre: f64, origin: f64, n: usize| {
        let lo = ((centre - radius - origin) / cs).floor() - 1.0;
        let hi = ((centre + radius - origin) / cs).ceil() + 1.0;
        let lo = lo.max(0.0) as usize;
        let hi = (hi.max(-1.0) as isize).min(n as isize - 1);
        (lo, hi)
    };
    let (col_lo, col_hi) = span(disk.centre[0], grid.origin[0], grid.nx);
    let (row_lo, row_hi) = span(disk.centre[1], grid.origin[1], grid.ny);

    let mut out = Vec::new();
    if col_hi < 0 || row_hi < 0 {
        return out;
    }
    for row in row_lo..=row_hi as usize {
        for col in col_lo..=col_hi as usize {
            let j = grid.index(col, row);
            if disk.contains(target, grid.point(j), region) {
                out.push(j);
            }
        }
    }
    out
}

/// Floor grid spanning the target footprint inflated by the largest horizontal
/// distance at which a base can still reach a target.
pub fn floor_grid_for(targets: &[Target], region: &GeometricRegion, cell_size: f64) -> Result<FloorGrid> {
    if targets.is_empty() {
        return Err(PlanError::InvalidInput("no targets".into()));
    }
    let pad = region.x_s.abs() + region.r_max;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for t in targets {
        x0 = x0.min(t.x);
        y0 = y0.min(t.y);
        x1 = x1.max(t.x);
        y1 = y1.max(t.y);
    }
    FloorGrid::covering(x0 - pad, y0 - pad, x1 + pad, y1 + pad, cell_size)
}

/// Runs the per-target floor search and transposes it into one reachable
/// target set per floor point.
pub fn build_bigraph(targets: &[Target], grid: &FloorGrid, region: &GeometricRegion) -> Result<ScpInstance> {
    if targets.is_empty() {
        return Err(PlanError::InvalidInput("no targets".into()));
    }
    let per_target: Vec<Vec<usize>> = targets
        .par_iter()
        .map(|t| reachable_floor_points(t, grid, region))
        .collect();
    let mut sets = vec![Vec::new(); grid.len()];
    for (i, floors) in per_target.iter().enumerate() {
        for &j in floors {
            sets[j].push(i);
        }
    }
    Ok(ScpInstance {
        n: targets.len(),
        sets,
        floor: Some(grid.clone()),
    })
}

/// A cover: chosen set indices plus a single owning chosen set per target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub solver: SolverKind,
    /// Indices into the instance's sets, in selection order.
    pub chosen: Vec<usize>,
    /// Full membership of each chosen set.
    pub members: Vec<Vec<usize>>,
    /// For every target, the position in `chosen` of the set that owns it.
    pub covered: Vec<usize>,
    /// LP relaxation optimum, for the LP-based solver.
    pub lp_objective: Option<f64>,
}

impl CoverSolution {
    /// Assigns each target to the first chosen set containing it.
    pub(crate) fn from_chosen(inst: &ScpInstance, solver: SolverKind, chosen: Vec<usize>) -> Result<Self> {
        let mut covered = vec![usize::MAX; inst.n];
        for (k, &j) in chosen.iter().enumerate() {
            for &i in &inst.sets[j] {
                if covered[i] == usize::MAX {
                    covered[i] = k;
                }
            }
        }
        if let Some(i) = covered.iter().position(|&k| k == usize::MAX) {
            return Err(PlanError::Contract(format!(
                "{} solver returned a non-cover: target {i} is uncovered",
                solver.name()
            )));
        }
        let members = chosen.iter().map(|&j| inst.sets[j].clone()).collect();
        Ok(CoverSolution {
            solver,
            chosen,
            members,
            covered,
            lp_objective: None,
        })
    }

    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    /// Reassigns targets covered by several chosen sets to the one whose floor
    /// point is nearest in xy, then drops chosen sets left without targets.
    pub fn assign_nearest(&mut self, inst: &ScpInstance, targets: &[Target]) -> Result<()> {
        let grid = inst
            .floor
            .as_ref()
            .ok_or_else(|| PlanError::InvalidInput("instance has no floor grid".into()))?;
        let mut owner = vec![usize::MAX; inst.n];
        let mut best = vec![f64::INFINITY; inst.n];
        for (k, members) in self.members.iter().enumerate() {
            let [xf, yf] = grid.point(self.chosen[k]);
            for &i in members {
                let d = (targets[i].x - xf).powi(2) + (targets[i].y - yf).powi(2);
                if d < best[i] {
                    best[i] = d;
                    owner[i] = k;
                }
            }
        }
        let mut used = vec![false; self.chosen.len()];
        for &k in &owner {
            used[k] = true;
        }
        let mut remap = vec![usize::MAX; self.chosen.len()];
        let mut next = 0;
        for (k, &u) in used.iter().enumerate() {
            if u {
                remap[k] = next;
                next += 1;
            }
        }
        self.chosen = self
            .chosen
            .iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(&j, _)| j)
            .collect();
        self.members = std::mem::take(&mut self.members)
            .into_iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(m, _)| m)
            .collect();
        self.covered = owner.into_iter().map(|k| remap[k]).collect();
        Ok(())
    }
}

/// Solver knobs shared by the dispatcher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub lrg_iters: usize,
    pub seed: u64,
    /// Simplex pivot cap; `None` means 50·(n+m).
    pub simplex_cap: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            lrg_iters: 20,
            seed: 0,
            simplex_cap: None,
        }
    }
}

pub fn solve(inst: &ScpInstance, kind: SolverKind, opts: &SolverOptions) -> Result<CoverSolution> {
    match kind {
        SolverKind::Greedy => solve_greedy(inst),
        SolverKind::Lpr => solve_lpr(inst, opts.simplex_cap).map(|o| o.solution),
        SolverKind::Lrg => solve_lrg(inst, opts.lrg_iters, opts.seed),
        SolverKind::Exact => solve_exact(inst),
    }
}

pub(crate) fn require_feasible(inst: &ScpInstance) -> Result<()> {
    let report = check_feasibility(inst);
    if report.feasible {
        Ok(())
    } else {
        Err(PlanError::Infeasible {
            uncovered: report.uncovered,
        })
    }
}

/// Drops chosen sets whose elements are all covered by the others, trying
/// candidates in the given order.
pub(crate) fn prune_redundant(inst: &ScpInstance, chosen: &mut Vec<usize>, order: &[usize]) {
    let mut mult = vec![0u32; inst.n];
    for &j in chosen.iter() {
        for &i in &inst.sets[j] {
            mult[i] += 1;
        }
    }
    let mut keep: Vec<bool> = vec![true; chosen.len()];
    for &pos in order {
        let j = chosen[pos];
        if inst.sets[j].iter().all(|&i| mult[i] >= 2) {
            keep[pos] = false;
            for &i in &inst.sets[j] {
                mult[i] -= 1;
            }
        }
    }
    let mut k = 0;
    chosen.retain(|_| {
        let r = keep[k];
        k += 1;
        r
    });
}

/// Sets that survive dominance reduction: non-empty, not a duplicate of an
/// earlier set and not a strict subset of another set. The LP optimum is
/// unchanged because weight on a dominated set can move to its superset.
pub(crate) fn undominated(inst: &ScpInstance) -> Vec<usize> {
    let bits: Vec<_> = inst.sets.iter().map(|s| bitset_of(inst.n, s)).collect();
    let mut keep = Vec::new();
    'outer: for j in 0..inst.m() {
        if inst.sets[j].is_empty() {
            continue;
        }
        for k in 0..inst.m() {
            if k == j || inst.sets[k].len() < inst.sets[j].len() {
                continue;
            }
            if bits[j].is_subset(&bits[k]) && (inst.sets[k].len() > inst.sets[j].len() || k < j) {
                continue 'outer;
            }
        }
        keep.push(j);
    }
    keep
}

pub(crate) fn bitset_of(n: usize, items: &[usize]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for &i in items {
        b.insert(i);
    }
    b
}

/// Plain-text exchange format: a header line, then one line per floor point
/// listing the floor index followed by its member target indices.
pub fn write_exchange(inst: &ScpInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# set-cover instance: n targets, m floor points");
    let _ = writeln!(out, "n {} m {}", inst.n, inst.m());
    for (j, s) in inst.sets.iter().enumerate() {
        let _ = write!(out, "{j}");
        for i in s {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

pub fn read_exchange(text: &str) -> Result<ScpInstance> {
    let bad = |line: usize, what: &str| PlanError::InvalidInput(format!("exchange line {line}: {what}"));
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "n" || h[2] != "m" {
        return Err(bad(hl + 1, "expected `n <n> m <m>`"));
    }
    let n: usize = h[1].parse().map_err(|_| bad(hl + 1, "bad n"))?;
    let m: usize = h[3].parse().map_err(|_| bad(hl + 1, "bad m"))?;
    let mut sets = vec![Vec::new(); m];
    let mut seen = 0;
    for (ln, line) in lines {
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(ln + 1, "not an integer")))
            .collect::<Result<_>>()?;
        let (&j, rest) = nums.split_first().ok_or_else(|| bad(ln + 1, "empty line"))?;
        if j >= m {
            return Err(bad(ln + 1, "floor index out of range"));
        }
        sets[j] = rest.to_vec();
        seen += 1;
    }
    if seen != m {
        return Err(bad(0, "set count does not match header"));
    }
    ScpInstance::new(n, sets)
}
