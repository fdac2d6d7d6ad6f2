//! Voxel reachability database and the geometric region fitted inside it.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PlanError, Result};
use crate::kinematics::ArmModel;
use crate::model::{GeometricRegion, RobotParams, BOUNDARY_TOL};

const DB_MAGIC: &str = "baseplan-reachability-db v1";

/// Axis-aligned box in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    /// Box enclosing everything the default arm can reach in front of itself.
    pub fn default_for(params: &RobotParams) -> Aabb {
        let reach = params.l1 + params.l2 + params.l + 0.1;
        Aabb {
            min: [0.0, -reach, 0.0],
            max: [reach, reach, params.z_j2 + params.l1 + params.l2 + params.l],
        }
    }
}

/// Grid of IK-validated voxel centres relative to a base at the origin facing +x'.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityDatabase {
    pub voxel_size: f64,
    pub bounds: Aabb,
    pub dims: [usize; 3],
    /// Row-major with x fastest: index = (iz·ny + iy)·nx + ix.
    pub valid: Vec<bool>,
    pub sampling_polar: Vec<f64>,
}

fn axis_count(lo: f64, hi: f64, size: f64) -> usize {
    if !(hi > lo) {
        return 0;
    }
    ((hi - lo) / size - 1e-9).ceil().max(0.0) as usize
}

impl ReachabilityDatabase {
    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn centre(&self, index: usize) -> [f64; 3] {
        let [nx, ny, _] = self.dims;
        let ix = index % nx;
        let iy = (index / nx) % ny;
        let iz = index / (nx * ny);
        let c = |lo: f64, i: usize| lo + (i as f64 + 0.5) * self.voxel_size;
        [
            c(self.bounds.min[0], ix),
            c(self.bounds.min[1], iy),
            c(self.bounds.min[2], iz),
        ]
    }

    /// Text sidecar: header lines followed by a hex bitmask (LSB-first per byte).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{DB_MAGIC}");
        let _ = writeln!(out, "voxel_size {:?}", self.voxel_size);
        let b = &self.bounds;
        let _ = writeln!(
            out,
            "bounds {:?} {:?} {:?} {:?} {:?} {:?}",
            b.min[0], b.min[1], b.min[2], b.max[0], b.max[1], b.max[2]
        );
        let _ = writeln!(out, "dims {} {} {}", self.dims[0], self.dims[1], self.dims[2]);
        let _ = write!(out, "polar {}", self.sampling_polar.len());
        for p in &self.sampling_polar {
            let _ = write!(out, " {p:?}");
        }
        out.push('\n');
        let mut bytes = vec![0u8; self.valid.len().div_ceil(8)];
        for (i, &v) in self.valid.iter().enumerate() {
            if v {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        let _ = writeln!(out, "bits {}", hex::encode(bytes));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| PlanError::InvalidInput(format!("malformed reachability database: {what}"));
        let mut lines = text.lines();
        if lines.next() != Some(DB_MAGIC) {
            return Err(bad("missing header"));
        }
        let mut field = |name: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| bad(name))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(bad(name));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let floats = |v: &[String], what: &str| -> Result<Vec<f64>> {
            v.iter().map(|s| s.parse::<f64>().map_err(|_| bad(what))).collect()
        };
        let voxel_size = *floats(&field("voxel_size")?, "voxel_size")?
            .first()
            .ok_or_else(|| bad("voxel_size"))?;
        let b = floats(&field("bounds")?, "bounds")?;
        if b.len() != 6 {
            return Err(bad("bounds"));
        }
        let d: Vec<usize> = field("dims")?
            .iter()
            .map(|s| s.parse().map_err(|_| bad("dims")))
            .collect::<Result<_>>()?;
        if d.len() != 3 {
            return Err(bad("dims"));
        }
        let polar = field("polar")?;
        let n_polar: usize = polar.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("polar"))?;
        let sampling_polar = floats(&polar[1..], "polar")?;
        if sampling_polar.len() != n_polar {
            return Err(bad("polar count"));
        }
        let bits = field("bits")?;
        let bytes = hex::decode(bits.first().map(String::as_str).unwrap_or("")).map_err(|_| bad("bits"))?;
        let len = d[0] * d[1] * d[2];
        if bytes.len() != len.div_ceil(8) {
            return Err(bad("bit payload length"));
        }
        let valid = (0..len).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect();
        Ok(ReachabilityDatabase {
            voxel_size,
            bounds: Aabb {
                min: [b[0], b[1], b[2]],
                max: [b[3], b[4], b[5]],
            },
            dims: [d[0], d[1], d[2]],
            valid,
            sampling_polar,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| PlanError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PlanError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }
}

/// Content hash identifying a database built from these inputs.
pub fn cache_key(params: &RobotParams, voxel_size: f64, bounds: &Aabb) -> String {
    let payload = serde_json::to_string(&(params, voxel_size, bounds)).expect("params serialize");
    hex::encode(Sha256::digest(payload.as_bytes()))
}

/// Marks each voxel valid when IK (joint 1 restricted) succeeds at its centre
/// for every sampling polar angle with zero azimuth.
pub fn generate_database<M: ArmModel + ?Sized>(
    model: &M,
    voxel_size: f64,
    bounds: Aabb,
) -> Result<ReachabilityDatabase> {
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(PlanError::InvalidInput(format!(
            "voxel size must be positive, got {voxel_size}"
        )));
    }
    let dims = [0, 1, 2].map(|k| axis_count(bounds.min[k], bounds.max[k], voxel_size));
    let total = dims[0] * dims[1] * dims[2];
    if total == 0 {
        return Err(PlanError::InvalidInput("database bounds contain no voxels".into()));
    }
    let sampling_polar = model.params().sampling_polar();
    let directions: Vec<[f64; 3]> = sampling_polar.iter().map(|&t| [t.sin(), 0.0, t.cos()]).collect();
    let mut db = ReachabilityDatabase {
        voxel_size,
        bounds,
        dims,
        valid: Vec::new(),
        sampling_polar,
    };
    db.valid = (0..total)
        .into_par_iter()
        .map(|i| {
            let c = db.centre(i);
            directions.iter().all(|&d| model.reachable_local(c, d, true))
        })
        .collect();
    Ok(db)
}

/// Eq. 7 membership in the robot frame.
pub fn region_contains(region: &GeometricRegion, point: [f64; 3]) -> bool {
    let [x, y, z] = point;
    if z < region.z_min - BOUNDARY_TOL || z > region.z_max + BOUNDARY_TOL || x < region.x_min - BOUNDARY_TOL {
        return false;
    }
    let dx = x - region.x_s;
    let dz = z - region.z_s;
    let r2 = dx * dx + y * y + dz * dz;
    r2 >= region.r_min * region.r_min - BOUNDARY_TOL && r2 <= region.r_max * region.r_max + BOUNDARY_TOL
}

/// Sphere centre implied by the tool length and the mean sampling polar angle.
pub fn sphere_centre(params: &RobotParams) -> (f64, f64) {
    let mean = params.mean_sampling_polar();
    (params.l * mean.sin(), params.z_j2 + params.l * mean.cos())
}

/// Fits the spherical shell inside the valid voxel cloud, given the three
/// operator-chosen limit planes. Both radii are pulled inwards by half a voxel
/// space-diagonal.
pub fn fit_region(
    db: &ReachabilityDatabase,
    x_min: f64,
    z_min: f64,
    z_max: f64,
    params: &RobotParams,
) -> Result<GeometricRegion> {
    if db.is_empty() {
        return Err(PlanError::RegionFit("reachability database is empty".into()));
    }
    if !(z_min < z_max) {
        return Err(PlanError::RegionFit(format!(
            "need z_min < z_max, got {z_min} and {z_max}"
        )));
    }
    let (x_s, z_s) = sphere_centre(params);
    let margin = db.voxel_size * 3f64.sqrt() / 2.0;

    // (radius, valid, voxel index) for every voxel centre inside the slab
    let mut slab: Vec<(f64, bool, usize)> = (0..db.len())
        .filter_map(|i| {
            let [x, y, z] = db.centre(i);
            let in_slab = z >= z_min - BOUNDARY_TOL && z <= z_max + BOUNDARY_TOL && x >= x_min - BOUNDARY_TOL;
            in_slab.then(|| (((x - x_s).powi(2) + y * y + (z - z_s).powi(2)).sqrt(), db.valid[i], i))
        })
        .collect();
    if slab.is_empty() {
        return Err(PlanError::RegionFit(
            "no voxel centre lies between the limit planes".into(),
        ));
    }
    // invalid before valid at equal radius so that ties block the run
    slab.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // best: (width, r_min, r_max)
    let mut best: Option<(f64, f64, f64)> = None;
    let mut blocking: Option<usize> = None;
    let mut k = 0;
    while k < slab.len() {
        if !slab[k].1 {
            blocking.get_or_insert(slab[k].2);
            k += 1;
            continue;
        }
        let start = k;
        while k < slab.len() && slab[k].1 {
            k += 1;
        }
        let r_min = if start == 0 { 0.0 } else { slab[start - 1].0 + margin };
        let upper = if k < slab.len() {
            slab[k].0
        } else {
            // past the last slab voxel the database knows nothing
            slab[k - 1].0 + db.voxel_size
        };
        let r_max = upper - margin;
        if r_max > r_min {
            let width = r_max - r_min;
            if best.is_none_or(|(w, _, _)| width > w) {
                best = Some((width, r_min, r_max));
            }
        }
    }
    match best {
        Some((_, r_min, r_max)) => Ok(GeometricRegion {
            x_min,
            z_min,
            z_max,
            x_s,
            z_s,
            r_min,
            r_max,
        }),
        None => {
            let detail = blocking
                .map(|i| {
                    let c = db.centre(i);
                    format!("invalid voxel at ({:.3}, {:.3}, {:.3})", c[0], c[1], c[2])
                })
                .unwrap_or_else(|| "no valid voxel".into());
            Err(PlanError::RegionFit(format!(
                "no valid spherical shell fits between the limit planes; blocked by {detail}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{AnalyticArm, ShellArm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_region() -> GeometricRegion {
        GeometricRegion {
            x_min: 0.40,
            z_min: 0.40,
            z_max: 1.20,
            x_s: 0.22,
            z_s: 0.64,
            r_min: 0.51,
            r_max: 0.84,
        }
    }

    #[test]
    fn sphere_centre_arithmetic() {
        let mut p = RobotParams::default_arm();
        p.l = 0.25;
        p.z_j2 = 0.395;
        let (x_s, z_s) = sphere_centre(&p);
        assert!((x_s - 0.25 * 130f64.to_radians().sin()).abs() < 1e-12);
        assert!((z_s - (0.395 + 0.25 * 130f64.to_radians().cos())).abs() < 1e-12);
        assert!((x_s - 0.1915).abs() < 1e-4);
        assert!((z_s - 0.2343).abs() < 1e-4);
    }

    #[test]
    fn region_contains_examples() {
        let r = sample_region();
        assert!(region_contains(&r, [r.x_s + (r.r_min + r.r_max) / 2.0, 0.0, r.z_s]));
        assert!(!region_contains(&r, [r.x_min - 0.01, 0.5, r.z_s]));
        assert!(!region_contains(&r, [0.6, 0.0, 1.3]));
        assert!(!region_contains(&r, [0.5, 0.0, r.z_s]));
    }

    #[test]
    fn region_contains_matches_duplicate_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = sample_region();
        for _ in 0..100_000 {
            let p = [
                rng.random_range(-0.5..1.5),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..1.6),
            ];
            let rho = ((p[0] - r.x_s).powi(2) + p[1].powi(2) + (p[2] - r.z_s).powi(2)).sqrt();
            let expected = r.z_min <= p[2] && p[2] <= r.z_max && p[0] >= r.x_min && r.r_min <= rho && rho <= r.r_max;
            assert_eq!(region_contains(&r, p), expected, "{p:?}");
        }
    }

    /// Membership in the region after rotating it by `phi` about z'.
    fn contains_rotated(r: &GeometricRegion, phi: f64, p: [f64; 3]) -> bool {
        let (s, c) = phi.sin_cos();
        let along = p[0] * c + p[1] * s;
        let centre = [r.x_s * c, r.x_s * s, r.z_s];
        let r2 = (p[0] - centre[0]).powi(2) + (p[1] - centre[1]).powi(2) + (p[2] - centre[2]).powi(2);
        p[2] >= r.z_min - BOUNDARY_TOL
            && p[2] <= r.z_max + BOUNDARY_TOL
            && along >= r.x_min - BOUNDARY_TOL
            && r2 >= r.r_min * r.r_min - BOUNDARY_TOL
            && r2 <= r.r_max * r.r_max + BOUNDARY_TOL
    }

    #[test]
    fn rotating_the_point_matches_rotating_the_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = sample_region();
        for _ in 0..50_000 {
            let p = [
                rng.random_range(-1.2..1.2),
                rng.random_range(-1.2..1.2),
                rng.random_range(0.2..1.4),
            ];
            let phi: f64 = rng.random_range(-3.2..3.2);
            let (s, c) = phi.sin_cos();
            // R_z(-phi)·p
            let back = [c * p[0] + s * p[1], -s * p[0] + c * p[1], p[2]];
            assert_eq!(region_contains(&r, back), contains_rotated(&r, phi, p));
        }
    }

    fn shell_params() -> RobotParams {
        let mut p = RobotParams::default_arm();
        p.l = 0.25;
        p.z_j2 = 0.8;
        p
    }

    fn shell_bounds() -> Aabb {
        Aabb {
            min: [0.0, -1.1, 0.0],
            max: [1.4, 1.1, 1.6],
        }
    }

    #[test]
    fn shell_database_matches_closed_form() {
        let shell = ShellArm::new(shell_params(), 0.5, 0.85).unwrap();
        let db = generate_database(&shell, 0.1, shell_bounds()).unwrap();
        assert!(db.valid_count() > 0);
        for i in 0..db.len() {
            assert_eq!(db.valid[i], shell.contains(db.centre(i), true));
        }
    }

    #[test]
    fn voxel_counts_scale_with_size() {
        let arm = AnalyticArm::new(RobotParams::default_arm()).unwrap();
        let bounds = Aabb::default_for(arm.params());
        let coarse = generate_database(&arm, 0.10, bounds).unwrap();
        let fine = generate_database(&arm, 0.05, bounds).unwrap();
        // same order of magnitude as the published counts (6332 and 40204)
        assert!((1_000..20_000).contains(&coarse.len()), "{}", coarse.len());
        assert!((10_000..100_000).contains(&fine.len()), "{}", fine.len());
        assert!(coarse.valid_count() > 0);
    }

    #[test]
    fn zero_voxel_bounds_rejected() {
        let arm = AnalyticArm::new(RobotParams::default_arm()).unwrap();
        let flat = Aabb {
            min: [0.0, 0.0, 0.0],
            max: [1.0, 1.0, 0.0],
        };
        assert!(generate_database(&arm, 0.1, flat).is_err());
        assert!(generate_database(&arm, 0.0, Aabb::default_for(arm.params())).is_err());
    }

    #[test]
    fn shell_fit_is_sound_tight_and_close() {
        let params = shell_params();
        let shell = ShellArm::new(params.clone(), 0.5, 0.85).unwrap();
        for vs in [0.1, 0.05] {
            let db = generate_database(&shell, vs, shell_bounds()).unwrap();
            let (x_s, z_s) = sphere_centre(&params);
            let region = fit_region(&db, 0.4, z_s - 0.3, z_s + 0.3, &params).unwrap();
            let diag = vs * 3f64.sqrt();
            assert!((region.r_min - 0.5).abs() <= diag, "{region:?}");
            assert!((region.r_max - 0.85).abs() <= diag, "{region:?}");
            assert_eq!((region.x_s, region.z_s), (x_s, z_s));

            // soundness
            for i in 0..db.len() {
                if region_contains(&region, db.centre(i)) {
                    assert!(db.valid[i]);
                }
            }
            // weak maximality
            let grow_out = GeometricRegion {
                r_max: region.r_max + vs,
                ..region
            };
            assert!((0..db.len()).any(|i| region_contains(&grow_out, db.centre(i)) && !db.valid[i]));
            let grow_in = GeometricRegion {
                r_min: (region.r_min - vs).max(0.0),
                ..region
            };
            assert!((0..db.len()).any(|i| region_contains(&grow_in, db.centre(i)) && !db.valid[i]));
        }
    }

    #[test]
    fn analytic_arm_fit_is_sound() {
        let params = RobotParams::default_arm();
        let arm = AnalyticArm::new(params.clone()).unwrap();
        let db = generate_database(&arm, 0.05, Aabb::default_for(&params)).unwrap();
        let region = fit_region(&db, 0.3, 0.2, 0.6, &params).unwrap();
        assert!(region.r_min < region.r_max);
        for i in 0..db.len() {
            if region_contains(&region, db.centre(i)) {
                assert!(db.valid[i]);
            }
        }
    }

    #[test]
    fn fit_fails_without_valid_voxels() {
        let params = shell_params();
        let shell = ShellArm::new(params.clone(), 0.5, 0.85).unwrap();
        let db = generate_database(&shell, 0.1, shell_bounds()).unwrap();
        // slab far above the shell: every voxel invalid
        let err = fit_region(&db, 0.0, 1.5, 1.6, &params).unwrap_err();
        assert!(matches!(err, PlanError::RegionFit(_)), "{err}");
        assert!(err.to_string().contains("invalid voxel"));
    }

    #[test]
    fn text_sidecar_round_trips() {
        let shell = ShellArm::new(shell_params(), 0.5, 0.85).unwrap();
        let db = generate_database(&shell, 0.1, shell_bounds()).unwrap();
        let back = ReachabilityDatabase::from_text(&db.to_text()).unwrap();
        assert_eq!(back, db);
        assert!(ReachabilityDatabase::from_text("nonsense").is_err());
    }

    #[test]
    fn cache_key_depends_on_inputs() {
        let p = RobotParams::default_arm();
        let b = Aabb::default_for(&p);
        let k1 = cache_key(&p, 0.1, &b);
        assert_eq!(k1, cache_key(&p, 0.1, &b));
        assert_ne!(k1, cache_key(&p, 0.05, &b));
        let mut q = p.clone();
        q.l += 0.01;
        assert_ne!(k1, cache_key(&q, 0.1, &b));
    }
}
