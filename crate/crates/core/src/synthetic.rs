//! Seeded synthetic drilling tasks on a 1 m long plate.
//!
//! The plate runs along y from -0.5 m to 0.5 m. Front holes sit on the face
//! x = 0 and are drilled towards +x; back holes sit on x = 0.1 and are drilled
//! towards -x.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{RegionSource, RobotSpec, TaskFile};
use crate::model::{GeometricRegion, RobotParams, Target};

/// Tall arm whose tool-offset sphere centre sits at (0.22, 0.64) for the
/// default polar sampling, with l1 = l2 = 0.5 m.
pub fn drilling_arm() -> RobotParams {
    let mut p = RobotParams::default_arm();
    let mean = p.mean_sampling_polar();
    p.l = 0.22 / mean.sin();
    p.z_j2 = 0.64 - p.l * mean.cos();
    p.l1 = 0.5;
    p.l2 = 0.5;
    p
}

/// Region constants that fit inside [`drilling_arm`]'s reachable voxels.
pub fn drilling_region() -> GeometricRegion {
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

fn face(rng: &mut ChaCha8Rng, x: f64, cols: usize, rows: &[f64], phi_range_deg: [f64; 2], out: &mut Vec<Target>) {
    for c in 0..cols {
        let y = -0.48 + 0.96 * (c as f64 + 0.5) / cols as f64;
        for &z in rows {
            let theta = rng.random_range(110.0f64..=150.0).to_radians();
            let phi = rng.random_range(phi_range_deg[0]..=phi_range_deg[1]).to_radians();
            out.push(Target::new(x, y, z, theta, phi).expect("synthetic target is valid"));
        }
    }
}

fn heights(from: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| from + step * k as f64).collect()
}

/// 288 front holes with azimuth in [-37°, 37°] and 48 back holes with
/// azimuth in [168°, 192°]; polar angles in [110°, 150°].
pub fn two_sided_targets(seed: u64) -> Vec<Target> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(336);
    face(&mut rng, 0.0, 24, &heights(0.45, 0.05, 12), [-37.0, 37.0], &mut out);
    face(&mut rng, 0.1, 12, &heights(0.60, 0.10, 4), [168.0, 192.0], &mut out);
    out
}

/// 264 front holes, all drilled straight along +x (azimuth 0).
pub fn one_sided_targets(seed: u64) -> Vec<Target> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(264);
    face(&mut rng, 0.0, 22, &heights(0.45, 0.05, 12), [0.0, 0.0], &mut out);
    out
}

/// Six holes per face.
pub fn small_targets(seed: u64) -> Vec<Target> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(12);
    face(&mut rng, 0.0, 3, &[0.6, 0.8], [-37.0, 37.0], &mut out);
    face(&mut rng, 0.1, 3, &[0.6, 0.8], [168.0, 192.0], &mut out);
    out
}

/// Task file for the given targets on [`drilling_arm`] with the explicit
/// [`drilling_region`] and a 0.10 m floor grid.
pub fn drilling_task(targets: &[Target]) -> TaskFile {
    let mut f = TaskFile::with_targets(targets, 0.10, RegionSource::Explicit(drilling_region()));
    f.robot = Some(RobotSpec::from(&drilling_arm()));
    f
}
