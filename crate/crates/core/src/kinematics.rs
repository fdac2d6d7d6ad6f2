//! Arm models used as reachability oracles.
//!
//! The default [`AnalyticArm`] has a vertical q1 axis through the base origin,
//! a planar 2R shoulder/elbow pair whose shoulder sits `z_j2` above the floor,
//! a two-axis wrist (roll about the forearm, then bend) and a rigid tool of
//! length `l`. q6 spins the tool about its own axis and is always 0.
//!
//! Local frame conventions: x' forward, y' left, z' up, origin on the floor
//! under the q1 axis.

use nalgebra::{Rotation3, Vector3};

use crate::model::{wrap_angle, BasePose, JointVector, RobotParams, Target, BOUNDARY_TOL};

/// Branches closer than this (max-abs over joints) are treated as one.
const DUPLICATE_TOL: f64 = 1e-9;

/// Anything that can answer IK queries in the robot frame.
pub trait ArmModel: Send + Sync {
    fn params(&self) -> &RobotParams;

    /// All admissible joint solutions placing the tool tip at `position` with
    /// its axis along `direction`, both expressed in the robot frame. Must be
    /// deterministic and sorted lexicographically by (q1, q2, q3).
    fn solve_local(&self, position: [f64; 3], direction: [f64; 3], restrict_j1: bool) -> Vec<JointVector>;

    fn reachable_local(&self, position: [f64; 3], direction: [f64; 3], restrict_j1: bool) -> bool {
        !self.solve_local(position, direction, restrict_j1).is_empty()
    }

    /// Bound on |q1| for the given mode.
    fn j1_bound(&self, restrict_j1: bool) -> f64 {
        let p = self.params();
        if restrict_j1 {
            p.j1_res
        } else {
            p.j1_lim
        }
    }
}

/// Expresses a world-frame target in the frame of a base at `base`.
pub fn to_base_frame(base: &BasePose, target: &Target) -> ([f64; 3], [f64; 3]) {
    let (s, c) = base.heading.sin_cos();
    let dx = target.x - base.x;
    let dy = target.y - base.y;
    let pos = [c * dx + s * dy, -s * dx + c * dy, target.z];
    let rel_phi = wrap_angle(target.phi - base.heading);
    let (st, ct) = target.theta.sin_cos();
    let (sp, cp) = rel_phi.sin_cos();
    (pos, [st * cp, st * sp, ct])
}

pub fn solve_ik<M: ArmModel + ?Sized>(
    model: &M,
    base: &BasePose,
    target: &Target,
    restrict_j1: bool,
) -> Vec<JointVector> {
    let (p, d) = to_base_frame(base, target);
    model.solve_local(p, d, restrict_j1)
}

pub fn is_reachable<M: ArmModel + ?Sized>(model: &M, base: &BasePose, target: &Target, restrict_j1: bool) -> bool {
    let (p, d) = to_base_frame(base, target);
    model.reachable_local(p, d, restrict_j1)
}

/// Parametric 6-axis arm with closed-form IK.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticArm {
    params: RobotParams,
}

/// Tool tip and tool-axis direction in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToolPose {
    pub tip: Vector3<f64>,
    pub axis: Vector3<f64>,
}

impl AnalyticArm {
    pub fn new(params: RobotParams) -> crate::Result<Self> {
        params.validate()?;
        Ok(AnalyticArm { params })
    }

    fn forearm_frame(q1: f64, q23: f64) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), q1) * Rotation3::from_axis_angle(&Vector3::y_axis(), q23)
    }

    pub fn wrist_centre(&self, q: &JointVector) -> Vector3<f64> {
        let [q1, q2, q3, ..] = q.0;
        let p = &self.params;
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), q1);
        let upper = Vector3::new(q2.sin(), 0.0, q2.cos());
        let fore = Vector3::new((q2 + q3).sin(), 0.0, (q2 + q3).cos());
        Vector3::new(0.0, 0.0, p.z_j2) + yaw * (upper * p.l1 + fore * p.l2)
    }

    pub fn forward(&self, q: &JointVector) -> ToolPose {
        let [q1, q2, q3, q4, q5, _] = q.0;
        let w = self.wrist_centre(q);
        let local = Vector3::new(q4.cos() * q5.sin(), q4.sin() * q5.sin(), q5.cos());
        let axis = Self::forearm_frame(q1, q2 + q3) * local;
        ToolPose {
            tip: w + axis * self.params.l,
            axis,
        }
    }

    /// Tool pose in the world frame for a base at `base`.
    pub fn forward_at(&self, base: &BasePose, q: &JointVector) -> ToolPose {
        let local = self.forward(q);
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), base.heading);
        ToolPose {
            tip: Vector3::new(base.x, base.y, 0.0) + yaw * local.tip,
            axis: yaw * local.axis,
        }
    }

    fn within(&self, joint: usize, value: f64) -> bool {
        value.abs() <= self.params.joint_limits[joint] + BOUNDARY_TOL
    }

    /// Wrist angles for a given arm posture; the non-negative bend is preferred
    /// and the flipped pair is used only when the first violates the limits.
    fn wrist(&self, q1: f64, q23: f64, d: &Vector3<f64>) -> Option<(f64, f64)> {
        let local = Self::forearm_frame(q1, q23).inverse() * d;
        let q5 = local.z.clamp(-1.0, 1.0).acos();
        let q4 = if q5.sin().abs() > 1e-12 {
            local.y.atan2(local.x)
        } else {
            0.0
        };
        [(q4, q5), (wrap_angle(q4 + std::f64::consts::PI), -q5)]
            .into_iter()
            .find(|&(a, b)| self.within(3, a) && self.within(4, b))
    }
}

impl ArmModel for AnalyticArm {
    fn params(&self) -> &RobotParams {
        &self.params
    }

    fn solve_local(&self, position: [f64; 3], direction: [f64; 3], restrict_j1: bool) -> Vec<JointVector> {
        let p = &self.params;
        let d = Vector3::from(direction).normalize();
        let w = Vector3::from(position) - d * p.l;
        if w.z < 0.0 {
            return Vec::new();
        }
        let j1_bound = self.j1_bound(restrict_j1);
        let radial = w.x.hypot(w.y);
        let h = w.z - p.z_j2;

        // (q1, signed horizontal reach in the arm plane)
        let mut shoulder = Vec::with_capacity(2);
        if radial < 1e-12 {
            shoulder.push((0.0, 0.0));
        } else {
            let front = w.y.atan2(w.x);
            shoulder.push((front, radial));
            shoulder.push((wrap_angle(front + std::f64::consts::PI), -radial));
        }

        let mut cos_q3 = (radial * radial + h * h - p.l1 * p.l1 - p.l2 * p.l2) / (2.0 * p.l1 * p.l2);
        if cos_q3.abs() > 1.0 + BOUNDARY_TOL {
            return Vec::new();
        }
        // snap the stretched/folded singularity so both elbow branches coincide
        if cos_q3.abs() >= 1.0 - BOUNDARY_TOL {
            cos_q3 = cos_q3.signum();
        }
        let elbow = cos_q3.acos();

        let mut out: Vec<JointVector> = Vec::new();
        for &(q1, reach) in &shoulder {
            if q1.abs() > j1_bound + BOUNDARY_TOL {
                continue;
            }
            for q3 in [elbow, -elbow] {
                let q2 = wrap_angle(reach.atan2(h) - (p.l2 * q3.sin()).atan2(p.l1 + p.l2 * q3.cos()));
                if !(self.within(1, q2) && self.within(2, q3)) {
                    continue;
                }
                if let Some((q4, q5)) = self.wrist(q1, q2 + q3, &d) {
                    out.push(JointVector([q1, q2, q3, q4, q5, 0.0]));
                }
            }
        }
        sort_and_dedup(&mut out);
        out
    }
}

pub(crate) fn sort_and_dedup(sols: &mut Vec<JointVector>) {
    sols.sort_by(|a, b| {
        a.0[..3]
            .iter()
            .zip(&b.0[..3])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sols.dedup_by(|b, a| a.0.iter().zip(b.0.iter()).all(|(x, y)| (x - y).abs() < DUPLICATE_TOL));
}

/// Test model whose reachable set is exactly a spherical shell around the
/// tool-sphere centre derived from the sampling polar angles, cut to the q1
/// range. Orientation is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellArm {
    params: RobotParams,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl ShellArm {
    pub fn new(params: RobotParams, r_inner: f64, r_outer: f64) -> crate::Result<Self> {
        params.validate()?;
        if !(0.0 <= r_inner && r_inner < r_outer) {
            return Err(crate::PlanError::InvalidInput(
                "shell radii must satisfy 0 <= inner < outer".into(),
            ));
        }
        Ok(ShellArm {
            params,
            r_inner,
            r_outer,
        })
    }

    pub fn centre(&self) -> [f64; 3] {
        let mean = self.params.mean_sampling_polar();
        [
            self.params.l * mean.sin(),
            0.0,
            self.params.z_j2 + self.params.l * mean.cos(),
        ]
    }

    /// Closed-form membership used as the reference in database tests.
    pub fn contains(&self, position: [f64; 3], restrict_j1: bool) -> bool {
        let c = self.centre();
        let r = ((position[0] - c[0]).powi(2) + (position[1] - c[1]).powi(2) + (position[2] - c[2]).powi(2)).sqrt();
        let q1 = position[1].atan2(position[0]);
        r >= self.r_inner && r <= self.r_outer && q1.abs() <= self.j1_bound(restrict_j1)
    }
}

impl ArmModel for ShellArm {
    fn params(&self) -> &RobotParams {
        &self.params
    }

    fn solve_local(&self, position: [f64; 3], _direction: [f64; 3], restrict_j1: bool) -> Vec<JointVector> {
        if self.contains(position, restrict_j1) {
            vec![JointVector([position[1].atan2(position[0]), 0.0, 0.0, 0.0, 0.0, 0.0])]
        } else {
            Vec::new()
        }
    }
}
