//! Task and plan files.
//!
//! Both are JSON. Task files use degrees for every angle; plan files store
//! the planner's values verbatim (radians) so they read back unchanged.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::model::{BasePose, GeometricRegion, JointVector, Plan, RobotParams, SolverKind, Target};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub j1_lim_deg: f64,
    pub j1_res_deg: f64,
    pub z_j2: f64,
    pub l1: f64,
    pub l2: f64,
    pub l: f64,
    pub joint_limits_deg: [f64; 6],
    pub polar_range_deg: [f64; 2],
    pub n_sam: usize,
}

impl From<&RobotParams> for RobotSpec {
    fn from(p: &RobotParams) -> Self {
        RobotSpec {
            j1_lim_deg: p.j1_lim.to_degrees(),
            j1_res_deg: p.j1_res.to_degrees(),
            z_j2: p.z_j2,
            l1: p.l1,
            l2: p.l2,
            l: p.l,
            joint_limits_deg: p.joint_limits.map(f64::to_degrees),
            polar_range_deg: p.polar_range.map(f64::to_degrees),
            n_sam: p.n_sam,
        }
    }
}

impl RobotSpec {
    pub fn to_params(&self) -> Result<RobotParams> {
        let p = RobotParams {
            j1_lim: self.j1_lim_deg.to_radians(),
            j1_res: self.j1_res_deg.to_radians(),
            z_j2: self.z_j2,
            l1: self.l1,
            l2: self.l2,
            l: self.l,
            joint_limits: self.joint_limits_deg.map(f64::to_radians),
            polar_range: self.polar_range_deg.map(f64::to_radians),
            n_sam: self.n_sam,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorSpec {
    pub cell_size: f64,
    /// `[x_min, y_min, x_max, y_max]`; derived from the targets when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<[f64; 4]>,
}

/// Region fitted from a generated (or cached) reachability database.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachabilitySpec {
    pub voxel_size: f64,
    pub x_min: f64,
    pub z_min: f64,
    pub z_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomeSpec {
    /// Defaults to the floor-grid origin, heading 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseSpec>,
    #[serde(default)]
    pub joints_deg: [f64; 6],
}

/// On-disk task description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub targets: Vec<TargetSpec>,
    /// Defaults to [`RobotParams::default_arm`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot: Option<RobotSpec>,
    pub floor: FloorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<GeometricRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachability: Option<ReachabilitySpec>,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "default_lrg_iters")]
    pub lrg_iters: usize,
    #[serde(default = "default_h_scale")]
    pub h_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home: Option<HomeSpec>,
}

fn default_solver() -> SolverKind {
    SolverKind::Lrg
}

fn default_lrg_iters() -> usize {
    20
}

fn default_h_scale() -> f64 {
    1.0
}

/// Where the geometric region comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionSource {
    Explicit(GeometricRegion),
    Fitted(ReachabilitySpec),
}

/// Validated task in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub targets: Vec<Target>,
    pub robot: RobotParams,
    pub cell_size: f64,
    pub floor_extent: Option<[f64; 4]>,
    pub region: RegionSource,
    pub solver: SolverKind,
    pub lrg_iters: usize,
    pub h_scale: f64,
    pub seed: u64,
    pub home_base: Option<BasePose>,
    pub home_joints: JointVector,
}

impl TaskFile {
    pub fn parse(text: &str, origin: &str) -> Result<TaskFile> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            PlanError::Parse {
                path: if at == "." {
                    origin.to_string()
                } else {
                    format!("{origin} at `{at}`")
                },
                source: e.into_inner(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<TaskFile> {
        let text = fs::read_to_string(path).map_err(|source| PlanError::Io {
            path: path.display().to_string(),
            source,
        })?;
        TaskFile::parse(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("task file serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }

    pub fn to_task(&self) -> Result<Task> {
        if self.targets.is_empty() {
            return Err(PlanError::InvalidInput("task has no targets".into()));
        }
        let targets = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Target::new(t.x, t.y, t.z, t.theta_deg.to_radians(), t.phi_deg.to_radians())
                    .map_err(|e| PlanError::InvalidInput(format!("targets[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let robot = match &self.robot {
            Some(spec) => spec.to_params()?,
            None => RobotParams::default_arm(),
        };
        if !(self.floor.cell_size > 0.0 && self.floor.cell_size.is_finite()) {
            return Err(PlanError::InvalidInput(format!(
                "floor.cell_size must be positive, got {}",
                self.floor.cell_size
            )));
        }
        if let Some([x0, y0, x1, y1]) = self.floor.extent {
            if !(x0 <= x1 && y0 <= y1) {
                return Err(PlanError::InvalidInput(
                    "floor.extent must be [x_min, y_min, x_max, y_max]".into(),
                ));
            }
        }
        let region = match (self.region, self.reachability) {
            (Some(r), None) => {
                r.validate()?;
                RegionSource::Explicit(r)
            }
            (None, Some(spec)) => {
                if !(spec.voxel_size > 0.0 && spec.voxel_size.is_finite()) {
                    return Err(PlanError::InvalidInput(
                        "reachability.voxel_size must be positive".into(),
                    ));
                }
                RegionSource::Fitted(spec)
            }
            (Some(_), Some(_)) => {
                return Err(PlanError::InvalidInput(
                    "give either `region` or `reachability`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(PlanError::InvalidInput(
                    "task needs a `region` or a `reachability` section".into(),
                ))
            }
        };
        if !(self.h_scale >= 1.0 && self.h_scale.is_finite()) {
            return Err(PlanError::InvalidInput(format!(
                "h_scale must be at least 1, got {}",
                self.h_scale
            )));
        }
        let home = self.home.clone().unwrap_or(HomeSpec {
            base: None,
            joints_deg: [0.0; 6],
        });
        if home.joints_deg.iter().any(|v| !v.is_finite()) {
            return Err(PlanError::InvalidInput("home.joints_deg must be finite".into()));
        }
        let home_base = home
            .base
            .map(|b| -> Result<BasePose> {
                if !(b.x.is_finite() && b.y.is_finite() && b.heading_deg.is_finite()) {
                    return Err(PlanError::InvalidInput("home.base must be finite".into()));
                }
                Ok(BasePose {
                    x: b.x,
                    y: b.y,
                    heading: crate::model::normalize_azimuth(b.heading_deg.to_radians())?,
                })
            })
            .transpose()?;
        Ok(Task {
            targets,
            robot,
            cell_size: self.floor.cell_size,
            floor_extent: self.floor.extent,
            region,
            solver: self.solver,
            lrg_iters: self.lrg_iters,
            h_scale: self.h_scale,
            seed: self.seed,
            home_base,
            home_joints: JointVector(home.joints_deg.map(f64::to_radians)),
        })
    }

    /// Task file for the given targets with every optional field at its default.
    pub fn with_targets(targets: &[Target], cell_size: f64, region: RegionSource) -> TaskFile {
        let (region, reachability) = match region {
            RegionSource::Explicit(r) => (Some(r), None),
            RegionSource::Fitted(s) => (None, Some(s)),
        };
        TaskFile {
            targets: targets
                .iter()
                .map(|t| TargetSpec {
                    x: t.x,
                    y: t.y,
                    z: t.z,
                    theta_deg: t.theta.to_degrees(),
                    phi_deg: t.phi.to_degrees(),
                })
                .collect(),
            robot: None,
            floor: FloorSpec {
                cell_size,
                extent: None,
            },
            region,
            reachability,
            solver: default_solver(),
            lrg_iters: default_lrg_iters(),
            h_scale: default_h_scale(),
            seed: 0,
            home: None,
        }
    }
}

pub fn plan_to_json(plan: &Plan) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plan serializes");
    s.push('\n');
    s
}

pub fn plan_from_json(text: &str, origin: &str) -> Result<Plan> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| PlanError::Parse {
        path: format!("{origin} at `{}`", e.path()),
        source: e.into_inner(),
    })
}

pub fn save_plan(plan: &Plan, path: &Path) -> Result<()> {
    write_text(path, &plan_to_json(plan))
}

pub fn load_plan(path: &Path) -> Result<Plan> {
    let text = fs::read_to_string(path).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })?;
    plan_from_json(&text, &path.display().to_string())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "targets": [{"x": 1.0, "y": 0.0, "z": 0.7, "theta_deg": 130, "phi_deg": 0}],
        "floor": {"cell_size": 0.1},
        "region": {"x_min": 0.4, "z_min": 0.4, "z_max": 1.2, "x_s": 0.22, "z_s": 0.64, "r_min": 0.51, "r_max": 0.84}
    }"#;

    #[test]
    fn minimal_task_takes_defaults() {
        let task = TaskFile::parse(MINIMAL, "inline").unwrap().to_task().unwrap();
        assert_eq!(task.targets.len(), 1);
        assert_eq!(task.solver, SolverKind::Lrg);
        assert_eq!(task.h_scale, 1.0);
        assert_eq!(task.robot, RobotParams::default_arm());
        assert_eq!(task.home_joints, JointVector::ZERO);
        assert!(task.home_base.is_none());
        assert!((task.targets[0].theta - 130f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_reports_its_location() {
        let text = MINIMAL.replace("\"phi_deg\": 0", "\"phi_deg\": 0, \"psi\": 1");
        let err = TaskFile::parse(&text, "task.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("targets[0]"), "{msg}");
        assert!(msg.contains("psi"), "{msg}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn zero_targets_rejected() {
        let text = MINIMAL.replace(
            r#"[{"x": 1.0, "y": 0.0, "z": 0.7, "theta_deg": 130, "phi_deg": 0}]"#,
            "[]",
        );
        let err = TaskFile::parse(&text, "t").unwrap().to_task().unwrap_err();
        assert!(matches!(err, PlanError::InvalidInput(_)));
    }

    #[test]
    fn region_source_must_be_unique() {
        let mut f = TaskFile::parse(MINIMAL, "t").unwrap();
        f.reachability = Some(ReachabilitySpec {
            voxel_size: 0.05,
            x_min: 0.4,
            z_min: 0.4,
            z_max: 1.2,
        });
        assert!(f.to_task().is_err());
        f.region = None;
        assert!(matches!(f.to_task().unwrap().region, RegionSource::Fitted(_)));
        f.reachability = None;
        assert!(f.to_task().is_err());
    }

    #[test]
    fn bad_polar_angle_is_rejected() {
        let text = MINIMAL.replace("\"theta_deg\": 130", "\"theta_deg\": 200");
        let err = TaskFile::parse(&text, "t").unwrap().to_task().unwrap_err();
        assert!(err.to_string().contains("targets[0]"));
    }

    #[test]
    fn robot_spec_round_trips_through_degrees() {
        let p = RobotParams::default_arm();
        let back = RobotSpec::from(&p).to_params().unwrap();
        for (a, b) in p.joint_limits.iter().zip(back.joint_limits.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p.j1_lim - back.j1_lim).abs() < 1e-15);
    }

    #[test]
    fn task_file_round_trips() {
        let f = TaskFile::parse(MINIMAL, "t").unwrap();
        let again = TaskFile::parse(&f.to_json(), "t").unwrap();
        assert_eq!(f, again);
    }
}
