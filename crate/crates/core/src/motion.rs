//! Parametric motion model: rotary-stage angles, camera alignment for
//! fasteners and per-task durations.
//!
//! Travel is a straight line between centers of mass at constant arm
//! speed. The stage turns about +Z; camera vectors point from the part
//! toward the camera.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{circular_distance, distance, Arm, AssemblyModel, ModelError, PartId, TaskKind};
use crate::task::TaskPlan;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("no stage angle turns the axis of {part} toward a camera")]
    NoFacingAngle { part: PartId },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid motion configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Camera {
    Top,
    Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionConfig {
    pub arm_speed_mm_s: f64,
    pub grasp_ms: u64,
    pub suction_ms: u64,
    pub screw_removal_ms: u64,
    pub toolchange_ms: u64,
    pub pose_adjust_ms: u64,
    pub camera_tolerance_deg: f64,
    pub top_camera: [f64; 3],
    pub side_camera: [f64; 3],
    pub stage_grid_deg: Vec<f64>,
    /// Where each arm starts, millimeters.
    pub home_mm: [[f64; 3]; 2],
    pub first_mount_counts: bool,
    /// When false the stage stays at 0° and badly oriented tasks pay
    /// `fixed_stage_penalty_ms` instead.
    pub stage_enabled: bool,
    pub fixed_stage_penalty_ms: u64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            arm_speed_mm_s: 250.0,
            grasp_ms: 4000,
            suction_ms: 3000,
            screw_removal_ms: 8000,
            toolchange_ms: 10_000,
            pose_adjust_ms: 2000,
            camera_tolerance_deg: 10.0,
            top_camera: [0.0, 0.0, 1.0],
            side_camera: [-1.0, 0.0, 0.0],
            stage_grid_deg: (0..8).map(|k| 45.0 * k as f64).collect(),
            home_mm: [[0.0, 400.0, 300.0], [0.0, -400.0, 300.0]],
            first_mount_counts: true,
            stage_enabled: true,
            fixed_stage_penalty_ms: 12_000,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), MotionError> {
        if !(self.arm_speed_mm_s.is_finite() && self.arm_speed_mm_s > 0.0) {
            return Err(MotionError::Config(format!("arm speed {} must be positive", self.arm_speed_mm_s)));
        }
        if [self.grasp_ms, self.suction_ms, self.screw_removal_ms, self.toolchange_ms, self.pose_adjust_ms].contains(&0) {
            return Err(MotionError::Config("operation times must be positive".into()));
        }
        if self.stage_grid_deg.is_empty() || self.stage_grid_deg.iter().any(|a| !a.is_finite()) {
            return Err(MotionError::Config("stage grid must be a nonempty list of angles".into()));
        }
        for cam in [self.top_camera, self.side_camera] {
            if norm(&cam) < 1e-9 {
                return Err(MotionError::Config("camera direction must be nonzero".into()));
            }
        }
        Ok(())
    }

    pub fn op_time(&self, kind: TaskKind) -> u64 {
        match kind {
            TaskKind::Grasp => self.grasp_ms,
            TaskKind::Suction => self.suction_ms,
            TaskKind::ScrewRemoval => self.screw_removal_ms,
        }
    }

    fn grid(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.stage_grid_deg.iter().map(|&a| crate::model::normalize_angle(a)).collect();
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `v` turned by `angle` degrees about +Z.
pub fn rotate_z(v: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.to_radians().sin_cos();
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]]
}

/// Camera the rotated axis points at within tolerance, top camera first.
pub fn facing_camera(axis: [f64; 3], angle: f64, config: &MotionConfig) -> Option<Camera> {
    let r = rotate_z(axis, angle);
    let cos_tol = config.camera_tolerance_deg.to_radians().cos();
    [(Camera::Top, config.top_camera), (Camera::Side, config.side_camera)]
        .into_iter()
        .find(|(_, cam)| {
            let dot = r[0] * cam[0] + r[1] * cam[1] + r[2] * cam[2];
            dot / (norm(&r) * norm(cam)) >= cos_tol - 1e-12
        })
        .map(|(c, _)| c)
}

fn nearest(candidates: impl Iterator<Item = f64>, current: f64) -> Option<f64> {
    candidates.fold(None, |best: Option<f64>, a| match best {
        None => Some(a),
        Some(b) => {
            let (da, db) = (circular_distance(a, current), circular_distance(b, current));
            if da < db - 1e-9 || ((da - db).abs() <= 1e-9 && a < b) {
                Some(a)
            } else {
                Some(b)
            }
        }
    })
}

/// Stage angle for removing `part` with `arm`, starting from `current`.
///
/// Fasteners need a grid angle that turns their axis toward a camera;
/// other parts use their handling orientation for the arm. Both prefer
/// the smallest turn, ties toward the smaller angle. `accept` can veto
/// candidate angles.
pub fn choose_stage_angle_with(
    part: PartId,
    arm: Arm,
    model: &AssemblyModel,
    current: f64,
    config: &MotionConfig,
    accept: &dyn Fn(PartId, Arm, f64) -> bool,
) -> Result<f64, MotionError> {
    let p = model.part(part);
    if let Some(axis) = p.geometry.fastener_axis {
        let grid = config.grid();
        return nearest(
            grid.into_iter()
                .filter(|&a| facing_camera(axis, a, config).is_some() && accept(part, arm, a)),
            current,
        )
        .ok_or(MotionError::NoFacingAngle { part });
    }
    let options = &p.geometry.orientations[arm.index()];
    if options.is_empty() {
        return Err(ModelError::NoOrientation { part, arm }.into());
    }
    nearest(options.iter().copied().filter(|&a| accept(part, arm, a)), current)
        .ok_or(ModelError::NoOrientation { part, arm }.into())
}

pub fn choose_stage_angle(
    part: PartId,
    arm: Arm,
    model: &AssemblyModel,
    current: f64,
    config: &MotionConfig,
) -> Result<f64, MotionError> {
    choose_stage_angle_with(part, arm, model, current, config, &|_, _, _| true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionRecord {
    /// Position in the task plan.
    pub task: usize,
    pub part: PartId,
    pub arm: Arm,
    /// Travel plus operation, plus any fixed-stage penalty.
    pub duration_ms: u64,
    pub travel_ms: u64,
    pub penalty_ms: u64,
    pub stage_angle_deg: f64,
    pub pose_adjust_needed: bool,
    /// Duration of the stage turn before this task; 0 when none.
    pub pose_adjust_ms: u64,
    /// Duration of the tool change before this task; 0 when none.
    pub toolchange_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub camera: Option<Camera>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    pub stage_enabled: bool,
    pub records: Vec<MotionRecord>,
    /// Tool changes per arm.
    pub toolchanges: [usize; 2],
    pub toolchange_ms: u64,
    /// Stage angle before the first task and after each task.
    pub stage_trajectory_deg: Vec<f64>,
}

impl MotionPlan {
    pub fn pose_adjust_count(&self) -> usize {
        self.records.iter().filter(|r| r.pose_adjust_needed).count()
    }

    pub fn toolchange_count(&self) -> usize {
        self.toolchanges.iter().sum()
    }
}

pub fn make_motion_plan(plan: &TaskPlan, model: &AssemblyModel, config: &MotionConfig) -> Result<MotionPlan, MotionError> {
    make_motion_plan_with(plan, model, config, &|_, _, _| true)
}

pub fn make_motion_plan_with(
    plan: &TaskPlan,
    model: &AssemblyModel,
    config: &MotionConfig,
    accept: &dyn Fn(PartId, Arm, f64) -> bool,
) -> Result<MotionPlan, MotionError> {
    config.validate()?;
    let mut position = config.home_mm;
    let mut angle = 0.0;
    let mut trajectory = vec![angle];
    let mut toolchanges = [0usize; 2];
    let mut records = Vec::with_capacity(plan.records.len());

    for (k, rec) in plan.records.iter().enumerate() {
        let part = model.part(rec.part);
        let (next_angle, penalty_ms) = if config.stage_enabled {
            (choose_stage_angle_with(rec.part, rec.arm, model, angle, config, accept)?, 0)
        } else {
            let fits = match part.geometry.fastener_axis {
                Some(axis) => facing_camera(axis, 0.0, config).is_some(),
                None => part.geometry.orientations[rec.arm.index()]
                    .iter()
                    .any(|&a| circular_distance(a, 0.0) < 1e-9),
            };
            (0.0, if fits { 0 } else { config.fixed_stage_penalty_ms })
        };
        let turned = circular_distance(next_angle, angle) > 1e-9;
        let changes_tool = rec.toolchange_before && (config.first_mount_counts || !rec.first_on_arm);
        if changes_tool {
            toolchanges[rec.arm.index()] += 1;
        }

        let com = part.geometry.center_of_mass;
        let travel_ms = (distance(&position[rec.arm.index()], &com) / config.arm_speed_mm_s * 1000.0 - 1e-9)
            .ceil()
            .max(0.0) as u64;
        position[rec.arm.index()] = com;
        let camera = part.geometry.fastener_axis.and_then(|axis| facing_camera(axis, next_angle, config));

        records.push(MotionRecord {
            task: k,
            part: rec.part,
            arm: rec.arm,
            duration_ms: travel_ms + config.op_time(rec.kind) + penalty_ms,
            travel_ms,
            penalty_ms,
            stage_angle_deg: next_angle,
            pose_adjust_needed: turned,
            pose_adjust_ms: if turned { config.pose_adjust_ms } else { 0 },
            toolchange_ms: if changes_tool { config.toolchange_ms } else { 0 },
            camera,
        });
        angle = next_angle;
        trajectory.push(angle);
    }

    Ok(MotionPlan {
        stage_enabled: config.stage_enabled,
        records,
        toolchanges,
        toolchange_ms: config.toolchange_ms,
        stage_trajectory_deg: trajectory,
    })
}
