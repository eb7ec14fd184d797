//! Makespan scheduling of the three task stages over five resources.
//!
//! Every removal is a job: an optional tool change (stage 1) on its arm,
//! an optional stage turn (stage 2) on the external axis, and the
//! disassembly itself (stage 3) on its arm. Times are integer
//! milliseconds.

mod gantt;
mod oracle;
mod solver;

pub use gantt::gantt_svg;
pub use oracle::{oracle_solve, ORACLE_MAX_TASKS};
pub use solver::{solve, SolverConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Arm, PartId};
use crate::motion::MotionPlan;
use crate::task::TaskPlan;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("task and motion plans disagree: {0}")]
    InconsistentPlan(String),
    #[error("precedence arcs form a cycle")]
    CyclicPrecedence,
    #[error("exhaustive search is limited to {max} tasks, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("no schedule within the {horizon_ms} ms horizon")]
    HorizonExceeded { horizon_ms: u64 },
    #[error("task {0} has zero duration")]
    ZeroDuration(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resource {
    #[serde(rename = "Arm1_S1")]
    Arm1S1,
    #[serde(rename = "Arm2_S1")]
    Arm2S1,
    #[serde(rename = "ExternalAxis_S2")]
    ExternalAxisS2,
    #[serde(rename = "Arm1_S3")]
    Arm1S3,
    #[serde(rename = "Arm2_S3")]
    Arm2S3,
}

impl Resource {
    pub const ALL: [Resource; 5] = [
        Resource::Arm1S1,
        Resource::Arm2S1,
        Resource::ExternalAxisS2,
        Resource::Arm1S3,
        Resource::Arm2S3,
    ];

    pub fn of(stage: Stage, arm: Arm) -> Self {
        match (stage, arm) {
            (Stage::ToolChange, Arm::One) => Resource::Arm1S1,
            (Stage::ToolChange, Arm::Two) => Resource::Arm2S1,
            (Stage::PoseAdjust, _) => Resource::ExternalAxisS2,
            (Stage::Disassembly, Arm::One) => Resource::Arm1S3,
            (Stage::Disassembly, Arm::Two) => Resource::Arm2S3,
        }
    }

    pub fn arm(self) -> Option<Arm> {
        match self {
            Resource::Arm1S1 | Resource::Arm1S3 => Some(Arm::One),
            Resource::Arm2S1 | Resource::Arm2S3 => Some(Arm::Two),
            Resource::ExternalAxisS2 => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Resource::Arm1S1 => "Arm1_S1",
            Resource::Arm2S1 => "Arm2_S1",
            Resource::ExternalAxisS2 => "ExternalAxis_S2",
            Resource::Arm1S3 => "Arm1_S3",
            Resource::Arm2S3 => "Arm2_S3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Stage {
    ToolChange = 1,
    PoseAdjust = 2,
    Disassembly = 3,
}

impl From<Stage> for u8 {
    fn from(s: Stage) -> u8 {
        s as u8
    }
}

impl TryFrom<u8> for Stage {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Stage::ToolChange),
            2 => Ok(Stage::PoseAdjust),
            3 => Ok(Stage::Disassembly),
            _ => Err(format!("stage {v} is not 1, 2 or 3")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedTask {
    pub id: usize,
    pub job: usize,
    pub stage: Stage,
    pub resource: Resource,
    pub duration_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<PartId>,
}

/// One removal as the scheduler sees it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    pub arm: Arm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toolchange_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose_adjust_ms: Option<u64>,
    pub disassembly_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<PartId>,
}

/// Tasks, precedence arcs and pairwise no-overlap requirements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub tasks: Vec<SchedTask>,
    pub arcs: Vec<(usize, usize)>,
    pub exclusions: Vec<(usize, usize)>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Disassembly tasks in job order.
    pub fn disassembly_tasks(&self) -> Vec<usize> {
        self.tasks.iter().filter(|t| t.stage == Stage::Disassembly).map(|t| t.id).collect()
    }
}

/// Whether two tasks may never run at the same time.
pub fn excluded(a: &SchedTask, b: &SchedTask, allow_parallel_s3: bool) -> bool {
    use Stage::*;
    if a.resource == b.resource {
        return true;
    }
    match (a.stage, b.stage) {
        (PoseAdjust, Disassembly) | (Disassembly, PoseAdjust) => true,
        (ToolChange, PoseAdjust) | (PoseAdjust, ToolChange) => true,
        (ToolChange, Disassembly) | (Disassembly, ToolChange) => a.resource.arm() == b.resource.arm(),
        (Disassembly, Disassembly) => !allow_parallel_s3,
        _ => false,
    }
}

/// Lays out jobs in removal order.
///
/// Arcs: the stages of a job run in order; disassemblies follow the
/// removal order; a stage turn waits for the previous disassembly and a
/// tool change waits for the previous disassembly on the same arm, so
/// the stage angle and the mounted tool hold for the whole operation.
pub fn build_instance(jobs: &[JobSpec], allow_parallel_s3: bool) -> Result<Instance, ScheduleError> {
    let mut tasks = Vec::new();
    let mut arcs = Vec::new();
    let mut last_s3: Option<usize> = None;
    let mut last_s3_on: [Option<usize>; 2] = [None, None];
    for (job, spec) in jobs.iter().enumerate() {
        let mut push = |stage: Stage, d: u64| -> Result<usize, ScheduleError> {
            let id = tasks.len();
            if d == 0 {
                return Err(ScheduleError::ZeroDuration(id));
            }
            tasks.push(SchedTask {
                id,
                job,
                stage,
                resource: Resource::of(stage, spec.arm),
                duration_ms: d,
                part: spec.part,
            });
            Ok(id)
        };
        let mut prev_in_job = None;
        if let Some(d) = spec.toolchange_ms {
            let t = push(Stage::ToolChange, d)?;
            if let Some(s) = last_s3_on[spec.arm.index()] {
                arcs.push((s, t));
            }
            prev_in_job = Some(t);
        }
        if let Some(d) = spec.pose_adjust_ms {
            let t = push(Stage::PoseAdjust, d)?;
            if let Some(p) = prev_in_job {
                arcs.push((p, t));
            }
            if let Some(s) = last_s3 {
                arcs.push((s, t));
            }
            prev_in_job = Some(t);
        }
        let t = push(Stage::Disassembly, spec.disassembly_ms)?;
        if let Some(p) = prev_in_job {
            arcs.push((p, t));
        }
        if let Some(s) = last_s3 {
            if !allow_parallel_s3 {
                arcs.push((s, t));
            }
        }
        last_s3 = Some(t);
        last_s3_on[spec.arm.index()] = Some(t);
    }
    let mut exclusions = Vec::new();
    for a in 0..tasks.len() {
        for b in a + 1..tasks.len() {
            if excluded(&tasks[a], &tasks[b], allow_parallel_s3) {
                exclusions.push((a, b));
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup();
    Ok(Instance { tasks, arcs, exclusions })
}

/// Jobs for a task plan and its motion plan. Durations are already whole
/// milliseconds.
pub fn build_jobs(plan: &TaskPlan, motion: &MotionPlan) -> Result<Vec<JobSpec>, ScheduleError> {
    if plan.records.len() != motion.records.len() {
        return Err(ScheduleError::InconsistentPlan(format!(
            "{} tasks but {} motion records",
            plan.records.len(),
            motion.records.len()
        )));
    }
    plan.records
        .iter()
        .zip(&motion.records)
        .enumerate()
        .map(|(k, (t, m))| {
            if t.part != m.part || t.arm != m.arm || m.task != k {
                return Err(ScheduleError::InconsistentPlan(format!(
                    "task {k}: plan has {} on {}, motion has {} on {}",
                    t.part, t.arm, m.part, m.arm
                )));
            }
            Ok(JobSpec {
                arm: t.arm,
                toolchange_ms: (m.toolchange_ms > 0).then_some(m.toolchange_ms),
                pose_adjust_ms: (m.pose_adjust_ms > 0).then_some(m.pose_adjust_ms),
                disassembly_ms: m.duration_ms,
                part: Some(t.part),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Start time of each task, indexed by task id.
    pub starts: Vec<u64>,
    pub makespan_ms: u64,
    /// False when the search budget ran out before optimality was proven.
    pub optimal: bool,
    pub nodes: u64,
}

impl Schedule {
    pub fn end(&self, inst: &Instance, id: usize) -> u64 {
        self.starts[id] + inst.tasks[id].duration_ms
    }
}

/// Every broken constraint of `schedule` on `inst`, as messages.
pub fn violations(inst: &Instance, schedule: &Schedule) -> Vec<String> {
    let mut out = Vec::new();
    if schedule.starts.len() != inst.len() {
        out.push(format!("{} starts for {} tasks", schedule.starts.len(), inst.len()));
        return out;
    }
    let end = |k: usize| schedule.starts[k] + inst.tasks[k].duration_ms;
    for &(a, b) in &inst.arcs {
        if end(a) > schedule.starts[b] {
            out.push(format!("arc {a}->{b}: {} ends at {} after {b} starts at {}", a, end(a), schedule.starts[b]));
        }
    }
    for &(a, b) in &inst.exclusions {
        if schedule.starts[a] < end(b) && schedule.starts[b] < end(a) {
            out.push(format!("tasks {a} and {b} overlap"));
        }
    }
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            if inst.tasks[a].resource == inst.tasks[b].resource
                && schedule.starts[a] < end(b)
                && schedule.starts[b] < end(a)
            {
                out.push(format!("tasks {a} and {b} share {}", inst.tasks[a].resource.name()));
            }
        }
    }
    let makespan = (0..inst.len()).map(end).max().unwrap_or(0);
    if makespan != schedule.makespan_ms {
        out.push(format!("makespan {} but last task ends at {makespan}", schedule.makespan_ms));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub id: usize,
    pub job: usize,
    pub stage: Stage,
    pub resource: Resource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<PartId>,
    pub start_ms: u64,
    pub end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub makespan_ms: u64,
    pub optimal: bool,
    pub nodes: u64,
    pub tasks: Vec<ScheduledTask>,
}

impl ScheduleReport {
    pub fn new(inst: &Instance, schedule: &Schedule) -> Self {
        let tasks = inst
            .tasks
            .iter()
            .map(|t| ScheduledTask {
                id: t.id,
                job: t.job,
                stage: t.stage,
                resource: t.resource,
                part: t.part,
                start_ms: schedule.starts[t.id],
                end_ms: schedule.end(inst, t.id),
            })
            .collect();
        Self {
            makespan_ms: schedule.makespan_ms,
            optimal: schedule.optimal,
            nodes: schedule.nodes,
            tasks,
        }
    }
}
