//! End-to-end planning: sequence, tasks, motion, schedule, and the files
//! each run leaves behind.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccc::{try_initialize_population, InitError, SequenceChromosome};
use crate::model::{Arm, AssemblyModel, ModelError, PartId, TaskKind, Tool};
use crate::moga::{trace_to_csv, GaConfig, GaError, ObjectiveVector, TraceRow};
use crate::motion::{make_motion_plan, MotionConfig, MotionError, MotionPlan};
use crate::par::Execution;
use crate::schedule::{
    build_instance, build_jobs, gantt_svg, solve, violations, Instance, Schedule, ScheduleError, ScheduleReport,
    SolverConfig, Stage,
};
use crate::sequence::{self, admissible_orders, is_admissible, plan_sequence, SequenceConfig, SequenceError, SEQUENCE_OBJECTIVES};
use crate::task::{self, plan_tasks, TaskConfig, TaskError, TaskPlan};

/// Salt separating the task search seed from the sequence search seed.
const TASK_SEED_SALT: u64 = 0x7461_736b;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Config,
    Model,
    Sequence,
    Task,
    Motion,
    Schedule,
    Output,
}

impl std::fmt::Display for Layer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Layer::Config => "config",
            Layer::Model => "model",
            Layer::Sequence => "sequence",
            Layer::Task => "task",
            Layer::Motion => "motion",
            Layer::Schedule => "schedule",
            Layer::Output => "output",
        };
        f.write_str(name)
    }
}

/// How a failure should be reported to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureClass {
    /// Bad input or configuration.
    Validation,
    /// The input is valid but no admissible plan was found.
    Infeasible,
    /// A search budget ran out.
    Timeout,
    Io,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Validation => 2,
            FailureClass::Infeasible => 3,
            FailureClass::Timeout => 4,
            FailureClass::Io => 1,
        }
    }
}

#[derive(Debug, Error)]
#[error("{layer} layer: {message}")]
pub struct PipelineError {
    pub layer: Layer,
    pub class: FailureClass,
    pub message: String,
}

impl PipelineError {
    fn new(layer: Layer, class: FailureClass, message: impl Into<String>) -> Self {
        Self {
            layer,
            class,
            message: message.into(),
        }
    }
}

impl From<ModelError> for PipelineError {
    fn from(e: ModelError) -> Self {
        let class = match e {
            ModelError::Io { .. } => FailureClass::Io,
            _ => FailureClass::Validation,
        };
        Self::new(Layer::Model, class, e.to_string())
    }
}

fn ga_class(e: &GaError) -> FailureClass {
    match e {
        GaError::Config(_) => FailureClass::Validation,
        GaError::NoFeasibleStart => FailureClass::Infeasible,
    }
}

impl From<SequenceError> for PipelineError {
    fn from(e: SequenceError) -> Self {
        let class = match &e {
            SequenceError::Ga(g) => ga_class(g),
            SequenceError::NotAdmissible(_) => FailureClass::Infeasible,
            SequenceError::LengthMismatch { .. } => FailureClass::Validation,
        };
        Self::new(Layer::Sequence, class, e.to_string())
    }
}

impl From<TaskError> for PipelineError {
    fn from(e: TaskError) -> Self {
        let class = match &e {
            TaskError::Ga(g) => ga_class(g),
            TaskError::LengthMismatch { .. } => FailureClass::Validation,
        };
        Self::new(Layer::Task, class, e.to_string())
    }
}

impl From<MotionError> for PipelineError {
    fn from(e: MotionError) -> Self {
        let class = match &e {
            MotionError::NoFacingAngle { .. } => FailureClass::Infeasible,
            _ => FailureClass::Validation,
        };
        Self::new(Layer::Motion, class, e.to_string())
    }
}

impl From<ScheduleError> for PipelineError {
    fn from(e: ScheduleError) -> Self {
        let class = match &e {
            ScheduleError::CyclicPrecedence | ScheduleError::HorizonExceeded { .. } => FailureClass::Infeasible,
            _ => FailureClass::Validation,
        };
        Self::new(Layer::Schedule, class, e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(Layer::Output, FailureClass::Io, format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IoConfig {
    pub out_dir: Option<PathBuf>,
}

/// Whole-pipeline settings, one section per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds every random choice; overrides the per-layer GA seeds.
    pub seed: u64,
    pub execution: Execution,
    pub ga: GaConfig,
    pub task: GaConfig,
    pub motion: MotionConfig,
    pub scheduler: SolverConfig,
    pub io: IoConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            execution: Execution::default(),
            ga: GaConfig::default(),
            task: TaskConfig::default().ga,
            motion: MotionConfig::default(),
            scheduler: SolverConfig::default(),
            io: IoConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::new(Layer::Config, FailureClass::Validation, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::new(Layer::Config, FailureClass::Io, format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn sequence_config(&self) -> SequenceConfig {
        SequenceConfig {
            ga: GaConfig {
                rng_seed: self.seed,
                execution: self.execution,
                ..self.ga.clone()
            },
        }
    }

    fn task_config(&self) -> TaskConfig {
        TaskConfig {
            ga: GaConfig {
                rng_seed: self.seed ^ TASK_SEED_SALT,
                execution: self.execution,
                ..self.task.clone()
            },
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| PipelineError::new(Layer::Config, FailureClass::Validation, m);
        self.ga.validate().map_err(|e| bad(format!("ga: {e}")))?;
        self.task.validate().map_err(|e| bad(format!("task: {e}")))?;
        self.motion.validate().map_err(|e| bad(format!("motion: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub initial_best: f64,
    pub final_best: f64,
    /// Relative drop of the best scalar score, `1 - final / initial`.
    pub reduction: f64,
}

impl TraceSummary {
    pub fn of(trace: &[TraceRow]) -> Self {
        let initial_best = trace.first().map_or(0.0, |r| r.best_scalar);
        let final_best = trace.last().map_or(0.0, |r| r.best_scalar);
        let reduction = if initial_best > 0.0 { 1.0 - final_best / initial_best } else { 0.0 };
        Self {
            initial_best,
            final_best,
            reduction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub part: PartId,
    pub kind: TaskKind,
    pub arm: Arm,
    pub tool: Tool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub eta: usize,
    pub removal_order: Vec<PartId>,
    pub sequence_objectives: ObjectiveVector,
    pub assignment: Vec<Arm>,
    pub task_objectives: ObjectiveVector,
    pub tasks: Vec<TaskSummary>,
    pub makespan_ms: u64,
    pub makespan_s: f64,
    pub schedule_optimal: bool,
    pub tool_change_count: usize,
    pub pose_adjust_count: usize,
    pub sequence_trace: TraceSummary,
    pub task_trace: TraceSummary,
    pub sequence_evaluations: usize,
    pub initialization_availability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub removal_order: Vec<PartId>,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFront {
    pub objectives: Vec<String>,
    pub knee: usize,
    pub members: Vec<FrontMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPlanFile {
    pub objectives: ObjectiveVector,
    #[serde(flatten)]
    pub plan: TaskPlan,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub front: SequenceFront,
    pub sequence_trace: Vec<TraceRow>,
    pub task_plan: TaskPlanFile,
    pub motion: MotionPlan,
    pub instance: Instance,
    pub schedule: Schedule,
}

impl PipelineOutput {
    /// File name and contents of every artifact.
    pub fn artifacts(&self) -> Vec<(&'static str, String)> {
        vec![
            ("sequence_front.json", pretty_json(&self.front)),
            ("sequence_trace.csv", trace_to_csv(&self.sequence_trace, &SEQUENCE_OBJECTIVES)),
            ("task_plan.json", pretty_json(&self.task_plan)),
            ("motion_plan.json", pretty_json(&self.motion)),
            ("schedule.json", pretty_json(&ScheduleReport::new(&self.instance, &self.schedule))),
            ("gantt.svg", gantt_svg(&self.instance, &self.schedule)),
            ("report.json", pretty_json(&self.report)),
        ]
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, PipelineError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        self.artifacts()
            .into_iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| io_error(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

/// Result of the sequence and task layers, which both stage modes share.
#[derive(Debug, Clone)]
pub struct Allocation {
    pub sequence: sequence::SequenceOutcome,
    pub tasks: task::TaskOutcome,
    pub availability: f64,
}

pub fn allocate(model: &AssemblyModel, config: &PipelineConfig) -> Result<Allocation, PipelineError> {
    config.validate()?;
    let seq_cfg = config.sequence_config();
    let starts = try_initialize_population(model, seq_cfg.ga.population_size, seq_cfg.ga.rng_seed, config.execution);
    let available = starts
        .iter()
        .filter(|c| c.as_ref().is_ok_and(|c| is_admissible(c, model)))
        .count();
    let availability = available as f64 / starts.len() as f64;

    let sequence = plan_sequence(model, &seq_cfg)?;
    let removal = sequence.best.removal_order();
    let tasks = plan_tasks(&removal, model, &config.task_config())?;
    Ok(Allocation {
        sequence,
        tasks,
        availability,
    })
}

/// Motion and schedule for an allocation.
pub fn realize(
    model: &AssemblyModel,
    plan: &TaskPlan,
    motion: &MotionConfig,
    scheduler: &SolverConfig,
) -> Result<(MotionPlan, Instance, Schedule), PipelineError> {
    let mp = make_motion_plan(plan, model, motion)?;
    let jobs = build_jobs(plan, &mp)?;
    let instance = build_instance(&jobs, scheduler.allow_parallel_s3)?;
    let schedule = solve(&instance, scheduler)?;
    if scheduler.require_optimal && !schedule.optimal {
        return Err(PipelineError::new(
            Layer::Schedule,
            FailureClass::Timeout,
            format!("search stopped after {} nodes without proving optimality", schedule.nodes),
        ));
    }
    let broken = violations(&instance, &schedule);
    if !broken.is_empty() {
        return Err(PipelineError::new(Layer::Schedule, FailureClass::Infeasible, broken.join("; ")));
    }
    Ok((mp, instance, schedule))
}

pub fn run(model: &AssemblyModel, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let alloc = allocate(model, config)?;
    let plan = alloc.tasks.plan.clone();
    let (motion, instance, schedule) = realize(model, &plan, &config.motion, &config.scheduler)?;

    let front = SequenceFront {
        objectives: SEQUENCE_OBJECTIVES.iter().map(|s| s.to_string()).collect(),
        knee: alloc
            .sequence
            .front
            .iter()
            .position(|m| m.genome == alloc.sequence.best)
            .expect("knee is on the front"),
        members: alloc
            .sequence
            .front
            .iter()
            .map(|m| FrontMember {
                removal_order: m.genome.removal_order(),
                objectives: m.objectives.clone(),
            })
            .collect(),
    };
    let report = PipelineReport {
        seed: config.seed,
        eta: model.eta(),
        removal_order: alloc.sequence.best.removal_order(),
        sequence_objectives: alloc.sequence.objectives.clone(),
        assignment: alloc.tasks.assignment.0.clone(),
        task_objectives: alloc.tasks.objectives.clone(),
        tasks: plan
            .records
            .iter()
            .map(|r| TaskSummary {
                part: r.part,
                kind: r.kind,
                arm: r.arm,
                tool: r.tool,
            })
            .collect(),
        makespan_ms: schedule.makespan_ms,
        makespan_s: schedule.makespan_ms as f64 / 1000.0,
        schedule_optimal: schedule.optimal,
        tool_change_count: motion.toolchange_count(),
        pose_adjust_count: motion.pose_adjust_count(),
        sequence_trace: TraceSummary::of(&alloc.sequence.trace),
        task_trace: TraceSummary::of(&alloc.tasks.trace),
        sequence_evaluations: alloc.sequence.evaluations,
        initialization_availability: alloc.availability,
    };
    Ok(PipelineOutput {
        report,
        front,
        sequence_trace: alloc.sequence.trace,
        task_plan: TaskPlanFile {
            objectives: alloc.tasks.objectives,
            plan,
        },
        motion,
        instance,
        schedule,
    })
}

/// Loads the model and config, runs, and writes the artifacts into
/// `out_dir` (or the config's output directory).
pub fn run_files(
    model_path: &Path,
    config_path: Option<&Path>,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<PipelineOutput, PipelineError> {
    let config = match config_path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    }
    .with_seed(seed);
    let model = AssemblyModel::load(model_path)?;
    let out = run(&model, &config)?;
    if let Some(dir) = out_dir.map(Path::to_path_buf).or_else(|| config.io.out_dir.clone()) {
        out.write(dir)?;
    }
    Ok(out)
}

/// Schedule for a task plan and motion plan read back from disk.
pub fn schedule_only(
    plan: &TaskPlan,
    motion: &MotionPlan,
    scheduler: &SolverConfig,
) -> Result<(Instance, Schedule), PipelineError> {
    let jobs = build_jobs(plan, motion)?;
    let instance = build_instance(&jobs, scheduler.allow_parallel_s3)?;
    let schedule = solve(&instance, scheduler)?;
    if scheduler.require_optimal && !schedule.optimal {
        return Err(PipelineError::new(Layer::Schedule, FailureClass::Timeout, "optimality not proven within budget"));
    }
    Ok((instance, schedule))
}

/// Reads a JSON artifact such as a task plan or motion plan.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path)
        .map_err(|e| PipelineError::new(Layer::Config, FailureClass::Io, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::new(Layer::Config, FailureClass::Validation, format!("{}: {e}", path.display())))
}

/// Stage-mode comparison on one fixed allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageComparison {
    pub enabled_makespan_ms: u64,
    pub disabled_makespan_ms: u64,
    pub enabled_pose_adjusts: usize,
    pub disabled_penalized_tasks: usize,
    pub tool_changes: usize,
}

pub fn compare_stage(model: &AssemblyModel, config: &PipelineConfig) -> Result<StageComparison, PipelineError> {
    let alloc = allocate(model, config)?;
    compare_stage_for(model, &alloc.tasks.plan, config)
}

pub fn compare_stage_for(model: &AssemblyModel, plan: &TaskPlan, config: &PipelineConfig) -> Result<StageComparison, PipelineError> {
    let on = MotionConfig {
        stage_enabled: true,
        ..config.motion.clone()
    };
    let off = MotionConfig {
        stage_enabled: false,
        ..config.motion.clone()
    };
    let (mp_on, _, s_on) = realize(model, plan, &on, &config.scheduler)?;
    let (mp_off, inst_off, s_off) = realize(model, plan, &off, &config.scheduler)?;
    debug_assert!(inst_off.tasks.iter().all(|t| t.stage != Stage::PoseAdjust));
    Ok(StageComparison {
        enabled_makespan_ms: s_on.makespan_ms,
        disabled_makespan_ms: s_off.makespan_ms,
        enabled_pose_adjusts: mp_on.pose_adjust_count(),
        disabled_penalized_tasks: mp_off.records.iter().filter(|r| r.penalty_ms > 0).count(),
        tool_changes: mp_on.toolchange_count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityRow {
    pub initializer: String,
    pub generated: usize,
    pub available: usize,
    /// `None` when nothing was generated.
    pub availability: Option<f64>,
}

impl AvailabilityRow {
    fn new(initializer: &str, generated: usize, available: usize) -> Self {
        Self {
            initializer: initializer.into(),
            generated,
            available,
            availability: (generated > 0).then(|| available as f64 / generated as f64),
        }
    }

    pub fn availability_text(&self) -> String {
        self.availability.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitComparison {
    pub rows: Vec<AvailabilityRow>,
    /// Admissible share of all orders, when the model is small enough to
    /// enumerate.
    pub exact_random_availability: Option<f64>,
}

/// Orders with at most this many removable parts are enumerated exactly.
pub const EXACT_ENUMERATION_LIMIT: usize = 9;

/// Uniformly random permutations of the removable parts.
pub fn random_population(model: &AssemblyModel, n: usize, seed: u64) -> Vec<SequenceChromosome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts = model.removable_parts();
    (0..n)
        .map(|_| {
            let mut p = parts.clone();
            p.shuffle(&mut rng);
            SequenceChromosome(p)
        })
        .collect()
}

pub fn compare_init(model: &AssemblyModel, n_genes: usize, seeds: &[u64], exec: Execution) -> InitComparison {
    let mut ccc = (0, 0);
    let mut random = (0, 0);
    for &seed in seeds {
        for c in try_initialize_population(model, n_genes, seed, exec) {
            ccc.0 += 1;
            if c.as_ref().is_ok_and(|c| is_admissible(c, model)) {
                ccc.1 += 1;
            }
        }
        for c in random_population(model, n_genes, seed) {
            random.0 += 1;
            if is_admissible(&c, model) {
                random.1 += 1;
            }
        }
    }
    let k = model.eta() - 1;
    let exact = (k <= EXACT_ENUMERATION_LIMIT).then(|| {
        let total: f64 = (1..=k).map(|i| i as f64).product();
        admissible_orders(model, usize::MAX).len() as f64 / total
    });
    InitComparison {
        rows: vec![AvailabilityRow::new("ccc", ccc.0, ccc.1), AvailabilityRow::new("random", random.0, random.1)],
        exact_random_availability: exact,
    }
}

impl From<InitError> for PipelineError {
    fn from(e: InitError) -> Self {
        Self::new(Layer::Sequence, FailureClass::Infeasible, e.to_string())
    }
}
