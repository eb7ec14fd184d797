//! Two-arm task allocation for a fixed removal order.
//!
//! Task `k` is the `k`-th removal. An assignment gives each task an arm;
//! the three minimized objectives are lost parallelism, tool changes and
//! per-arm travel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moga::{self, flip_mutation, uniform_crossover, GaConfig, GaError, Individual, ObjectiveVector, Problem, TraceRow};
use crate::model::{Arm, AssemblyModel, PartId, TaskKind, Tool};
use crate::par::Execution;

pub const TASK_OBJECTIVES: [&str; 3] = ["parallel", "change", "distance"];

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("assignment has {got} arms for {expected} tasks")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Ga(#[from] GaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssignmentChromosome(pub Vec<Arm>);

/// `[f_parallel, f_change, f_distance]` of an assignment over `removal`.
pub fn eval_assignment(removal: &[PartId], arms: &[Arm], model: &AssemblyModel) -> Result<ObjectiveVector, TaskError> {
    if removal.len() != arms.len() {
        return Err(TaskError::LengthMismatch {
            expected: removal.len(),
            got: arms.len(),
        });
    }
    Ok(evaluate_unchecked(removal, arms, model))
}

fn evaluate_unchecked(removal: &[PartId], arms: &[Arm], model: &AssemblyModel) -> ObjectiveVector {
    let eta = model.eta() as f64;
    let n = removal.len();

    // A task can overlap a neighbor only when that neighbor runs on the
    // other arm.
    let lonely = (0..n)
        .filter(|&k| {
            let prev = k > 0 && arms[k - 1] != arms[k];
            let next = k + 1 < n && arms[k + 1] != arms[k];
            !(prev || next)
        })
        .count();

    let mut changes = 0usize;
    let mut per_arm = [0.0; 2];
    for arm in Arm::BOTH {
        let travel = &mut per_arm[arm.index()];
        let mut last: Option<PartId> = None;
        for k in (0..n).filter(|&k| arms[k] == arm) {
            let p = removal[k];
            if let Some(q) = last {
                if tool_of(model, q) != tool_of(model, p) {
                    changes += 1;
                }
                *travel += model.com_distance(q, p);
            }
            last = Some(p);
        }
    }
    ObjectiveVector(vec![
        lonely as f64 / eta,
        changes as f64 / (eta - 1.0),
        (per_arm[0] + per_arm[1]) / (eta * model.max_com_distance()),
    ])
}

#[inline]
fn tool_of(model: &AssemblyModel, p: PartId) -> Tool {
    model.part(p).label.tool
}

/// Number of tool mounts across both arms. With `first_mount_counts` an
/// arm's first tool is a change from an empty flange.
pub fn tool_change_count(removal: &[PartId], arms: &[Arm], model: &AssemblyModel, first_mount_counts: bool) -> usize {
    TaskPlan::build(removal, arms, model)
        .records
        .iter()
        .filter(|r| r.toolchange_before && (first_mount_counts || !r.first_on_arm))
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub part: PartId,
    pub kind: TaskKind,
    pub arm: Arm,
    pub tool: Tool,
    /// The arm must mount `tool` first: its previous tool differs or it
    /// has none yet.
    pub toolchange_before: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub first_on_arm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPlan {
    pub records: Vec<TaskRecord>,
}

impl TaskPlan {
    pub fn build(removal: &[PartId], arms: &[Arm], model: &AssemblyModel) -> Self {
        let mut current: [Option<Tool>; 2] = [None, None];
        let records = removal
            .iter()
            .zip(arms)
            .map(|(&part, &arm)| {
                let label = model.part(part).label;
                let prev = current[arm.index()].replace(label.tool);
                TaskRecord {
                    part,
                    kind: label.task_kind,
                    arm,
                    tool: label.tool,
                    toolchange_before: prev != Some(label.tool),
                    first_on_arm: prev.is_none(),
                }
            })
            .collect();
        Self { records }
    }

    pub fn removal_order(&self) -> Vec<PartId> {
        self.records.iter().map(|r| r.part).collect()
    }

    pub fn arms(&self) -> Vec<Arm> {
        self.records.iter().map(|r| r.arm).collect()
    }

    /// Tool transitions per arm, first mounts excluded.
    pub fn transitions(&self, arm: Arm) -> usize {
        self.records
            .iter()
            .filter(|r| r.arm == arm && r.toolchange_before && !r.first_on_arm)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    pub ga: GaConfig,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            ga: GaConfig {
                population_size: 40,
                generations: 60,
                ..GaConfig::default()
            },
        }
    }
}

/// Budget of the assignment search run inside every sequence evaluation.
pub fn inner_config(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 20,
        generations: 20,
        rng_seed: seed,
        execution: Execution::Sequential,
        ..GaConfig::default()
    }
}

pub struct AssignmentProblem<'a> {
    pub model: &'a AssemblyModel,
    pub removal: &'a [PartId],
}

impl Problem for AssignmentProblem<'_> {
    type Genome = Vec<Arm>;

    fn objective_count(&self) -> usize {
        3
    }

    /// Structured seeds first, then uniform random assignments.
    fn initialize(&self, n: usize, seed: u64, _exec: Execution) -> Vec<Vec<Arm>> {
        let len = self.removal.len();
        let by_tool = |flip: bool| -> Vec<Arm> {
            self.removal
                .iter()
                .map(|&p| {
                    let arm = if tool_of(self.model, p) == Tool::AirDriver { Arm::One } else { Arm::Two };
                    if flip {
                        arm.other()
                    } else {
                        arm
                    }
                })
                .collect()
        };
        let mut out = vec![
            vec![Arm::One; len],
            vec![Arm::Two; len],
            by_tool(false),
            by_tool(true),
            (0..len).map(|k| if k % 2 == 0 { Arm::One } else { Arm::Two }).collect(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while out.len() < n {
            out.push((0..len).map(|_| if rng.random_bool(0.5) { Arm::One } else { Arm::Two }).collect());
        }
        out.truncate(n);
        out
    }

    fn is_feasible(&self, genome: &Vec<Arm>) -> bool {
        genome.len() == self.removal.len()
    }

    fn evaluate(&self, genome: &Vec<Arm>) -> ObjectiveVector {
        evaluate_unchecked(self.removal, genome, self.model)
    }

    fn crossover(&self, a: &Vec<Arm>, b: &Vec<Arm>, rng: &mut ChaCha8Rng) -> Vec<Arm> {
        uniform_crossover(a, b, rng)
    }

    fn mutate(&self, x: &Vec<Arm>, rate: f64, rng: &mut ChaCha8Rng) -> Vec<Arm> {
        flip_mutation(x, rate, rng)
    }
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub assignment: AssignmentChromosome,
    pub objectives: ObjectiveVector,
    pub plan: TaskPlan,
    pub front: Vec<Individual<Vec<Arm>>>,
    pub trace: Vec<TraceRow>,
}

/// Optimizes the arm assignment for a fixed removal order and returns the
/// knee of the final front.
pub fn plan_tasks(removal: &[PartId], model: &AssemblyModel, config: &TaskConfig) -> Result<TaskOutcome, TaskError> {
    let problem = AssignmentProblem { model, removal };
    let result = moga::evolve(&problem, &config.ga)?;
    let knee = moga::knee_point(&result.front).expect("front of a nonempty population");
    let best = result.front[knee].clone();
    Ok(TaskOutcome {
        plan: TaskPlan::build(removal, &best.genome, model),
        assignment: AssignmentChromosome(best.genome),
        objectives: best.objectives,
        front: result.front,
        trace: result.trace,
    })
}
