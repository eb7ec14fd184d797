//! Disassembly sequence planning: admissibility checks, the four sequence
//! objectives and the GA wrapper that searches over admissible orders.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ccc::{initialize_population_with, SequenceChromosome};
use crate::model::{Arm, AssemblyModel, Direction, PartId};
use crate::moga::{self, order_crossover, swap_mutation, GaConfig, GaError, Individual, ObjectiveVector, Problem, TraceRow};
use crate::par::Execution;
use crate::task::{self, AssignmentProblem};

pub const SEQUENCE_OBJECTIVES: [&str; 4] = ["difficulty", "efficiency", "priority", "allocation"];

#[derive(Debug, Error, PartialEq)]
pub enum SequenceError {
    #[error("order is not admissible: {0}")]
    NotAdmissible(Violation),
    #[error("assignment has {got} arms for {expected} tasks")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Ga(#[from] GaError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ViolationReason {
    /// The genes are not the model's removable parts.
    NotPermutation,
    PendingConstraint { blocker: PartId },
    AttachedFasteners { fasteners: Vec<PartId> },
    NoFreeDirection,
    /// A remaining part lost its path to the base.
    Isolated { part: PartId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based removal step.
    pub step: usize,
    pub part: PartId,
    #[serde(flatten)]
    pub reason: ViolationReason,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step {} ({}): ", self.step, self.part)?;
        match &self.reason {
            ViolationReason::NotPermutation => write!(f, "not a permutation of the removable parts"),
            ViolationReason::PendingConstraint { blocker } => write!(f, "{blocker} must be removed first"),
            ViolationReason::AttachedFasteners { fasteners } => {
                let names: Vec<String> = fasteners.iter().map(ToString::to_string).collect();
                write!(f, "still fastened by {}", names.join(","))
            }
            ViolationReason::NoFreeDirection => write!(f, "every removal direction collides"),
            ViolationReason::Isolated { part } => write!(f, "{part} is cut off from the base"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub stable: bool,
    pub first_violation: Option<Violation>,
}

impl FeasibilityVerdict {
    pub fn admissible(&self) -> bool {
        self.feasible && self.stable
    }
}

/// Incremental replay of a removal order.
#[derive(Debug, Clone)]
pub struct Replay<'a> {
    model: &'a AssemblyModel,
    present: Vec<bool>,
    steps: usize,
}

impl<'a> Replay<'a> {
    pub fn new(model: &'a AssemblyModel) -> Self {
        Self {
            model,
            present: vec![true; model.eta()],
            steps: 0,
        }
    }

    #[inline]
    pub fn is_present(&self, p: PartId) -> bool {
        self.present[p.index()]
    }

    /// Why `p` cannot come off now, if it cannot.
    pub fn blocked(&self, p: PartId) -> Option<ViolationReason> {
        let m = self.model;
        if p == m.base() || !self.is_present(p) {
            return Some(ViolationReason::NotPermutation);
        }
        if let Some(blocker) = m.ids().find(|&u| self.is_present(u) && m.constrains(u, p)) {
            return Some(ViolationReason::PendingConstraint { blocker });
        }
        if !m.is_fastener(p) {
            let fasteners: Vec<PartId> = m
                .ids()
                .filter(|&f| self.is_present(f) && m.is_fastener(f) && m.connected(f, p))
                .collect();
            if !fasteners.is_empty() {
                return Some(ViolationReason::AttachedFasteners { fasteners });
            }
        }
        if self.free_directions(p).next().is_none() {
            return Some(ViolationReason::NoFreeDirection);
        }
        None
    }

    /// Removal directions of `p` not blocked by a present part, in the
    /// part's own listing order.
    pub fn free_directions(&self, p: PartId) -> impl Iterator<Item = Direction> + '_ {
        let rel = self.model.relations();
        self.model.part(p).geometry.removal_directions.iter().copied().filter(move |&d| {
            rel.blockers(p, d).iter().all(|&v| !self.is_present(v))
        })
    }

    pub fn remove(&mut self, p: PartId) {
        self.present[p.index()] = false;
        self.steps += 1;
    }

    /// First present part with no path to the base through contact or
    /// connection links among present parts.
    pub fn isolated(&self) -> Option<PartId> {
        let m = self.model;
        let n = m.eta();
        let mut seen = vec![false; n];
        let base = m.base().index();
        seen[base] = true;
        let mut queue = VecDeque::from([base]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && self.present[v] {
                    let (a, b) = (PartId::from_index(u), PartId::from_index(v));
                    if m.in_contact(a, b) || m.connected(a, b) {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        (0..n).find(|&v| self.present[v] && !seen[v]).map(PartId::from_index)
    }
}

/// Replays the removal order of `order` and reports the first violation.
///
/// Feasibility failures take precedence: once a step is infeasible the
/// replay stops, and stability is reported only for the prefix replayed.
pub fn verdict(order: &SequenceChromosome, model: &AssemblyModel) -> FeasibilityVerdict {
    if !order.is_permutation_of(model) {
        return FeasibilityVerdict {
            feasible: false,
            stable: false,
            first_violation: Some(Violation {
                step: 0,
                part: model.base(),
                reason: ViolationReason::NotPermutation,
            }),
        };
    }
    let mut replay = Replay::new(model);
    let mut feasible = true;
    let mut stable = true;
    let mut first = None;
    for (k, p) in order.removal_order().into_iter().enumerate() {
        let step = k + 1;
        if feasible {
            if let Some(reason) = replay.blocked(p) {
                feasible = false;
                first.get_or_insert(Violation { step, part: p, reason });
            }
        }
        replay.remove(p);
        if stable {
            if let Some(part) = replay.isolated() {
                stable = false;
                first.get_or_insert(Violation {
                    step,
                    part: p,
                    reason: ViolationReason::Isolated { part },
                });
            }
        }
        if !feasible && !stable {
            break;
        }
    }
    FeasibilityVerdict {
        feasible,
        stable,
        first_violation: first,
    }
}

pub fn check_feasible(order: &SequenceChromosome, model: &AssemblyModel) -> bool {
    verdict(order, model).feasible
}

pub fn check_stable(order: &SequenceChromosome, model: &AssemblyModel) -> bool {
    verdict(order, model).stable
}

pub fn is_admissible(order: &SequenceChromosome, model: &AssemblyModel) -> bool {
    verdict(order, model).admissible()
}

/// Every admissible removal order, found by depth-first replay. Both
/// checks only look at prefixes, so pruning on the first violation is
/// exact. Stops after `limit` orders.
pub fn admissible_orders(model: &AssemblyModel, limit: usize) -> Vec<Vec<PartId>> {
    fn walk(replay: &Replay, prefix: &mut Vec<PartId>, todo: &[PartId], out: &mut Vec<Vec<PartId>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if prefix.len() == todo.len() {
            out.push(prefix.clone());
            return;
        }
        for &p in todo {
            if !replay.is_present(p) || replay.blocked(p).is_some() {
                continue;
            }
            let mut next = replay.clone();
            next.remove(p);
            if next.isolated().is_some() {
                continue;
            }
            prefix.push(p);
            walk(&next, prefix, todo, out, limit);
            prefix.pop();
        }
    }
    let todo = model.removable_parts();
    let mut out = Vec::new();
    walk(&Replay::new(model), &mut Vec::with_capacity(todo.len()), &todo, &mut out, limit);
    out
}

/// Direction used for each removal: the previous removal's direction when
/// it is free for this part, otherwise the part's first free direction.
pub fn removal_directions(removal: &[PartId], model: &AssemblyModel) -> Vec<Option<Direction>> {
    let mut replay = Replay::new(model);
    let mut last: Option<Direction> = None;
    removal
        .iter()
        .map(|&p| {
            let free: Vec<Direction> = replay.free_directions(p).collect();
            let chosen = match last {
                Some(d) if free.contains(&d) => Some(d),
                _ => free.first().copied(),
            };
            replay.remove(p);
            last = chosen.or(last);
            chosen
        })
        .collect()
}

/// `[f_difficulty, f_efficiency, f_priority, f_allocation]` for an
/// admissible order and the arm assignment of its tasks.
pub fn eval_sequence(
    order: &SequenceChromosome,
    assignment: &[Arm],
    model: &AssemblyModel,
) -> Result<ObjectiveVector, SequenceError> {
    let v = verdict(order, model);
    if let Some(violation) = v.first_violation {
        return Err(SequenceError::NotAdmissible(violation));
    }
    let removal = order.removal_order();
    if assignment.len() != removal.len() {
        return Err(SequenceError::LengthMismatch {
            expected: removal.len(),
            got: assignment.len(),
        });
    }
    let allocation = task::eval_assignment(&removal, assignment, model)
        .expect("lengths checked")
        .scalar();
    let mut f = sequence_terms(&removal, model);
    f.push(allocation);
    Ok(ObjectiveVector(f))
}

fn sequence_terms(removal: &[PartId], model: &AssemblyModel) -> Vec<f64> {
    let eta = model.eta();
    let pairs = eta.saturating_sub(2).max(1) as f64;

    let dirs = removal_directions(removal, model);
    let turns = dirs.windows(2).filter(|w| w[0] != w[1]).count();
    let difficulty = turns as f64 / pairs;

    let travel: f64 = removal.windows(2).map(|w| model.com_distance(w[0], w[1])).sum();
    let efficiency = travel / (pairs * model.max_com_distance());

    let targets = model.recovery_targets();
    let priority = if targets.is_empty() || eta < 3 {
        0.0
    } else {
        let k = targets.len() as f64;
        let mean = targets
            .iter()
            .map(|t| removal.iter().position(|p| p == t).expect("target is removable") as f64)
            .sum::<f64>()
            / k;
        (mean - (k - 1.0) / 2.0) / (eta - 1) as f64
    };
    vec![difficulty, efficiency, priority]
}

/// FNV-1a over the genes; seeds the inner assignment search so every
/// chromosome always gets the same allocation score.
pub fn chromosome_seed(order: &SequenceChromosome, salt: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt;
    for p in &order.0 {
        for byte in (p.0 as u64).to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Best assignment found by the short inner search, with its objectives.
pub fn inner_assignment(order: &SequenceChromosome, model: &AssemblyModel, salt: u64) -> (Vec<Arm>, ObjectiveVector) {
    let removal = order.removal_order();
    let problem = AssignmentProblem {
        model,
        removal: &removal,
    };
    let result = moga::evolve(&problem, &task::inner_config(chromosome_seed(order, salt)))
        .expect("assignment search always has a feasible start");
    let knee = moga::knee_point(&result.front).expect("nonempty front");
    let best = result.front[knee].clone();
    (best.genome, best.objectives)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SequenceConfig {
    pub ga: GaConfig,
}

pub struct SequenceProblem<'a> {
    pub model: &'a AssemblyModel,
    /// Mixed into every inner assignment seed.
    pub salt: u64,
}

impl Problem for SequenceProblem<'_> {
    type Genome = SequenceChromosome;

    fn objective_count(&self) -> usize {
        4
    }

    fn initialize(&self, n: usize, seed: u64, exec: Execution) -> Vec<SequenceChromosome> {
        initialize_population_with(self.model, n, seed, exec).unwrap_or_default()
    }

    fn is_feasible(&self, genome: &SequenceChromosome) -> bool {
        is_admissible(genome, self.model)
    }

    fn evaluate(&self, genome: &SequenceChromosome) -> ObjectiveVector {
        let removal = genome.removal_order();
        let (_, alloc) = inner_assignment(genome, self.model, self.salt);
        let mut f = sequence_terms(&removal, self.model);
        f.push(alloc.scalar());
        ObjectiveVector(f)
    }

    fn crossover(&self, a: &SequenceChromosome, b: &SequenceChromosome, rng: &mut ChaCha8Rng) -> SequenceChromosome {
        let n = a.len();
        let c1 = rng.random_range(0..n);
        let c2 = rng.random_range(c1 + 1..=n);
        SequenceChromosome(order_crossover(&a.0, &b.0, c1, c2))
    }

    fn mutate(&self, x: &SequenceChromosome, rate: f64, rng: &mut ChaCha8Rng) -> SequenceChromosome {
        SequenceChromosome(swap_mutation(&x.0, rate, rng))
    }
}

#[derive(Debug, Clone)]
pub struct SequenceOutcome {
    pub best: SequenceChromosome,
    pub objectives: ObjectiveVector,
    pub front: Vec<Individual<SequenceChromosome>>,
    pub trace: Vec<TraceRow>,
    pub evaluations: usize,
}

/// Searches admissible orders and returns the knee of the final front.
pub fn plan_sequence(model: &AssemblyModel, config: &SequenceConfig) -> Result<SequenceOutcome, SequenceError> {
    let problem = SequenceProblem {
        model,
        salt: config.ga.rng_seed,
    };
    let result = moga::evolve(&problem, &config.ga)?;
    let knee = moga::knee_point(&result.front).expect("nonempty front");
    let best = result.front[knee].clone();
    Ok(SequenceOutcome {
        best: best.genome,
        objectives: best.objectives,
        front: result.front,
        trace: result.trace,
        evaluations: result.evaluations,
    })
}
