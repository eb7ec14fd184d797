use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Instance, Resource, Schedule, ScheduleError, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Search nodes before the incumbent is returned as non-optimal.
    pub node_limit: u64,
    /// Optional wall-clock cap; makes results machine dependent.
    pub time_limit_ms: Option<u64>,
    /// Let disassemblies on different arms overlap.
    pub allow_parallel_s3: bool,
    /// Treat a non-optimal result as a timeout error.
    pub require_optimal: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            time_limit_ms: None,
            allow_parallel_s3: false,
            require_optimal: false,
        }
    }
}

/// Branch and bound over the orientation of conflicting exclusion pairs.
///
/// Each node schedules every task at its earliest start under the arcs
/// fixed so far. If two excluded tasks overlap, the node branches on which
/// goes first, the task of the earlier job (then stage) first. Nodes whose
/// bound cannot beat the incumbent are cut. The first optimum reached in
/// this order is returned, so ties favor earlier jobs going first.
pub fn solve(inst: &Instance, config: &SolverConfig) -> Result<Schedule, ScheduleError> {
    if inst.is_empty() {
        return Ok(Schedule {
            starts: Vec::new(),
            makespan_ms: 0,
            optimal: true,
            nodes: 0,
        });
    }
    let mut search = Search::new(inst, config)?;
    search.branch();
    let (makespan_ms, starts) = search.best.expect("the first dive always reaches a leaf");
    Ok(Schedule {
        starts,
        makespan_ms,
        optimal: !search.aborted,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    succ: Vec<Vec<usize>>,
    /// Exclusion pairs not already ordered by the fixed arcs.
    open_pairs: Vec<(usize, usize)>,
    cliques: Vec<Vec<usize>>,
    best: Option<(u64, Vec<u64>)>,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    aborted: bool,
    head: Vec<u64>,
    tail: Vec<u64>,
    order: Vec<usize>,
    indegree: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, config: &SolverConfig) -> Result<Self, ScheduleError> {
        let n = inst.len();
        for (k, t) in inst.tasks.iter().enumerate() {
            if t.id != k {
                return Err(ScheduleError::InconsistentPlan(format!("task at position {k} has id {}", t.id)));
            }
            if t.duration_ms == 0 {
                return Err(ScheduleError::ZeroDuration(k));
            }
        }
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in &inst.arcs {
            if a >= n || b >= n {
                return Err(ScheduleError::InconsistentPlan(format!("arc {a}->{b} out of range")));
            }
            succ[a].push(b);
        }
        let mut s = Self {
            inst,
            succ,
            open_pairs: Vec::new(),
            cliques: Vec::new(),
            best: None,
            nodes: 0,
            node_limit: config.node_limit,
            deadline: config.time_limit_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
            aborted: false,
            head: vec![0; n],
            tail: vec![0; n],
            order: Vec::with_capacity(n),
            indegree: vec![0; n],
        };
        if !s.propagate() {
            return Err(ScheduleError::CyclicPrecedence);
        }
        let reach = s.reachability();
        let mut pairs: Vec<(usize, usize)> = inst
            .exclusions
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .chain(same_resource_pairs(inst))
            .filter(|&(a, b)| a != b && !reach[a][b] && !reach[b][a])
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        s.open_pairs = pairs;
        s.cliques = cliques(inst);
        Ok(s)
    }

    fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.inst.len();
        let mut reach = vec![vec![false; n]; n];
        for &u in self.order.iter().rev() {
            for &v in &self.succ[u] {
                reach[u][v] = true;
                for w in 0..n {
                    if reach[v][w] {
                        reach[u][w] = true;
                    }
                }
            }
        }
        reach
    }

    /// Heads and tails under the current arcs; false on a cycle.
    fn propagate(&mut self) -> bool {
        let n = self.inst.len();
        self.indegree.iter_mut().for_each(|d| *d = 0);
        for list in &self.succ {
            for &v in list {
                self.indegree[v] += 1;
            }
        }
        self.order.clear();
        self.order.extend((0..n).filter(|&v| self.indegree[v] == 0));
        let mut i = 0;
        while i < self.order.len() {
            let u = self.order[i];
            for &v in &self.succ[u] {
                self.indegree[v] -= 1;
                if self.indegree[v] == 0 {
                    self.order.push(v);
                }
            }
            i += 1;
        }
        if self.order.len() < n {
            return false;
        }
        let d = |k: usize| self.inst.tasks[k].duration_ms;
        self.head.iter_mut().for_each(|h| *h = 0);
        for &u in &self.order {
            let end = self.head[u] + d(u);
            for &v in &self.succ[u] {
                self.head[v] = self.head[v].max(end);
            }
        }
        for &u in self.order.iter().rev() {
            self.tail[u] = self.succ[u].iter().map(|&v| d(v) + self.tail[v]).max().unwrap_or(0);
        }
        true
    }

    fn makespan(&self) -> u64 {
        (0..self.inst.len()).map(|k| self.head[k] + self.inst.tasks[k].duration_ms).max().unwrap_or(0)
    }

    fn lower_bound(&self) -> u64 {
        let mut lb = self.makespan();
        for c in &self.cliques {
            let h = c.iter().map(|&k| self.head[k]).min().unwrap_or(0);
            let t = c.iter().map(|&k| self.tail[k]).min().unwrap_or(0);
            let sum: u64 = c.iter().map(|&k| self.inst.tasks[k].duration_ms).sum();
            lb = lb.max(h + sum + t);
        }
        lb
    }

    /// Overlapping open pair whose earlier task starts first.
    fn conflict(&self) -> Option<(usize, usize)> {
        let d = |k: usize| self.inst.tasks[k].duration_ms;
        self.open_pairs
            .iter()
            .copied()
            .filter(|&(a, b)| self.head[a] < self.head[b] + d(b) && self.head[b] < self.head[a] + d(a))
            .min_by_key(|&(a, b)| (self.head[a].min(self.head[b]), a, b))
    }

    fn out_of_budget(&mut self) -> bool {
        if self.best.is_none() {
            return false;
        }
        if self.nodes >= self.node_limit || self.deadline.is_some_and(|t| Instant::now() >= t) {
            self.aborted = true;
        }
        self.aborted
    }

    fn branch(&mut self) {
        self.nodes += 1;
        if !self.propagate() {
            return;
        }
        if let Some((best, _)) = &self.best {
            if self.lower_bound() >= *best {
                return;
            }
        }
        let Some((a, b)) = self.conflict() else {
            let ms = self.makespan();
            if self.best.as_ref().is_none_or(|(best, _)| ms < *best) {
                self.best = Some((ms, self.head.clone()));
            }
            return;
        };
        for (first, second) in [(a, b), (b, a)] {
            if self.out_of_budget() {
                return;
            }
            self.succ[first].push(second);
            self.branch();
            self.succ[first].pop();
        }
    }
}

fn same_resource_pairs(inst: &Instance) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            if inst.tasks[a].resource == inst.tasks[b].resource {
                out.push((a, b));
            }
        }
    }
    out
}

/// Task sets that must run one at a time: the stage turns with every
/// disassembly, and per arm the stage turns with that arm's tool changes
/// and disassemblies. Sets are only used if they really are pairwise
/// exclusive in `inst`.
fn cliques(inst: &Instance) -> Vec<Vec<usize>> {
    let of = |pred: &dyn Fn(Stage, Resource) -> bool| -> Vec<usize> {
        inst.tasks.iter().filter(|t| pred(t.stage, t.resource)).map(|t| t.id).collect()
    };
    let candidates = vec![
        of(&|s, _| s != Stage::ToolChange),
        of(&|s, r| s == Stage::PoseAdjust || r.arm() == Some(crate::model::Arm::One)),
        of(&|s, r| s == Stage::PoseAdjust || r.arm() == Some(crate::model::Arm::Two)),
    ];
    let mut exclusive = std::collections::HashSet::new();
    for &(a, b) in &inst.exclusions {
        exclusive.insert((a.min(b), a.max(b)));
    }
    for (a, b) in same_resource_pairs(inst) {
        exclusive.insert((a, b));
    }
    candidates
        .into_iter()
        .filter(|c| c.len() > 1)
        .filter(|c| {
            c.iter()
                .enumerate()
                .all(|(i, &a)| c[i + 1..].iter().all(|&b| exclusive.contains(&(a.min(b), a.max(b)))))
        })
        .collect()
}
