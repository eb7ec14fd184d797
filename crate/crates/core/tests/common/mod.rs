#![allow(dead_code)]

use disasm_core::model::ModelBuilder;
use disasm_core::schedule::{Instance, SchedTask, Schedule};
use disasm_core::{AssemblyModel, Direction, PartId, PartKind, TaskKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small model with random relations: any mix of part kinds, a random
/// constraint DAG (lower id before higher), random contacts and blocking.
pub fn random_model(eta: usize, seed: u64) -> AssemblyModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut b = ModelBuilder::new();
        let mut ids = Vec::new();
        let mut is_fast = Vec::new();
        let base_slot = rng.random_range(0..eta);
        for slot in 0..eta {
            let com = [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), rng.random_range(0.0..100.0)];
            let mut fastener = false;
            let id = if slot == base_slot {
                b.part(PartKind::Base, TaskKind::Grasp, com, &[], [vec![], vec![]], None)
            } else {
                let dirs: Vec<Direction> = Direction::ALL.iter().copied().filter(|_| rng.random_bool(0.35)).collect();
                let dirs = if dirs.is_empty() { vec![Direction::PosZ] } else { dirs };
                if rng.random_bool(0.4) {
                    fastener = true;
                    b.part(PartKind::Screw, TaskKind::ScrewRemoval, com, &dirs, [vec![0.0], vec![0.0]], Some(dirs[0].unit()))
                } else {
                    let task = if rng.random_bool(0.5) { TaskKind::Grasp } else { TaskKind::Suction };
                    b.part(PartKind::Regular, task, com, &dirs, [vec![0.0, 90.0], vec![180.0]], None)
                }
            };
            ids.push(id);
            is_fast.push(fastener);
        }
        for i in 0..eta {
            for j in i + 1..eta {
                if rng.random_bool(0.4) {
                    b.contact(ids[i], ids[j]);
                }
                if is_fast[i] != is_fast[j] && rng.random_bool(0.3) {
                    b.connect(ids[i], ids[j]);
                }
                if i != base_slot && j != base_slot && rng.random_bool(0.2) {
                    b.constrain(ids[i], ids[j]);
                }
            }
        }
        for i in 0..eta {
            for j in 0..eta {
                if i != j && i != base_slot && rng.random_bool(0.2) {
                    let d = Direction::ALL[rng.random_range(0..6)];
                    b.interfere(ids[i], ids[j], d);
                }
            }
        }
        if let Ok(m) = b.build() {
            return m;
        }
    }
}

/// All permutations of `items`, in lexicographic position order.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    fn go<T: Clone>(v: &mut Vec<T>, k: usize, out: &mut Vec<Vec<T>>) {
        if k == v.len() {
            out.push(v.clone());
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            go(v, k + 1, out);
            v.swap(k, i);
        }
    }
    let mut out = Vec::new();
    go(&mut items.to_vec(), 0, &mut out);
    out
}

/// Independent replay straight off the relation matrices.
/// Returns (feasible, stable).
pub fn replay_oracle(model: &AssemblyModel, removal: &[PartId]) -> (bool, bool) {
    let n = model.eta();
    let rel = model.relations();
    let mut present = vec![true; n];
    let mut feasible = true;
    let mut stable = true;
    for &p in removal {
        let i = p.0 - 1;
        if feasible {
            let constrained = (0..n).any(|u| present[u] && rel.constraint.get(u, i));
            let fastened = !model.part(p).label.kind.is_fastener()
                && (0..n).any(|f| present[f] && model.parts()[f].label.kind.is_fastener() && rel.connection.get(f, i));
            let free = model.part(p).geometry.removal_directions.iter().any(|&d| {
                (0..n).all(|v| !present[v] || !rel.interferes(p, PartId(v + 1), d))
            });
            if constrained || fastened || !free {
                feasible = false;
            }
        }
        present[i] = false;
        if stable {
            // Union-find over contact and connection among present parts.
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(parent: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while parent[r] != r {
                    r = parent[r];
                }
                parent[x] = r;
                r
            }
            for u in 0..n {
                for v in 0..n {
                    if present[u] && present[v] && (rel.contact.get(u, v) || rel.connection.get(u, v)) {
                        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                        parent[a] = b;
                    }
                }
            }
            let base = model.base().0 - 1;
            let root = find(&mut parent, base);
            if (0..n).any(|u| present[u] && find(&mut parent, u) != root) {
                stable = false;
            }
        }
    }
    (feasible, stable)
}

pub fn overlap(inst: &Instance, s: &Schedule, a: usize, b: usize) -> bool {
    s.starts[a] < s.end(inst, b) && s.starts[b] < s.end(inst, a)
}

/// Checks the exclusion classes from the task attributes alone.
pub fn class_violations(inst: &Instance, s: &Schedule, parallel_s3: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            let (ta, tb) = (&inst.tasks[a], &inst.tasks[b]);
            let arm = |t: &SchedTask| t.resource.arm();
            let stages = (ta.stage as u8).min(tb.stage as u8) * 10 + (ta.stage as u8).max(tb.stage as u8);
            let banned = ta.resource == tb.resource
                || stages == 23
                || stages == 12
                || (stages == 13 && arm(ta) == arm(tb))
                || (stages == 33 && !parallel_s3);
            if banned && overlap(inst, s, a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn left_shifted(inst: &Instance, s: &Schedule) -> bool {
    (0..inst.len()).all(|k| {
        let start = s.starts[k];
        start == 0
            || inst.arcs.iter().any(|&(a, b)| b == k && s.end(inst, a) == start)
            || inst.exclusions.iter().any(|&(a, b)| {
                let other = if a == k { b } else if b == k { a } else { return false };
                s.starts[other] < start && s.end(inst, other) == start
            })
    })
}

pub fn stage3_in_removal_order(inst: &Instance, s: &Schedule) -> bool {
    let d = inst.disassembly_tasks();
    d.windows(2).all(|w| inst.tasks[w[0]].job < inst.tasks[w[1]].job && s.starts[w[0]] < s.starts[w[1]])
}
