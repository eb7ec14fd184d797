use super::{Instance, Schedule, ScheduleError};

pub const ORACLE_MAX_TASKS: usize = 6;

/// Tries every orientation of every exclusion and same-resource pair and
/// keeps the shortest earliest-start schedule. Meant for cross-checking
/// [`super::solve`] on tiny instances.
pub fn oracle_solve(inst: &Instance, horizon_ms: u64) -> Result<Schedule, ScheduleError> {
    let n = inst.len();
    if n > ORACLE_MAX_TASKS {
        return Err(ScheduleError::TooLarge {
            max: ORACLE_MAX_TASKS,
            got: n,
        });
    }
    let mut pairs: Vec<(usize, usize)> = inst.exclusions.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for a in 0..n {
        for b in a + 1..n {
            if inst.tasks[a].resource == inst.tasks[b].resource {
                pairs.push((a, b));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let mut best: Option<(u64, Vec<u64>)> = None;
    let mut any_acyclic = false;
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut arcs = inst.arcs.clone();
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            arcs.push(if mask >> bit & 1 == 0 { (a, b) } else { (b, a) });
        }
        let Some(starts) = longest_paths(inst, &arcs) else {
            continue;
        };
        any_acyclic = true;
        let ms = (0..n).map(|k| starts[k] + inst.tasks[k].duration_ms).max().unwrap_or(0);
        if best.as_ref().is_none_or(|(b, _)| ms < *b) {
            best = Some((ms, starts));
        }
    }
    if n > 0 && !any_acyclic {
        return Err(ScheduleError::CyclicPrecedence);
    }
    let (makespan_ms, starts) = best.unwrap_or((0, Vec::new()));
    if makespan_ms > horizon_ms {
        return Err(ScheduleError::HorizonExceeded { horizon_ms });
    }
    Ok(Schedule {
        starts,
        makespan_ms,
        optimal: true,
        nodes: 0,
    })
}

/// Earliest starts by repeated relaxation; `None` on a cycle.
fn longest_paths(inst: &Instance, arcs: &[(usize, usize)]) -> Option<Vec<u64>> {
    let n = inst.len();
    let mut start = vec![0u64; n];
    for round in 0..=n {
        let mut changed = false;
        for &(a, b) in arcs {
            let end = start[a] + inst.tasks[a].duration_ms;
            if end > start[b] {
                start[b] = end;
                changed = true;
            }
        }
        if !changed {
            return Some(start);
        }
        if round == n {
            break;
        }
    }
    None
}
