//! Built-in assemblies: the seven-part plate/screw example and a procedural
//! generator of layered plate assemblies used as the benchmark corpus.
//!
//! Generated cells assume arm 1 stands on the +Y side of the rotary stage
//! and arm 2 on the -Y side. Parts extracted upward can be handled at any
//! stage angle; parts extracted sideways must be turned toward the arm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{normalize_angle, Arm, AssemblyModel, Direction, ModelBuilder, PartId, PartKind, TaskKind};
use crate::schedule::JobSpec;

/// Azimuth of each arm around the stage, degrees.
pub const ARM_AZIMUTH: [f64; 2] = [90.0, 270.0];

const GRID: [f64; 8] = [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0];

/// Seven parts: screws P1–P4, plates P5 and P7, base P6. P5 is held by
/// P3/P4, P7 by P1/P2, and P5 lies over P7 and its screws. Everything is
/// extracted along +Y, so the screw heads point sideways.
pub fn fig3() -> AssemblyModel {
    let mut b = ModelBuilder::new();
    let screw = |b: &mut ModelBuilder, com: [f64; 3]| {
        b.part(
            PartKind::Screw,
            TaskKind::ScrewRemoval,
            com,
            &[Direction::PosY],
            [vec![90.0], vec![90.0]],
            Some([0.0, 1.0, 0.0]),
        )
    };
    let p1 = screw(&mut b, [30.0, 22.0, 10.0]);
    let p2 = screw(&mut b, [50.0, 22.0, -10.0]);
    let p3 = screw(&mut b, [-50.0, 35.0, 10.0]);
    let p4 = screw(&mut b, [-50.0, 35.0, -10.0]);
    let p5 = b.part(
        PartKind::Regular,
        TaskKind::Suction,
        [0.0, 30.0, 0.0],
        &[Direction::PosY],
        [vec![0.0], vec![0.0]],
        None,
    );
    let p6 = b.part(PartKind::Base, TaskKind::Grasp, [0.0, 0.0, 0.0], &[], [vec![], vec![]], None);
    let p7 = b.part(
        PartKind::Regular,
        TaskKind::Grasp,
        [40.0, 15.0, 0.0],
        &[Direction::PosY],
        [vec![0.0], vec![0.0]],
        None,
    );
    b.contact(p6, p5).contact(p6, p7);
    for (s, plate) in [(p1, p7), (p2, p7), (p3, p5), (p4, p5)] {
        b.connect(s, plate).connect(s, p6);
        b.interfere(plate, s, Direction::PosY);
    }
    for covered in [p1, p2, p7] {
        b.constrain(p5, covered).interfere(covered, p5, Direction::PosY);
    }
    b.target(p7);
    b.build().expect("fig3 fixture is valid")
}

/// Parameters of a generated corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusEntry {
    pub eta: usize,
    pub seed: u64,
}

/// Number of models in the shipped corpus.
pub const CORPUS_SIZE: usize = 30;

/// Part counts spread evenly over 12..=60.
pub fn corpus_entry(i: usize) -> CorpusEntry {
    CorpusEntry {
        eta: 12 + 48 * i / (CORPUS_SIZE - 1),
        seed: 1000 + i as u64,
    }
}

pub fn corpus() -> Vec<AssemblyModel> {
    (0..CORPUS_SIZE)
        .map(|i| {
            let e = corpus_entry(i);
            generate(e.eta, e.seed)
        })
        .collect()
}

struct Plate {
    id: PartId,
    fasteners: Vec<PartId>,
}

struct Column {
    dir: Direction,
    anchor: [f64; 3],
    plates: Vec<Plate>,
}

/// Layered plate assembly with exactly `eta` parts (`eta >= 3`).
///
/// Plates are stacked in columns on the top face and on the side faces of
/// the base. Each plate touches the part beneath it and is fastened to it;
/// a plate also covers the part beneath it and, at random, some of that
/// part's fasteners. The deepest plate of the tallest top column is marked
/// as the recovery target.
pub fn generate(eta: usize, seed: u64) -> AssemblyModel {
    assert!(eta >= 3, "a generated assembly needs a base, a plate and a fastener");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = ModelBuilder::new();
    let base = b.part(PartKind::Base, TaskKind::Grasp, [0.0, 0.0, 50.0], &[], [vec![], vec![]], None);

    let n_top = (eta / 12).clamp(1, 4);
    let spots = [[-90.0, -90.0], [90.0, 90.0], [-90.0, 90.0], [90.0, -90.0]];
    let mut columns: Vec<Column> = spots[..n_top]
        .iter()
        .map(|xy| Column {
            dir: Direction::PosZ,
            anchor: [xy[0], xy[1], 100.0],
            plates: Vec::new(),
        })
        .collect();
    let side_dirs = [Direction::PosX, Direction::NegX, Direction::PosY, Direction::NegY];
    let n_side = (eta / 15).min(4);
    for &d in &side_dirs[..n_side] {
        let u = d.unit();
        columns.push(Column {
            dir: d,
            anchor: [u[0] * 150.0, u[1] * 150.0, 50.0],
            plates: Vec::new(),
        });
    }

    let mut budget = eta - 1;
    while budget >= 2 {
        // Side columns stay shallow; top columns take the rest.
        let ci = loop {
            let c = rng.random_range(0..columns.len());
            if columns[c].dir == Direction::PosZ || columns[c].plates.len() < 2 {
                break c;
            }
        };
        let n_fast = rng.random_range(1..=3).min(budget - 1);
        add_plate(&mut b, &mut rng, &mut columns[ci], base, n_fast);
        budget -= 1 + n_fast;
    }
    if budget == 1 {
        let ci = columns.iter().position(|c| !c.plates.is_empty()).expect("at least one plate");
        let col = &mut columns[ci];
        let below = col.plates.len().checked_sub(2).map_or(base, |i| col.plates[i].id);
        let plate = col.plates.last().expect("nonempty").id;
        let f = add_fastener(&mut b, &mut rng, col.dir, &plate_com(col), plate, below, 3);
        col.plates.last_mut().expect("nonempty").fasteners.push(f);
    }

    let target = columns
        .iter()
        .filter(|c| c.dir == Direction::PosZ)
        .max_by_key(|c| c.plates.len())
        .and_then(|c| c.plates.first())
        .map(|p| p.id);
    if let Some(t) = target {
        b.target(t);
    }
    debug_assert_eq!(b.len(), eta);
    b.build().expect("generated assembly is valid")
}

fn plate_com(col: &Column) -> [f64; 3] {
    let level = col.plates.len().saturating_sub(1) as f64;
    let u = col.dir.unit();
    let step = 12.0 * level + 6.0;
    [col.anchor[0] + u[0] * step, col.anchor[1] + u[1] * step, col.anchor[2] + u[2] * step]
}

fn handling(dir: Direction) -> [Vec<f64>; 2] {
    if dir == Direction::PosZ {
        return [GRID.to_vec(), GRID.to_vec()];
    }
    let u = dir.unit();
    let azimuth = u[1].atan2(u[0]).to_degrees();
    [
        vec![normalize_angle(ARM_AZIMUTH[0] - azimuth)],
        vec![normalize_angle(ARM_AZIMUTH[1] - azimuth)],
    ]
}

fn add_plate(b: &mut ModelBuilder, rng: &mut ChaCha8Rng, col: &mut Column, base: PartId, n_fast: usize) {
    let below = col.plates.last().map_or(base, |p| p.id);
    let task = if rng.random_bool(0.6) {
        TaskKind::Grasp
    } else {
        TaskKind::Suction
    };
    let jitter = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
    col.plates.push(Plate {
        id: PartId(0),
        fasteners: Vec::new(),
    });
    let mut com = plate_com(col);
    match col.dir {
        Direction::PosZ | Direction::NegZ => {
            com[0] += jitter[0];
            com[1] += jitter[1];
        }
        Direction::PosX | Direction::NegX => {
            com[1] += jitter[0];
            com[2] += jitter[1];
        }
        Direction::PosY | Direction::NegY => {
            com[0] += jitter[0];
            com[2] += jitter[1];
        }
    }
    let plate = b.part(PartKind::Regular, task, com, &[col.dir], handling(col.dir), None);
    b.contact(plate, below);
    if below != base {
        b.constrain(plate, below).interfere(below, plate, col.dir);
        let prev = &col.plates[col.plates.len() - 2];
        for &f in &prev.fasteners {
            if rng.random_bool(0.6) {
                b.constrain(plate, f).interfere(f, plate, col.dir);
            }
        }
    }
    let mut fasteners = Vec::with_capacity(n_fast);
    for k in 0..n_fast {
        fasteners.push(add_fastener(b, rng, col.dir, &com, plate, below, k));
    }
    *col.plates.last_mut().expect("just pushed") = Plate { id: plate, fasteners };
}

fn add_fastener(
    b: &mut ModelBuilder,
    rng: &mut ChaCha8Rng,
    dir: Direction,
    plate_com: &[f64; 3],
    plate: PartId,
    below: PartId,
    slot: usize,
) -> PartId {
    let u = dir.unit();
    let corner = [[30.0, 30.0], [-30.0, -30.0], [30.0, -30.0], [-30.0, 30.0]][slot % 4];
    let mut com = [plate_com[0] + u[0] * 4.0, plate_com[1] + u[1] * 4.0, plate_com[2] + u[2] * 4.0];
    let (i, j) = match dir {
        Direction::PosZ | Direction::NegZ => (0, 1),
        Direction::PosX | Direction::NegX => (1, 2),
        Direction::PosY | Direction::NegY => (0, 2),
    };
    com[i] += corner[0];
    com[j] += corner[1];
    let roll: f64 = rng.random();
    let kind = if roll < 0.7 {
        PartKind::Screw
    } else if roll < 0.9 {
        PartKind::Bolt
    } else {
        PartKind::Nut
    };
    let f = b.part(kind, TaskKind::ScrewRemoval, com, &[dir], handling(dir), Some(u));
    b.connect(f, plate).connect(f, below);
    b.interfere(plate, f, dir);
    f
}

/// Random job list with at most `max_tasks` scheduled tasks. Durations
/// are whole half-seconds between 0.5 s and 10 s.
pub fn random_jobs(seed: u64, max_tasks: usize) -> Vec<JobSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    let mut used = 0;
    let dur = |rng: &mut ChaCha8Rng| 500 * rng.random_range(1..=20u64);
    while used < max_tasks {
        let arm = if rng.random_bool(0.5) { Arm::One } else { Arm::Two };
        let mut budget = max_tasks - used - 1;
        let toolchange_ms = (budget > 0 && rng.random_bool(0.45)).then(|| dur(&mut rng));
        budget -= usize::from(toolchange_ms.is_some());
        let pose_adjust_ms = (budget > 0 && rng.random_bool(0.45)).then(|| dur(&mut rng));
        let disassembly_ms = dur(&mut rng);
        used += 1 + usize::from(toolchange_ms.is_some()) + usize::from(pose_adjust_ms.is_some());
        jobs.push(JobSpec {
            arm,
            toolchange_ms,
            pose_adjust_ms,
            disassembly_ms,
            part: None,
        });
        if rng.random_bool(0.25) {
            break;
        }
    }
    jobs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_counts() {
        let m = fig3();
        assert_eq!(m.eta(), 7);
        assert_eq!(m.fastener_count(), 4);
        assert_eq!(m.base(), PartId(6));
    }

    #[test]
    fn generator_hits_exact_size() {
        for eta in [3, 4, 5, 12, 20, 33, 60] {
            for seed in 0..5 {
                let m = generate(eta, seed);
                assert_eq!(m.eta(), eta);
                assert!(m.has_constraints() || eta < 8);
            }
        }
    }

    #[test]
    fn random_jobs_respect_task_cap() {
        for seed in 0..200 {
            let jobs = random_jobs(seed, 6);
            let tasks: usize = jobs
                .iter()
                .map(|j| 1 + usize::from(j.toolchange_ms.is_some()) + usize::from(j.pose_adjust_ms.is_some()))
                .sum();
            assert!((1..=6).contains(&tasks));
        }
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(generate(40, 7).to_json(), generate(40, 7).to_json());
        assert_ne!(generate(40, 7).to_json(), generate(40, 8).to_json());
    }
}
