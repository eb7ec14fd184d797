use disasm_core::ccc::initialize_population;
use disasm_core::model::ModelBuilder;
use disasm_core::moga::GaConfig;
use disasm_core::task::{eval_assignment, plan_tasks, TaskConfig, TaskError};
use disasm_core::{fixtures, Arm, AssemblyModel, Direction, PartId, PartKind, TaskKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Direct transcription of the three counts over the raw model.
fn oracle(removal: &[PartId], arms: &[Arm], m: &AssemblyModel) -> [f64; 3] {
    let eta = m.eta() as f64;
    let com = |p: PartId| m.part(p).geometry.center_of_mass;
    let dist = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    let mut fmax: f64 = 0.0;
    for a in m.parts() {
        for b in m.parts() {
            fmax = fmax.max(dist(a.geometry.center_of_mass, b.geometry.center_of_mass));
        }
    }
    let n = removal.len();
    let mut lonely = 0;
    for k in 0..n {
        let left = k > 0 && arms[k - 1] != arms[k];
        let right = k + 1 < n && arms[k + 1] != arms[k];
        if !left && !right {
            lonely += 1;
        }
    }
    let (mut changes, mut travel) = (0, 0.0);
    for arm in [Arm::One, Arm::Two] {
        let mine: Vec<PartId> = (0..n).filter(|&k| arms[k] == arm).map(|k| removal[k]).collect();
        for w in mine.windows(2) {
            if m.part(w[0]).label.tool != m.part(w[1]).label.tool {
                changes += 1;
            }
            travel += dist(com(w[0]), com(w[1]));
        }
    }
    [lonely as f64 / eta, changes as f64 / (eta - 1.0), travel / (eta * fmax)]
}

fn random_arms(n: usize, rng: &mut ChaCha8Rng) -> Vec<Arm> {
    (0..n).map(|_| if rng.random_bool(0.5) { Arm::One } else { Arm::Two }).collect()
}

fn flip(arms: &[Arm]) -> Vec<Arm> {
    arms.iter().map(|a| a.other()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn objectives_match_oracle_and_stay_bounded(idx in 0usize..fixtures::CORPUS_SIZE, seed in 0u64..1000) {
        let e = fixtures::corpus_entry(idx);
        let m = fixtures::generate(e.eta, e.seed);
        let removal = initialize_population(&m, 1, seed).unwrap()[0].removal_order();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arms = random_arms(removal.len(), &mut rng);
        let f = eval_assignment(&removal, &arms, &m).unwrap().0;
        let want = oracle(&removal, &arms, &m);
        for (x, y) in f.iter().zip(want) {
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(x));
        }
        // Relabeling the arms changes nothing.
        prop_assert_eq!(eval_assignment(&removal, &flip(&arms), &m).unwrap().0, f);
    }
}

#[test]
fn length_mismatch_is_reported() {
    let m = fixtures::fig3();
    let removal: Vec<PartId> = [3, 4, 5, 1, 2, 7].map(PartId).to_vec();
    assert_eq!(
        eval_assignment(&removal, &[Arm::One; 5], &m),
        Err(TaskError::LengthMismatch { expected: 6, got: 5 })
    );
}

fn small_ga(seed: u64) -> TaskConfig {
    TaskConfig {
        ga: GaConfig {
            population_size: 40,
            generations: 60,
            rng_seed: seed,
            ..GaConfig::default()
        },
    }
}

#[test]
fn ga_beats_best_of_thousand_random_assignments() {
    let e = fixtures::corpus_entry(0);
    assert_eq!(e.eta, 12);
    let m = fixtures::generate(e.eta, e.seed);
    for seed in 0..3u64 {
        let removal = initialize_population(&m, 1, seed).unwrap()[0].removal_order();
        let out = plan_tasks(&removal, &m, &small_ga(seed)).unwrap();
        assert_eq!(out.plan.removal_order(), removal);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let best_random = (0..1000)
            .map(|_| eval_assignment(&removal, &random_arms(removal.len(), &mut rng), &m).unwrap().scalar())
            .fold(f64::INFINITY, f64::min);
        assert!(out.objectives.scalar() <= best_random + 1e-12, "{} > {best_random}", out.objectives.scalar());
    }
}

#[test]
fn single_task_takes_the_better_arm() {
    let mut b = ModelBuilder::new();
    let base = b.part(PartKind::Base, TaskKind::Grasp, [0.0; 3], &[], [vec![], vec![]], None);
    let s = b.part(PartKind::Screw, TaskKind::ScrewRemoval, [0.0, 0.0, 5.0], &[Direction::PosZ], [vec![0.0], vec![0.0]], Some([0.0, 0.0, 1.0]));
    b.connect(s, base);
    let m = b.build().unwrap();
    let out = plan_tasks(&[s], &m, &small_ga(0)).unwrap();
    let both = [Arm::One, Arm::Two].map(|a| eval_assignment(&[s], &[a], &m).unwrap().scalar());
    assert_eq!(out.objectives.scalar(), both[0].min(both[1]));
}

#[test]
fn single_tool_model_never_changes_tools() {
    let mut b = ModelBuilder::new();
    let base = b.part(PartKind::Base, TaskKind::Grasp, [0.0; 3], &[], [vec![], vec![]], None);
    let mut screws = Vec::new();
    for i in 0..8 {
        let s = b.part(
            PartKind::Screw,
            TaskKind::ScrewRemoval,
            [10.0 * i as f64, 0.0, 5.0],
            &[Direction::PosZ],
            [vec![0.0], vec![0.0]],
            Some([0.0, 0.0, 1.0]),
        );
        b.connect(s, base);
        screws.push(s);
    }
    let m = b.build().unwrap();
    let out = plan_tasks(&screws, &m, &small_ga(4)).unwrap();
    assert_eq!(out.objectives.0[1], 0.0);
    for member in &out.front {
        assert_eq!(member.objectives.0[1], 0.0);
    }
}
