mod common;

use disasm_core::ccc::{initialize_population, SequenceChromosome};
use disasm_core::model::ModelBuilder;
use disasm_core::moga::GaConfig;
use disasm_core::sequence::{
    admissible_orders, check_feasible, check_stable, eval_sequence, is_admissible, plan_sequence, verdict,
    SequenceConfig,
};
use disasm_core::{fixtures, Arm, Direction, Execution, PartId, PartKind, TaskKind};
use proptest::prelude::*;

fn order(removal: &[usize]) -> SequenceChromosome {
    SequenceChromosome::from_removal_order(removal.iter().map(|&x| PartId(x)).collect())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn fig3_objective_table() {
    let m = fixtures::fig3();
    let fmax = 10569f64.sqrt();
    let arm1 = vec![Arm::One; 6];
    let cases = [
        ([3, 4, 5, 1, 2, 7], 20.0 + 2625f64.sqrt() + 1064f64.sqrt() + 800f64.sqrt() + 249f64.sqrt()),
        ([3, 4, 5, 2, 1, 7], 20.0 + 2625f64.sqrt() + 2664f64.sqrt() + 800f64.sqrt() + 249f64.sqrt()),
    ];
    for (removal, travel) in cases {
        let f = eval_sequence(&order(&removal), &arm1, &m).unwrap().0;
        assert!(close(f[0], 0.0), "difficulty {}", f[0]);
        assert!(close(f[1], travel / (5.0 * fmax)), "efficiency {}", f[1]);
        assert!(close(f[2], 5.0 / 6.0), "priority {}", f[2]);
        // All on one arm: every task is lonely; screw, suction, screw and
        // gripper runs give three tool changes.
        let alloc = (6.0 / 7.0 + 3.0 / 6.0 + travel / (7.0 * fmax)) / 3.0;
        assert!(close(f[3], alloc), "allocation {}", f[3]);
    }
}

#[test]
fn fig3_admissible_set_is_the_linear_extensions() {
    let m = fixtures::fig3();
    let ids: Vec<PartId> = (1..=7).filter(|&i| i != 6).map(PartId).collect();
    let mut brute: Vec<Vec<PartId>> = common::permutations(&ids)
        .into_iter()
        .filter(|r| common::replay_oracle(&m, r) == (true, true))
        .collect();
    brute.sort();
    let mut dfs = admissible_orders(&m, usize::MAX);
    dfs.sort();
    assert_eq!(dfs, brute);
    assert_eq!(brute.len(), 4);
}

/// Base, then a chain of plates each resting on the previous one. Only
/// top-down removal keeps the rest attached.
fn chain(len: usize) -> disasm_core::AssemblyModel {
    let mut b = ModelBuilder::new();
    let mut prev = b.part(PartKind::Base, TaskKind::Grasp, [0.0, 0.0, 0.0], &[], [vec![], vec![]], None);
    for i in 0..len {
        let p = b.part(
            PartKind::Regular,
            TaskKind::Grasp,
            [0.0, 0.0, 10.0 * (i + 1) as f64],
            &[Direction::PosZ],
            [vec![0.0], vec![0.0]],
            None,
        );
        b.contact(prev, p);
        prev = p;
    }
    b.build().unwrap()
}

#[test]
fn unique_admissible_order_is_found() {
    let m = chain(5);
    let only = admissible_orders(&m, usize::MAX);
    assert_eq!(only, vec![(2..=6).rev().map(PartId).collect::<Vec<_>>()]);
    let ga = GaConfig {
        population_size: 12,
        generations: 5,
        rng_seed: 3,
        execution: Execution::Sequential,
        ..GaConfig::default()
    };
    let out = plan_sequence(&m, &SequenceConfig { ga }).unwrap();
    assert_eq!(out.best.removal_order(), only[0]);
}

#[test]
fn fig3_plan_respects_precedence() {
    let m = fixtures::fig3();
    let ga = GaConfig { population_size: 16, generations: 8, rng_seed: 1, ..GaConfig::default() };
    let out = plan_sequence(&m, &SequenceConfig { ga }).unwrap();
    for member in &out.front {
        assert!(is_admissible(&member.genome, &m));
        let r = member.genome.removal_order();
        let pos = |p: usize| r.iter().position(|&q| q == PartId(p)).unwrap();
        assert!(pos(3) < pos(5) && pos(4) < pos(5));
        assert!(pos(5) < pos(1) && pos(5) < pos(2) && pos(5) < pos(7));
        assert!(pos(1) < pos(7) && pos(2) < pos(7));
    }
    assert!(out.front.iter().any(|i| i.genome == out.best));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verdict_matches_replay_oracle(eta in 2usize..7, seed in 0u64..100_000, pick in any::<prop::sample::Index>()) {
        let m = common::random_model(eta, seed);
        let ids: Vec<PartId> = m.removable_parts();
        let perms = common::permutations(&ids);
        let r = pick.get(&perms);
        let c = SequenceChromosome::from_removal_order(r.clone());
        let (f, s) = common::replay_oracle(&m, r);
        prop_assert_eq!(check_feasible(&c, &m), f);
        prop_assert_eq!(check_stable(&c, &m), s);
        let v = verdict(&c, &m);
        prop_assert_eq!(v.admissible(), f && s);
        prop_assert_eq!(v.first_violation.is_none(), f && s);
    }

    #[test]
    fn objectives_stay_in_unit_range(idx in 0usize..fixtures::CORPUS_SIZE, seed in 0u64..50,
                                     arm_bits in prop::collection::vec(any::<bool>(), 60)) {
        let e = fixtures::corpus_entry(idx);
        let m = fixtures::generate(e.eta, e.seed);
        let c = &initialize_population(&m, 1, seed).unwrap()[0];
        let arms: Vec<Arm> = arm_bits[..c.len()].iter().map(|&b| if b { Arm::One } else { Arm::Two }).collect();
        let f = eval_sequence(c, &arms, &m).unwrap();
        prop_assert_eq!(f.0.len(), 4);
        for x in &f.0 {
            prop_assert!((0.0..=1.0).contains(x), "{:?}", f);
        }
        prop_assert_eq!(eval_sequence(c, &arms, &m).unwrap(), f);
    }
}
