mod common;

use common::{class_violations, left_shifted, overlap, stage3_in_removal_order};
use disasm_core::fixtures::random_jobs;
use disasm_core::schedule::{
    build_instance, oracle_solve, solve, violations, JobSpec, SolverConfig, Stage, ORACLE_MAX_TASKS,
};
use disasm_core::Arm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_oracle_on_small_instances(seed in any::<u64>(), parallel_s3 in any::<bool>()) {
        let jobs = random_jobs(seed, ORACLE_MAX_TASKS);
        let inst = build_instance(&jobs, parallel_s3).unwrap();
        prop_assume!(inst.len() <= ORACLE_MAX_TASKS);
        let config = SolverConfig { allow_parallel_s3: parallel_s3, ..SolverConfig::default() };
        let s = solve(&inst, &config).unwrap();
        let horizon: u64 = inst.tasks.iter().map(|t| t.duration_ms).sum();
        let o = oracle_solve(&inst, horizon).unwrap();
        prop_assert!(s.optimal);
        prop_assert_eq!(s.makespan_ms, o.makespan_ms);
        prop_assert!(violations(&inst, &s).is_empty(), "{:?}", violations(&inst, &s));
        prop_assert!(violations(&inst, &o).is_empty());
        prop_assert!(class_violations(&inst, &s, parallel_s3).is_empty());
        prop_assert!(left_shifted(&inst, &s));
        if !parallel_s3 {
            prop_assert!(stage3_in_removal_order(&inst, &s));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn larger_instances_are_valid(seed in any::<u64>()) {
        let jobs = random_jobs(seed, 24);
        let inst = build_instance(&jobs, false).unwrap();
        let s = solve(&inst, &SolverConfig { node_limit: 20_000, ..SolverConfig::default() }).unwrap();
        prop_assert!(violations(&inst, &s).is_empty());
        prop_assert!(class_violations(&inst, &s, false).is_empty());
        prop_assert!(left_shifted(&inst, &s));
        prop_assert!(stage3_in_removal_order(&inst, &s));
        let serial: u64 = inst.disassembly_tasks().iter().map(|&k| inst.tasks[k].duration_ms).sum();
        prop_assert!(s.makespan_ms >= serial);
        prop_assert_eq!(solve(&inst, &SolverConfig { node_limit: 20_000, ..SolverConfig::default() }).unwrap(), s);
    }
}

#[test]
fn tool_change_runs_beside_the_other_arm() {
    let jobs = [
        JobSpec { arm: Arm::One, toolchange_ms: None, pose_adjust_ms: None, disassembly_ms: 10_000, part: None },
        JobSpec { arm: Arm::Two, toolchange_ms: Some(10_000), pose_adjust_ms: None, disassembly_ms: 4_000, part: None },
    ];
    let inst = build_instance(&jobs, false).unwrap();
    let s = solve(&inst, &SolverConfig::default()).unwrap();
    let s1 = inst.tasks.iter().find(|t| t.stage == Stage::ToolChange).unwrap().id;
    let s3_arm1 = inst.disassembly_tasks()[0];
    assert!(overlap(&inst, &s, s1, s3_arm1));
    assert_eq!(s.makespan_ms, 14_000);
}

#[test]
fn oracle_trivia() {
    let empty = build_instance(&[], false).unwrap();
    assert_eq!(oracle_solve(&empty, 0).unwrap().makespan_ms, 0);
    let one = build_instance(
        &[JobSpec { arm: Arm::One, toolchange_ms: None, pose_adjust_ms: None, disassembly_ms: 7_000, part: None }],
        false,
    )
    .unwrap();
    let s = oracle_solve(&one, 7_000).unwrap();
    assert_eq!((s.starts.clone(), s.makespan_ms), (vec![0], 7_000));
}
