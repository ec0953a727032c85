use std::collections::HashMap;

use qnetcode::netcode::{construct_linear_code, LinearCode};
use qnetcode::oracle::fixtures;
use qnetcode::protocol::{
    run_full, Execution, Instruction, MeasureSchedule, ProtocolError, RunOptions, Stage,
    TargetSelection,
};
use qnetcode::qsim::haar_random_seeded;
use qnetcode::{Complex64, Execution64};

const TOL: f64 = 1e-9;

fn code(name: &str, p: u64) -> LinearCode {
    let net = fixtures::get(name).unwrap().network();
    construct_linear_code(&net.expand_capacities(), p, 0).unwrap()
}

fn exec(name: &str, p: u64, schedule: MeasureSchedule, seed: u64) -> Execution64 {
    let c = code(name, p);
    let dim = (p as usize).pow(c.rate() as u32);
    Execution::new(c, &haar_random_seeded(dim, seed), schedule, seed).unwrap()
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn cadds(exec: &Execution64, block: &str) -> Vec<(String, String)> {
    let mut out: Vec<_> = exec
        .program()
        .block(block)
        .unwrap()
        .instructions
        .iter()
        .filter_map(|i| match i {
            Instruction::ControlledAdd {
                control,
                target,
                gamma,
                ..
            } => {
                assert_ne!(*gamma, 0);
                Some((control.clone(), target.clone()))
            }
            _ => None,
        })
        .collect();
    out.sort();
    out
}

fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut v: Vec<_> = xs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    v.sort();
    v
}

#[test]
fn butterfly_program_is_the_hand_derived_circuit() {
    let e = exec("butterfly", 2, MeasureSchedule::Deferred, 0);
    assert_eq!(
        cadds(&e, "s1"),
        pairs(&[("S'1", "R(s1->t1)"), ("S'1", "R(s1->n1)")])
    );
    assert_eq!(
        cadds(&e, "s2"),
        pairs(&[("S'2", "R(s2->t2)"), ("S'2", "R(s2->n1)")])
    );
    assert_eq!(
        cadds(&e, "n1"),
        pairs(&[("R(s1->n1)", "R(n1->n2)"), ("R(s2->n1)", "R(n1->n2)")])
    );
    assert_eq!(
        cadds(&e, "n2"),
        pairs(&[("R(n1->n2)", "R(n2->t1)"), ("R(n1->n2)", "R(n2->t2)")])
    );
    assert_eq!(
        cadds(&e, "t1"),
        pairs(&[
            ("R(s1->t1)", "T(t1,1)"),
            ("R(s1->t1)", "T(t1,2)"),
            ("R(n2->t1)", "T(t1,2)")
        ])
    );
    assert_eq!(
        cadds(&e, "t2"),
        pairs(&[
            ("R(s2->t2)", "T(t2,2)"),
            ("R(s2->t2)", "T(t2,1)"),
            ("R(n2->t2)", "T(t2,1)")
        ])
    );
    assert_eq!(e.program().transmissions(), 7);
    assert_eq!(e.program().peak_registers, 15);
}

#[test]
fn butterfly_runs_deferred_and_ternary_eager_under_auto() {
    assert_eq!(
        exec("butterfly", 2, MeasureSchedule::Auto, 0)
            .program()
            .schedule,
        MeasureSchedule::Deferred
    );
    let t = exec("ternary", 3, MeasureSchedule::Auto, 0);
    assert_eq!(t.program().schedule, MeasureSchedule::Eager);
    assert!(t.program().peak_registers <= qnetcode::qsim::register_budget(3));
}

#[test]
fn single_edge_propagation_builds_a_cat_state() {
    let mut e = exec("single_edge", 2, MeasureSchedule::Deferred, 3);
    let ops: Vec<&str> = e
        .program()
        .instructions()
        .map(|i| match i {
            Instruction::PreparePlus { .. } => "prepare",
            Instruction::Allocate { .. } => "allocate",
            Instruction::ControlledAdd { .. } => "cadd",
            Instruction::Transmit { .. } => "transmit",
            Instruction::FourierMeasure { .. } => "measure",
        })
        .collect();
    assert_eq!(
        ops,
        ["prepare", "allocate", "cadd", "transmit", "allocate", "cadd"]
    );
    e.run_propagation().unwrap();
    let s = e.snapshot_of(&["S'1", "R(s->t)", "T(t,1)"]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(s.amplitudes.len(), 2);
    assert_eq!((s.amplitudes[0].0, s.amplitudes[1].0), (0, 7));
    assert!(s
        .amplitudes
        .iter()
        .all(|&(_, re, im)| (re - h).abs() < TOL && im.abs() < TOL));
}

#[test]
fn coding_node_register_carries_sum_of_symbols() {
    let mut e = exec("butterfly", 2, MeasureSchedule::Deferred, 0);
    e.run_propagation().unwrap();
    assert_eq!(e.table().get("R(n1->n2)").unwrap(), &[1, 1]);
    assert_eq!(e.table().get("T(t1,2)").unwrap(), &[0, 1]);
    assert_eq!(e.table().get("T(t2,1)").unwrap(), &[1, 0]);
}

#[test]
fn functional_table_tracks_the_state_after_every_instruction() {
    for (name, p, schedule) in [
        ("butterfly", 2, MeasureSchedule::Deferred),
        ("butterfly", 2, MeasureSchedule::Eager),
        ("two_paths", 2, MeasureSchedule::Deferred),
        ("ternary", 3, MeasureSchedule::Eager),
    ] {
        let mut e = exec(name, p, schedule, 5);
        let mut steps = 0;
        while e.step_instruction().unwrap() {
            steps += 1;
            assert!(
                e.table_consistent(),
                "{name} {schedule:?} after instruction {steps}"
            );
        }
        assert_eq!(steps, e.program().instructions().count());
    }
}

fn edge_roles(e: &Execution64) -> Vec<String> {
    e.program()
        .instructions()
        .filter_map(|i| match i {
            Instruction::Transmit { register, .. } => Some(register.clone()),
            _ => None,
        })
        .collect()
}

fn forced_exec(
    name: &str,
    p: u64,
    schedule: MeasureSchedule,
    outcomes: &dyn Fn(&str) -> u64,
) -> Execution64 {
    let e = exec(name, p, schedule, 11);
    let forced: HashMap<String, u64> = edge_roles(&e)
        .into_iter()
        .map(|r| {
            let y = outcomes(&r);
            (r, y)
        })
        .collect();
    e.with_forced_outcomes(forced)
}

#[test]
fn zero_outcomes_leave_no_phase() {
    let mut e = forced_exec("butterfly", 2, MeasureSchedule::Deferred, &|_| 0);
    e.run_propagation().unwrap();
    assert_eq!(e.measure_and_fix().unwrap().b, vec![0, 0]);
}

#[test]
fn single_nonzero_outcome_gives_its_functional() {
    let mut e = forced_exec("butterfly", 2, MeasureSchedule::Deferred, &|r| {
        u64::from(r == "R(n1->n2)")
    });
    e.run_propagation().unwrap();
    assert_eq!(e.measure_and_fix().unwrap().b, vec![1, 1]);

    let mut e = forced_exec("butterfly", 2, MeasureSchedule::Deferred, &|r| {
        u64::from(r == "R(s1->t1)")
    });
    e.run_propagation().unwrap();
    assert_eq!(e.measure_and_fix().unwrap().b, vec![1, 0]);
}

fn cat_snapshot(e: &Execution64) -> qnetcode::qsim::Snapshot {
    let mut roles = vec!["S1".to_string(), "S2".to_string()];
    roles.extend(e.cat_registers(0));
    roles.extend(e.cat_registers(1));
    let refs: Vec<&str> = roles.iter().map(String::as_str).collect();
    e.snapshot_of(&refs).unwrap()
}

fn assert_snapshots_close(a: &qnetcode::qsim::Snapshot, b: &qnetcode::qsim::Snapshot) {
    assert_eq!(a.registers, b.registers);
    assert_eq!(a.amplitudes.len(), b.amplitudes.len());
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        assert_eq!(x.0, y.0);
        assert!(
            (x.1 - y.1).abs() < TOL && (x.2 - y.2).abs() < TOL,
            "{x:?} vs {y:?}"
        );
    }
}

#[test]
fn eager_and_deferred_schedules_agree() {
    let outcome = |r: &str| (r.len() % 2) as u64;
    let mut deferred = forced_exec("butterfly", 2, MeasureSchedule::Deferred, &outcome);
    let mut eager = forced_exec("butterfly", 2, MeasureSchedule::Eager, &outcome);
    deferred.run_propagation().unwrap();
    eager.run_propagation().unwrap();
    assert!(eager.peak_registers() < deferred.peak_registers());
    let b1 = deferred.measure_and_fix().unwrap().b.clone();
    let b2 = eager.measure_and_fix().unwrap().b.clone();
    assert_eq!(b1, b2);
    assert_snapshots_close(&cat_snapshot(&deferred), &cat_snapshot(&eager));
}

#[test]
fn measurement_order_does_not_matter() {
    let outcome = |r: &str| (r.len() % 3) as u64;
    let mut forward = forced_exec("butterfly", 3, MeasureSchedule::Deferred, &outcome);
    let mut backward = forced_exec("butterfly", 3, MeasureSchedule::Deferred, &outcome);
    forward.run_propagation().unwrap();
    backward.run_propagation().unwrap();
    let mut roles = forward.pending_measurements();
    forward.measure_registers(&roles).unwrap();
    roles.reverse();
    backward.measure_registers(&roles).unwrap();
    assert_eq!(
        forward.fix_phases().unwrap().b,
        backward.fix_phases().unwrap().b
    );
    assert_snapshots_close(&cat_snapshot(&forward), &cat_snapshot(&backward));
}

#[test]
fn distillation_pairs_follow_the_selection() {
    let targets = strings(&["t1", "t2"]);
    for (perm, expected) in [
        (vec![0, 1], [("S'1", "T(t1,1)"), ("S'2", "T(t2,2)")]),
        (vec![1, 0], [("S'1", "T(t2,1)"), ("S'2", "T(t1,2)")]),
    ] {
        let mut e = exec("butterfly", 2, MeasureSchedule::Deferred, 2);
        e.run_propagation().unwrap();
        e.measure_and_fix().unwrap();
        e.distill_epr(&TargetSelection::new(targets.clone(), perm))
            .unwrap();
        let got = e.epr_pairs();
        let want: Vec<(String, String)> = expected
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(got, want);
    }
}

#[test]
fn single_edge_teleport_is_exact_for_every_outcome() {
    for p in [2u64, 3, 5] {
        let c = code("single_edge", p);
        let input = haar_random_seeded::<f64>(p as usize, p);
        for r in 0..p {
            for m in 0..p {
                for y in 0..p {
                    let forced: HashMap<String, u64> = [
                        ("R(s->t)".to_string(), r),
                        ("S'1".to_string(), m),
                        ("S1".to_string(), y),
                    ]
                    .into();
                    let mut e =
                        Execution::<f64>::new(c.clone(), &input, MeasureSchedule::Deferred, 0)
                            .unwrap()
                            .with_forced_outcomes(forced);
                    e.run_propagation().unwrap();
                    e.measure_and_fix().unwrap();
                    e.distill_epr(&TargetSelection::identity(&["t"])).unwrap();
                    e.teleport().unwrap();
                    let f = e.output_fidelity(&input).unwrap();
                    assert!(f > 1.0 - TOL, "p={p} r={r} m={m} y={y}: {f}");
                    let tail = &e.transcript().entries;
                    let shift = tail.iter().find(|x| x.instruction == "shift").unwrap();
                    assert_eq!(shift.value, Some((p - m) % p));
                    let phase = tail
                        .iter()
                        .rev()
                        .find(|x| x.instruction == "phase-correct")
                        .unwrap();
                    assert_eq!(phase.value, Some(y));
                }
            }
        }
    }
}

#[test]
fn steps_must_run_in_order() {
    let mut e = exec("butterfly", 2, MeasureSchedule::Deferred, 0);
    let sel = TargetSelection::identity(&["t1", "t2"]);
    assert!(matches!(
        e.measure_and_fix(),
        Err(ProtocolError::OutOfOrder(_))
    ));
    assert!(matches!(
        e.distill_epr(&sel),
        Err(ProtocolError::OutOfOrder(_))
    ));
    assert!(matches!(e.teleport(), Err(ProtocolError::OutOfOrder(_))));
    e.run_propagation().unwrap();
    assert!(matches!(
        e.distill_epr(&sel),
        Err(ProtocolError::OutOfOrder(_))
    ));
    e.measure_and_fix().unwrap();
    assert!(matches!(e.teleport(), Err(ProtocolError::OutOfOrder(_))));
    assert!(matches!(
        e.output_fidelity(&[]),
        Err(ProtocolError::OutOfOrder(_))
    ));
    e.distill_epr(&sel).unwrap();
    assert!(matches!(
        e.distill_epr(&sel),
        Err(ProtocolError::OutOfOrder(_))
    ));
}

#[test]
fn construction_rejects_bad_inputs() {
    let c = code("butterfly", 2);
    let err = Execution::<f64>::new(c, &[Complex64::new(1.0, 0.0); 3], MeasureSchedule::Auto, 0)
        .unwrap_err();
    assert_eq!(
        err,
        ProtocolError::InputDimension {
            got: 3,
            expected: 4
        }
    );
}

#[test]
fn infeasible_network_names_the_target() {
    let net = fixtures::get("butterfly_cut").unwrap().network();
    let input = haar_random_seeded::<f64>(4, 0);
    let err = run_full(
        &net,
        &input,
        &TargetSelection::identity(&["t1", "t2"]),
        &RunOptions::default(),
    )
    .unwrap_err();
    assert_eq!(
        err,
        ProtocolError::Infeasible {
            target: "t1".into(),
            flow: 1,
            required: 2
        }
    );
}

#[test]
fn transcripts_differ_only_in_random_fields() {
    let net = fixtures::get("butterfly").unwrap().network();
    let input = haar_random_seeded::<f64>(4, 9);
    let sel = TargetSelection::new(strings(&["t1", "t2"]), vec![1, 0]);
    let skeleton = |seed: u64| {
        let options = RunOptions {
            measurement_seed: seed,
            ..RunOptions::default()
        };
        let report = run_full(&net, &input, &sel, &options).unwrap();
        assert!(report.fidelity > 1.0 - TOL);
        report
            .transcript
            .entries
            .into_iter()
            .map(|mut e| {
                e.value = None;
                e.outcome = None;
                if let Some(m) = e.message.as_mut() {
                    m.payload.clear();
                }
                e
            })
            .collect::<Vec<_>>()
    };
    let reference = skeleton(0);
    let mut outcomes = std::collections::HashSet::new();
    for seed in 1..100 {
        assert_eq!(skeleton(seed), reference, "seed {seed}");
        let options = RunOptions {
            measurement_seed: seed,
            ..RunOptions::default()
        };
        let t = run_full(&net, &input, &sel, &options).unwrap().transcript;
        outcomes.insert(t.outcomes().map(|(_, y)| y).collect::<Vec<_>>());
    }
    assert!(outcomes.len() > 10);
}

#[test]
fn selection_happens_after_correction() {
    let net = fixtures::get("butterfly").unwrap().network();
    let input = haar_random_seeded::<f64>(4, 1);
    let report = run_full(
        &net,
        &input,
        &TargetSelection::identity(&["t2", "t1"]),
        &RunOptions::default(),
    )
    .unwrap();
    let stages: Vec<Stage> = report.transcript.entries.iter().map(|e| e.stage).collect();
    assert!(stages.windows(2).all(|w| w[0] <= w[1]));
    let select = report
        .transcript
        .entries
        .iter()
        .find(|e| e.stage == Stage::Select)
        .unwrap();
    assert_eq!(
        select.message.as_ref().unwrap().payload,
        "T0=(t2,t1) pi=(1,2)"
    );
}

#[test]
fn single_precision_run() {
    let net = fixtures::get("butterfly").unwrap().network();
    let input = haar_random_seeded::<f32>(4, 4);
    let report = run_full(
        &net,
        &input,
        &TargetSelection::identity(&["t1", "t2"]),
        &RunOptions::default(),
    )
    .unwrap();
    assert!(report.fidelity > 1.0 - 1e-5, "{}", report.fidelity);
}
