use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Execution, MeasureSchedule, ProtocolError, QuantumProgram, TargetSelection};
use crate::netcode::construct_linear_code;
use crate::netgraph::parse_network;
use crate::oracle::fixtures;
use crate::qsim::{haar_random, Snapshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSnapshot {
    pub label: String,
    #[serde(flatten)]
    pub snapshot: Snapshot,
}

/// Snapshot label and the registers it covers, in walkthrough order.
pub const BUTTERFLY_STAGES: [(&str, &[&str]); 8] = [
    ("prepared", &["S'1", "S'2"]),
    (
        "after-sources",
        &[
            "S'1",
            "R(s1->t1)",
            "R(s1->n1)",
            "S'2",
            "R(s2->t2)",
            "R(s2->n1)",
        ],
    ),
    (
        "after-n1",
        &[
            "S'1",
            "R(s1->t1)",
            "R(s1->n1)",
            "S'2",
            "R(s2->t2)",
            "R(s2->n1)",
            "R(n1->n2)",
        ],
    ),
    (
        "after-n2",
        &[
            "S'1",
            "R(s1->t1)",
            "R(s1->n1)",
            "S'2",
            "R(s2->t2)",
            "R(s2->n1)",
            "R(n1->n2)",
            "R(n2->t1)",
            "R(n2->t2)",
        ],
    ),
    (
        "after-targets",
        &[
            "S'1",
            "R(s1->t1)",
            "R(s1->n1)",
            "S'2",
            "R(s2->t2)",
            "R(s2->n1)",
            "R(n1->n2)",
            "R(n2->t1)",
            "R(n2->t2)",
            "T(t1,1)",
            "T(t1,2)",
            "T(t2,1)",
            "T(t2,2)",
        ],
    ),
    (
        "cat-states",
        &["S'1", "T(t1,1)", "T(t2,1)", "S'2", "T(t1,2)", "T(t2,2)"],
    ),
    ("epr-identity", &["S'1", "T(t1,1)", "S'2", "T(t2,2)"]),
    ("epr-swap", &["S'1", "T(t2,1)", "S'2", "T(t1,2)"]),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Walkthrough {
    pub program: QuantumProgram,
    pub snapshots: Vec<LabeledSnapshot>,
    pub transmissions: usize,
    pub fidelity_identity: f64,
    pub fidelity_swap: f64,
}

/// The butterfly example over F_2 with a Haar-random two-qubit input, with
/// snapshots after each stage and teleportation in both target orders.
pub fn butterfly_walkthrough(
    input_seed: u64,
    measurement_seed: u64,
) -> Result<Walkthrough, ProtocolError> {
    let net = parse_network(fixtures::BUTTERFLY).expect("shipped fixture parses");
    let code = construct_linear_code(&net.expand_capacities(), 2, 0)?;
    let input = haar_random::<f64, _>(4, &mut ChaCha8Rng::seed_from_u64(input_seed));
    let mut exec =
        Execution::<f64>::new(code, &input, MeasureSchedule::Deferred, measurement_seed)?;

    let mut snapshots = Vec::new();
    let mut take = |exec: &Execution<f64>, index: usize| -> Result<(), ProtocolError> {
        let (label, roles) = BUTTERFLY_STAGES[index];
        snapshots.push(LabeledSnapshot {
            label: label.into(),
            snapshot: exec.snapshot_of(roles)?,
        });
        Ok(())
    };

    exec.run_block()?;
    take(&exec, 0)?;
    let mut stage = 1;
    while let Some(label) = exec.run_block()? {
        let done = match label.as_str() {
            "s2" => Some(1),
            "n1" => Some(2),
            "n2" => Some(3),
            "t2" => Some(4),
            _ => None,
        };
        if let Some(index) = done {
            debug_assert_eq!(index, stage);
            take(&exec, index)?;
            stage += 1;
        }
    }
    exec.measure_and_fix()?;
    take(&exec, 5)?;

    let mut fidelities = [0.0; 2];
    let targets = ["t1", "t2"];
    for (n, perm) in [vec![0, 1], vec![1, 0]].into_iter().enumerate() {
        let mut branch = exec.clone();
        branch.distill_epr(&TargetSelection::new(
            targets.iter().map(|s| s.to_string()).collect(),
            perm,
        ))?;
        take(&branch, 6 + n)?;
        branch.teleport()?;
        fidelities[n] = branch.output_fidelity(&input)?;
    }

    Ok(Walkthrough {
        transmissions: exec.transcript().count("transmit"),
        program: exec.program().clone(),
        snapshots,
        fidelity_identity: fidelities[0],
        fidelity_swap: fidelities[1],
    })
}
