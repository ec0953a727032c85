use serde::{Deserialize, Serialize};

use crate::netcode::{LinearCode, Port, StepKind};
use crate::netgraph::{EdgeIx, UnitNetwork};
use crate::qsim::register_budget;

/// Role of the input register carrying the state of source `i` (0-based).
pub fn input_role(i: usize) -> String {
    format!("S{}", i + 1)
}

/// Role of the `|+>` register prepared at source `i` (0-based).
pub fn source_role(i: usize) -> String {
    format!("S'{}", i + 1)
}

pub fn edge_role(net: &UnitNetwork, e: EdgeIx) -> String {
    format!("R({})", net.edge_label(e))
}

/// Role of the register at `target` that ends up holding `a_i` (0-based `i`).
pub fn target_role(target: &str, i: usize) -> String {
    format!("T({},{})", target, i + 1)
}

/// When the leftover network registers are Fourier-measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureSchedule {
    /// Deferred if the whole propagated state fits the register budget, eager otherwise.
    #[default]
    Auto,
    /// All edge registers are kept until propagation ends, then measured.
    Deferred,
    /// A node measures its incoming edge registers right after its coding step.
    Eager,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Instruction {
    PreparePlus {
        node: String,
        register: String,
    },
    Allocate {
        node: String,
        register: String,
    },
    ControlledAdd {
        node: String,
        control: String,
        target: String,
        gamma: u64,
    },
    Transmit {
        register: String,
        from: String,
        to: String,
    },
    FourierMeasure {
        node: String,
        register: String,
    },
}

impl Instruction {
    pub fn node(&self) -> &str {
        match self {
            Instruction::PreparePlus { node, .. }
            | Instruction::Allocate { node, .. }
            | Instruction::ControlledAdd { node, .. }
            | Instruction::FourierMeasure { node, .. } => node,
            Instruction::Transmit { from, .. } => from,
        }
    }
}

/// Instructions of one node's coding step, or the initial preparation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<StepKind>,
    pub instructions: Vec<Instruction>,
}

/// Clifford program for protocol steps 1 and 2: state preparation and
/// the node-by-node simulation of the classical code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumProgram {
    pub field: u64,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    pub schedule: MeasureSchedule,
    pub blocks: Vec<Block>,
    /// Largest number of live registers, counting the `|S|` input registers.
    pub peak_registers: usize,
}

impl QuantumProgram {
    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> {
        self.blocks.iter().flat_map(|b| b.instructions.iter())
    }

    pub fn transmissions(&self) -> usize {
        self.instructions()
            .filter(|i| matches!(i, Instruction::Transmit { .. }))
            .count()
    }

    pub fn block(&self, label: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }
}

/// Translates the code into Clifford instructions. Edges with a zero global
/// vector carry nothing and get neither a register nor a transmission.
///
/// `Auto` resolves to `Deferred` when every register fits in the default
/// amplitude budget for the field.
pub fn compile_program(code: &LinearCode, schedule: MeasureSchedule) -> QuantumProgram {
    let deferred = build(code, MeasureSchedule::Deferred);
    match schedule {
        MeasureSchedule::Deferred => deferred,
        MeasureSchedule::Eager => build(code, MeasureSchedule::Eager),
        MeasureSchedule::Auto => {
            if deferred.peak_registers <= register_budget(code.modulus() as usize) {
                deferred
            } else {
                build(code, MeasureSchedule::Eager)
            }
        }
    }
}

fn build(code: &LinearCode, schedule: MeasureSchedule) -> QuantumProgram {
    let net = code.network();
    let g = net.network();
    let h = code.rate();
    let used = {
        let mut used = vec![false; net.edges().len()];
        for e in code.used_edges() {
            used[e] = true;
        }
        used
    };
    let port_register = |v: usize, port: Port| -> Option<String> {
        match port {
            Port::VirtualIn(i) => Some(source_role(i)),
            Port::Edge(e) => used[e].then(|| edge_role(net, e)),
            Port::VirtualOut(i) => Some(target_role(g.name(v), i)),
        }
    };

    let mut blocks = Vec::with_capacity(code.steps().len() + 1);
    blocks.push(Block {
        label: "prepare".into(),
        kind: None,
        instructions: g
            .sources()
            .iter()
            .enumerate()
            .map(|(i, &s)| Instruction::PreparePlus {
                node: g.name(s).into(),
                register: source_role(i),
            })
            .collect(),
    });

    for step in code.steps() {
        let node = g.name(step.node).to_string();
        let inputs: Vec<Option<String>> = step
            .inputs
            .iter()
            .map(|&p| port_register(step.node, p))
            .collect();
        let outputs: Vec<Option<String>> = step
            .outputs
            .iter()
            .map(|&p| port_register(step.node, p))
            .collect();
        let mut ins = Vec::new();
        for reg in outputs.iter().flatten() {
            ins.push(Instruction::Allocate {
                node: node.clone(),
                register: reg.clone(),
            });
        }
        for (i, control) in inputs.iter().enumerate() {
            let Some(control) = control else { continue };
            for (j, target) in outputs.iter().enumerate() {
                let gamma = code.field().reduce(step.gamma[i][j]);
                if let (Some(target), true) = (target, gamma != 0) {
                    ins.push(Instruction::ControlledAdd {
                        node: node.clone(),
                        control: control.clone(),
                        target: target.clone(),
                        gamma,
                    });
                }
            }
        }
        for &port in &step.outputs {
            if let Port::Edge(e) = port {
                if used[e] {
                    let to = g.name(net.edge(e).to).to_string();
                    ins.push(Instruction::Transmit {
                        register: edge_role(net, e),
                        from: node.clone(),
                        to,
                    });
                }
            }
        }
        if schedule == MeasureSchedule::Eager {
            for &port in &step.inputs {
                if let Port::Edge(e) = port {
                    if used[e] {
                        ins.push(Instruction::FourierMeasure {
                            node: node.clone(),
                            register: edge_role(net, e),
                        });
                    }
                }
            }
        }
        blocks.push(Block {
            label: node,
            kind: Some(step.kind),
            instructions: ins,
        });
    }

    let mut live = h;
    let mut peak = live;
    for ins in blocks.iter().flat_map(|b| &b.instructions) {
        match ins {
            Instruction::PreparePlus { .. } | Instruction::Allocate { .. } => live += 1,
            Instruction::FourierMeasure { .. } => live -= 1,
            _ => {}
        }
        peak = peak.max(live);
    }

    QuantumProgram {
        field: code.modulus(),
        sources: g.sources().iter().map(|&s| g.name(s).to_string()).collect(),
        targets: g.targets().iter().map(|&t| g.name(t).to_string()).collect(),
        schedule,
        blocks,
        peak_registers: peak,
    }
}
