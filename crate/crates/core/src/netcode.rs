//! Classical linear multicast codes over prime fields.
//!
//! Each source receives its symbol on a virtual incoming edge and each target
//! emits the `|S|` decoded symbols on virtual outgoing edges, so every node is
//! described by the same kind of local coefficient matrix.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldError, PrimeField};
use crate::netgraph::{EdgeIx, Feasibility, NodeIx, UnitNetwork};

/// Attempts per field size before giving up.
pub const RETRY_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("multicast infeasible: target {target} has max-flow {flow} < {required}")]
    Infeasible {
        target: String,
        flow: u32,
        required: u32,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no full-rank code over F_{p} after {attempts} attempts; try a larger field")]
    RetryBudgetExhausted { p: u64, attempts: usize },
    #[error("input has {got} symbols, expected {expected}")]
    InputLength { got: usize, expected: usize },
    #[error("code document does not match the network: {0}")]
    Mismatch(String),
}

/// An input or output slot of a node's local coding map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    /// Virtual edge delivering source symbol `a_i` (0-based `i`).
    VirtualIn(usize),
    Edge(EdgeIx),
    /// Virtual edge on which a target must emit `a_i`.
    VirtualOut(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    SourcePrep,
    Coding,
    FanOut,
    TargetDecode,
}

/// Local coding map of one node: `out_j = sum_i gamma[i][j] * in_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingStep {
    pub node: NodeIx,
    pub kind: StepKind,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub gamma: Vec<Vec<u64>>,
}

impl CodingStep {
    fn classify(&mut self, is_source: bool, is_target: bool) {
        self.kind = if is_source {
            StepKind::SourcePrep
        } else if is_target {
            StepKind::TargetDecode
        } else if self.inputs.len() == 1 && self.gamma[0].iter().all(|&g| g == 1) {
            StepKind::FanOut
        } else {
            StepKind::Coding
        };
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCode {
    field: PrimeField,
    net: UnitNetwork,
    /// Local maps in topological order.
    steps: Vec<CodingStep>,
    /// Global encoding vector per unit edge.
    global: Vec<Vec<u64>>,
}

/// Draws random local coefficients, propagates global vectors in topological
/// order and retries until every target's incoming vectors span `F_p^|S|`.
///
/// Each outgoing edge gets a uniformly random nonzero column of coefficients:
/// an all-zero column only wastes the edge, and excluding it makes the binary
/// butterfly code come out with probability 1/3 per attempt.
pub fn construct_linear_code(
    net: &UnitNetwork,
    p: u64,
    seed: u64,
) -> Result<LinearCode, CodeError> {
    let field = PrimeField::new(p)?;
    if let Feasibility::Infeasible {
        target,
        flow,
        required,
        ..
    } = net.multicast_feasible()
    {
        return Err(CodeError::Infeasible {
            target,
            flow,
            required,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut column: Vec<u64> = Vec::new();
    for _ in 0..RETRY_BUDGET {
        let draw = |_: NodeIx, fan_in: usize, (i, _): (usize, usize)| {
            if i == 0 {
                column = loop {
                    let c: Vec<u64> = (0..fan_in).map(|_| rng.random_range(0..p)).collect();
                    if c.iter().any(|&x| x != 0) {
                        break c;
                    }
                };
            }
            column[i]
        };
        if let Some(code) = try_construct(net, field, draw) {
            return Ok(code);
        }
    }
    Err(CodeError::RetryBudgetExhausted {
        p,
        attempts: RETRY_BUDGET,
    })
}

/// Builds a code from explicit local coefficients for the real outgoing edges.
/// `coefficient(node, (input slot, output slot))` is queried for every entry;
/// target-decode columns are solved, not queried. Returns `None` if some target
/// cannot decode.
pub fn code_from_coefficients(
    net: &UnitNetwork,
    field: PrimeField,
    mut coefficient: impl FnMut(NodeIx, (usize, usize)) -> u64,
) -> Option<LinearCode> {
    try_construct(net, field, |v, _, ij| field.reduce(coefficient(v, ij)))
}

fn node_ports(net: &UnitNetwork, v: NodeIx) -> (Vec<Port>, Vec<Port>) {
    let g = net.network();
    let h = g.sources().len();
    let mut inputs = Vec::new();
    if let Some(i) = g.sources().iter().position(|&s| s == v) {
        inputs.push(Port::VirtualIn(i));
    }
    inputs.extend(net.incoming(v).iter().map(|&e| Port::Edge(e)));
    let mut outputs: Vec<Port> = net.outgoing(v).iter().map(|&e| Port::Edge(e)).collect();
    if g.targets().contains(&v) {
        outputs.extend((0..h).map(Port::VirtualOut));
    }
    (inputs, outputs)
}

fn try_construct(
    net: &UnitNetwork,
    field: PrimeField,
    mut coefficient: impl FnMut(NodeIx, usize, (usize, usize)) -> u64,
) -> Option<LinearCode> {
    let g = net.network();
    let h = g.sources().len();
    let mut global: Vec<Vec<u64>> = vec![vec![0; h]; net.edges().len()];
    let mut steps = Vec::with_capacity(g.node_count());

    for &v in g.topo_order() {
        let (inputs, outputs) = node_ports(net, v);
        let in_vectors: Vec<Vec<u64>> = inputs
            .iter()
            .map(|port| match *port {
                Port::VirtualIn(i) => field.unit_vector(h, i),
                Port::Edge(e) => global[e].clone(),
                Port::VirtualOut(_) => unreachable!("outputs are never inputs"),
            })
            .collect();
        let mut gamma = vec![vec![0u64; outputs.len()]; inputs.len()];
        for (j, port) in outputs.iter().enumerate() {
            match *port {
                Port::Edge(e) => {
                    let mut acc = vec![0; h];
                    for (i, vec_i) in in_vectors.iter().enumerate() {
                        let c = coefficient(v, in_vectors.len(), (i, j));
                        gamma[i][j] = c;
                        field.axpy(&mut acc, c, vec_i);
                    }
                    global[e] = acc;
                }
                Port::VirtualOut(i) => {
                    let target = field.unit_vector(h, i);
                    let c = field.solve_combination(&in_vectors, &target)?;
                    for (row, ci) in gamma.iter_mut().zip(c) {
                        row[j] = ci;
                    }
                }
                Port::VirtualIn(_) => unreachable!("inputs are never outputs"),
            }
        }
        let mut step = CodingStep {
            node: v,
            kind: StepKind::Coding,
            inputs,
            outputs,
            gamma,
        };
        step.classify(g.sources().contains(&v), g.targets().contains(&v));
        steps.push(step);
    }
    Some(LinearCode {
        field,
        net: net.clone(),
        steps,
        global,
    })
}

impl LinearCode {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    /// Number of sources `|S|`.
    pub fn rate(&self) -> usize {
        self.net.network().sources().len()
    }

    pub fn network(&self) -> &UnitNetwork {
        &self.net
    }

    pub fn steps(&self) -> &[CodingStep] {
        &self.steps
    }

    pub fn step(&self, v: NodeIx) -> &CodingStep {
        self.steps
            .iter()
            .find(|s| s.node == v)
            .expect("every node has a step")
    }

    pub fn global_vector(&self, e: EdgeIx) -> &[u64] {
        &self.global[e]
    }

    /// Global encoding vector of every unit edge, keyed by edge index.
    pub fn global_encoding_vectors(&self) -> BTreeMap<EdgeIx, Vec<u64>> {
        self.global.iter().cloned().enumerate().collect()
    }

    /// Vector carried by any port; virtual outputs report what the local map
    /// actually produces there.
    pub fn port_vector(&self, v: NodeIx, port: Port) -> Vec<u64> {
        let h = self.rate();
        match port {
            Port::VirtualIn(i) => self.field.unit_vector(h, i),
            Port::Edge(e) => self.global[e].clone(),
            Port::VirtualOut(_) => {
                let step = self.step(v);
                let j = step
                    .outputs
                    .iter()
                    .position(|&o| o == port)
                    .expect("port belongs to node");
                let mut acc = vec![0; h];
                for (i, &inp) in step.inputs.iter().enumerate() {
                    self.field
                        .axpy(&mut acc, step.gamma[i][j], &self.port_vector(v, inp));
                }
                acc
            }
        }
    }

    /// Edges whose global vector is nonzero. Zero edges carry nothing and are
    /// skipped by the quantum compiler.
    pub fn used_edges(&self) -> Vec<EdgeIx> {
        (0..self.global.len())
            .filter(|&e| self.global[e].iter().any(|&x| x != 0))
            .collect()
    }

    /// Topologically ordered steps; identical to [`LinearCode::steps`].
    pub fn compile_steps(&self) -> Vec<CodingStep> {
        self.steps.clone()
    }

    /// Runs the local maps on concrete symbols and returns each target's
    /// virtual outputs, in target order. Does not consult the global vectors.
    pub fn classical_simulate(&self, inputs: &[u64]) -> Result<Vec<(String, Vec<u64>)>, CodeError> {
        let h = self.rate();
        if inputs.len() != h {
            return Err(CodeError::InputLength {
                got: inputs.len(),
                expected: h,
            });
        }
        let f = self.field;
        let mut value: Vec<u64> = vec![0; self.net.edges().len()];
        let mut decoded: BTreeMap<NodeIx, Vec<u64>> = BTreeMap::new();
        for step in &self.steps {
            let ins: Vec<u64> = step
                .inputs
                .iter()
                .map(|port| match *port {
                    Port::VirtualIn(i) => f.reduce(inputs[i]),
                    Port::Edge(e) => value[e],
                    Port::VirtualOut(_) => unreachable!(),
                })
                .collect();
            for (j, port) in step.outputs.iter().enumerate() {
                let out = ins
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, &x)| f.add(acc, f.mul(step.gamma[i][j], x)));
                match *port {
                    Port::Edge(e) => value[e] = out,
                    Port::VirtualOut(i) => {
                        decoded.entry(step.node).or_insert_with(|| vec![0; h])[i] = out
                    }
                    Port::VirtualIn(_) => unreachable!(),
                }
            }
        }
        let g = self.net.network();
        Ok(g.targets()
            .iter()
            .map(|&t| {
                (
                    g.name(t).to_string(),
                    decoded.remove(&t).unwrap_or_default(),
                )
            })
            .collect())
    }

    pub fn to_document(&self) -> CodeDocument {
        let g = self.net.network();
        let port_label = |port: Port| match port {
            Port::VirtualIn(i) => format!("in:{}", i + 1),
            Port::Edge(e) => self.net.edge_label(e),
            Port::VirtualOut(i) => format!("out:{}", i + 1),
        };
        CodeDocument {
            field: self.modulus(),
            rate: self.rate(),
            nodes: self
                .steps
                .iter()
                .map(|s| NodeCoding {
                    node: g.name(s.node).to_string(),
                    kind: s.kind,
                    inputs: s.inputs.iter().map(|&p| port_label(p)).collect(),
                    outputs: s.outputs.iter().map(|&p| port_label(p)).collect(),
                    gamma: s.gamma.clone(),
                })
                .collect(),
            edges: (0..self.global.len())
                .map(|e| EdgeCoding {
                    edge: self.net.edge_label(e),
                    global: self.global[e].clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("code documents always serialize")
    }

    /// Rebuilds a code for `net` from a document written by [`LinearCode::to_json`].
    /// Global vectors and decode columns are recomputed and checked against the document.
    pub fn from_document(net: &UnitNetwork, doc: &CodeDocument) -> Result<Self, CodeError> {
        let field = PrimeField::new(doc.field)?;
        let g = net.network();
        let by_node: BTreeMap<&str, &NodeCoding> =
            doc.nodes.iter().map(|n| (n.node.as_str(), n)).collect();
        for v in 0..g.node_count() {
            let entry = by_node
                .get(g.name(v))
                .ok_or_else(|| CodeError::Mismatch(format!("missing node {}", g.name(v))))?;
            let (inputs, outputs) = node_ports(net, v);
            if entry.gamma.len() != inputs.len()
                || entry.gamma.iter().any(|r| r.len() != outputs.len())
            {
                return Err(CodeError::Mismatch(format!("gamma shape at {}", g.name(v))));
            }
        }
        let code = try_construct(net, field, |v, _, (i, j)| {
            field.reduce(by_node[g.name(v)].gamma[i][j])
        })
        .ok_or_else(|| CodeError::Mismatch("some target cannot decode".into()))?;
        let rebuilt = code.to_document();
        if rebuilt.edges != doc.edges {
            return Err(CodeError::Mismatch("global vectors disagree".into()));
        }
        for (ours, theirs) in rebuilt.nodes.iter().zip(&doc.nodes) {
            if ours.gamma != theirs.gamma {
                return Err(CodeError::Mismatch(format!(
                    "decode coefficients at {}",
                    ours.node
                )));
            }
        }
        Ok(code)
    }

    pub fn from_json(net: &UnitNetwork, json: &str) -> Result<Self, CodeError> {
        let doc: CodeDocument =
            serde_json::from_str(json).map_err(|e| CodeError::Mismatch(e.to_string()))?;
        Self::from_document(net, &doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub field: u64,
    pub rate: usize,
    pub nodes: Vec<NodeCoding>,
    pub edges: Vec<EdgeCoding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCoding {
    pub node: String,
    pub kind: StepKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gamma: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCoding {
    pub edge: String,
    pub global: Vec<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::parse_network;

    const BUTTERFLY: &str = include_str!("../fixtures/butterfly.json");

    fn butterfly() -> UnitNetwork {
        parse_network(BUTTERFLY).unwrap().expand_capacities()
    }

    fn edge(net: &UnitNetwork, label: &str) -> EdgeIx {
        (0..net.edges().len())
            .find(|&e| net.edge_label(e) == label)
            .unwrap()
    }

    #[test]
    fn binary_butterfly_code_sums_at_the_bottleneck() {
        let net = butterfly();
        let code = construct_linear_code(&net, 2, 0).unwrap();
        assert_eq!(code.global_vector(edge(&net, "n1->n2")), &[1, 1]);
        assert_eq!(code.global_vector(edge(&net, "s1->t1")), &[1, 0]);
        assert_eq!(code.global_vector(edge(&net, "n2->t2")), &[1, 1]);
        let s2 = net.network().node("s2").unwrap();
        assert_eq!(code.port_vector(s2, Port::VirtualIn(1)), vec![0, 1]);
    }

    #[test]
    fn binary_butterfly_delivers_both_symbols() {
        let code = construct_linear_code(&butterfly(), 2, 0).unwrap();
        let out = code.classical_simulate(&[1, 0]).unwrap();
        assert_eq!(
            out,
            vec![
                ("t1".to_string(), vec![1, 0]),
                ("t2".to_string(), vec![1, 0])
            ]
        );
        let zero = code.classical_simulate(&[0, 0]).unwrap();
        assert!(zero.iter().all(|(_, v)| v == &[0, 0]));
        assert!(matches!(
            code.classical_simulate(&[1]),
            Err(CodeError::InputLength {
                got: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn ternary_butterfly_exhaustive() {
        let code = construct_linear_code(&butterfly(), 3, 0).unwrap();
        for a1 in 0..3 {
            for a2 in 0..3 {
                for (_, out) in code.classical_simulate(&[a1, a2]).unwrap() {
                    assert_eq!(out, vec![a1, a2]);
                }
            }
        }
    }

    #[test]
    fn single_edge_is_identity() {
        let doc = r#"{"nodes":["s","t"],"edges":[{"from":"s","to":"t","capacity":1}],"sources":["s"],"targets":["t"]}"#;
        let net = parse_network(doc).unwrap().expand_capacities();
        let code = construct_linear_code(&net, 2, 9).unwrap();
        assert!(code
            .steps()
            .iter()
            .all(|s| s.gamma.iter().flatten().all(|&g| g == 1)));
        let kinds: Vec<StepKind> = code.compile_steps().iter().map(|s| s.kind).collect();
        assert_eq!(kinds, [StepKind::SourcePrep, StepKind::TargetDecode]);
    }

    #[test]
    fn butterfly_steps() {
        let net = butterfly();
        let code = construct_linear_code(&net, 2, 0).unwrap();
        let g = net.network();
        let order: Vec<(&str, StepKind)> = code
            .compile_steps()
            .iter()
            .map(|s| (g.name(s.node), s.kind))
            .collect();
        assert_eq!(
            order,
            [
                ("s1", StepKind::SourcePrep),
                ("s2", StepKind::SourcePrep),
                ("n1", StepKind::Coding),
                ("n2", StepKind::FanOut),
                ("t1", StepKind::TargetDecode),
                ("t2", StepKind::TargetDecode),
            ]
        );
    }

    #[test]
    fn identity_relay_is_coding_not_fan_out() {
        // Two parallel paths through one relay that must pass both symbols on unchanged.
        let doc = r#"{"nodes":["s1","s2","m","t"],
            "edges":[{"from":"s1","to":"m","capacity":1},{"from":"s2","to":"m","capacity":1},
                     {"from":"m","to":"t","capacity":2}],
            "sources":["s1","s2"],"targets":["t"]}"#;
        let net = parse_network(doc).unwrap().expand_capacities();
        let field = PrimeField::new(2).unwrap();
        let m = net.network().node("m").unwrap();
        let code = code_from_coefficients(
            &net,
            field,
            |v, (i, j)| if v == m { (i == j) as u64 } else { 1 },
        )
        .unwrap();
        let step = code.step(m);
        assert_eq!(step.gamma, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(step.kind, StepKind::Coding);
        // Random construction over F_2 finds a code here too.
        let random = construct_linear_code(&net, 2, 1).unwrap();
        for a in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(random.classical_simulate(&a).unwrap()[0].1, a.to_vec());
        }
    }

    #[test]
    fn same_seed_same_code() {
        let net = butterfly();
        assert_eq!(
            construct_linear_code(&net, 5, 42).unwrap(),
            construct_linear_code(&net, 5, 42).unwrap()
        );
    }

    #[test]
    fn infeasible_network_is_rejected() {
        let net = parse_network(BUTTERFLY)
            .unwrap()
            .without_edge("n1", "n2")
            .unwrap();
        assert!(matches!(
            construct_linear_code(&net.expand_capacities(), 2, 0),
            Err(CodeError::Infeasible {
                flow: 1,
                required: 2,
                ..
            })
        ));
    }

    #[test]
    fn json_round_trip() {
        let net = butterfly();
        let code = construct_linear_code(&net, 3, 7).unwrap();
        let back = LinearCode::from_json(&net, &code.to_json()).unwrap();
        assert_eq!(back, code);

        let mut doc = code.to_document();
        doc.edges[0].global[0] = (doc.edges[0].global[0] + 1) % 3;
        assert!(matches!(
            LinearCode::from_document(&net, &doc),
            Err(CodeError::Mismatch(_))
        ));
    }

    #[test]
    fn composite_field_is_rejected() {
        assert!(matches!(
            construct_linear_code(&butterfly(), 4, 0),
            Err(CodeError::Field(FieldError::NotPrime(4)))
        ));
    }
}
