//! Network model: parsing, validation, unit-capacity expansion and the
//! max-flow test for multicast feasibility.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeIx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("malformed network document: {0}")]
    Schema(String),
    #[error("{context} refers to undeclared node `{name}`")]
    UnknownNode { name: String, context: String },
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("edge {from} -> {to} has nonpositive capacity {capacity}")]
    NonPositiveCapacity {
        from: String,
        to: String,
        capacity: i64,
    },
    #[error("network contains a directed cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("source list is empty")]
    NoSources,
    #[error("target list is empty")]
    NoTargets,
    #[error("`{0}` listed twice among {1}")]
    DuplicateTerminal(String, &'static str),
}

/// JSON form of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDocument>,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub from: String,
    pub to: String,
    pub capacity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeIx,
    pub to: NodeIx,
    pub capacity: u32,
}

/// A validated acyclic network with ordered source and target lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    names: Vec<String>,
    index: HashMap<String, NodeIx>,
    edges: Vec<Edge>,
    sources: Vec<NodeIx>,
    targets: Vec<NodeIx>,
    topo: Vec<NodeIx>,
}

pub fn parse_network(document: &str) -> Result<Network, NetworkError> {
    let doc: NetworkDocument =
        serde_json::from_str(document).map_err(|e| NetworkError::Schema(e.to_string()))?;
    Network::from_document(&doc)
}

impl Network {
    pub fn from_document(doc: &NetworkDocument) -> Result<Self, NetworkError> {
        let mut index = HashMap::new();
        for (i, name) in doc.nodes.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(name.clone()));
            }
        }
        let lookup = |name: &str, context: String| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode {
                    name: name.to_string(),
                    context,
                })
        };

        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let ctx = format!("edge {} -> {}", e.from, e.to);
            let from = lookup(&e.from, ctx.clone())?;
            let to = lookup(&e.to, ctx)?;
            if e.capacity < 1 || e.capacity > u32::MAX as i64 {
                return Err(NetworkError::NonPositiveCapacity {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    capacity: e.capacity,
                });
            }
            edges.push(Edge {
                from,
                to,
                capacity: e.capacity as u32,
            });
        }

        let terminals =
            |list: &[String], what: &'static str| -> Result<Vec<NodeIx>, NetworkError> {
                let mut seen = HashSet::new();
                list.iter()
                    .map(|name| {
                        if !seen.insert(name.as_str()) {
                            return Err(NetworkError::DuplicateTerminal(name.clone(), what));
                        }
                        lookup(name, what.to_string())
                    })
                    .collect()
            };
        let sources = terminals(&doc.sources, "sources")?;
        let targets = terminals(&doc.targets, "targets")?;
        if sources.is_empty() {
            return Err(NetworkError::NoSources);
        }
        if targets.is_empty() {
            return Err(NetworkError::NoTargets);
        }

        let topo = topological_order(doc.nodes.len(), edges.iter().map(|e| (e.from, e.to)))
            .map_err(|stuck| {
                NetworkError::Cycle(stuck.into_iter().map(|v| doc.nodes[v].clone()).collect())
            })?;

        Ok(Self {
            names: doc.nodes.clone(),
            index,
            edges,
            sources,
            targets,
            topo,
        })
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            nodes: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    from: self.names[e.from].clone(),
                    to: self.names[e.to].clone(),
                    capacity: e.capacity as i64,
                })
                .collect(),
            sources: self
                .sources
                .iter()
                .map(|&s| self.names[s].clone())
                .collect(),
            targets: self
                .targets
                .iter()
                .map(|&t| self.names[t].clone())
                .collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: NodeIx) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node(&self, name: &str) -> Option<NodeIx> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn sources(&self) -> &[NodeIx] {
        &self.sources
    }

    pub fn targets(&self) -> &[NodeIx] {
        &self.targets
    }

    /// Topological order, ties broken by declaration order.
    pub fn topo_order(&self) -> &[NodeIx] {
        &self.topo
    }

    /// Same network minus the first edge `from -> to`. Returns `None` when no such edge exists.
    pub fn without_edge(&self, from: &str, to: &str) -> Option<Network> {
        let mut doc = self.to_document();
        let pos = doc
            .edges
            .iter()
            .position(|e| e.from == from && e.to == to)?;
        doc.edges.remove(pos);
        Network::from_document(&doc).ok()
    }

    /// Same network plus an edge; fails if the edge closes a cycle.
    pub fn with_edge(&self, from: &str, to: &str, capacity: u32) -> Result<Network, NetworkError> {
        let mut doc = self.to_document();
        doc.edges.push(EdgeDocument {
            from: from.into(),
            to: to.into(),
            capacity: capacity as i64,
        });
        Network::from_document(&doc)
    }

    pub fn expand_capacities(&self) -> UnitNetwork {
        let mut unit = Vec::new();
        let mut parallel: HashMap<(NodeIx, NodeIx), u32> = HashMap::new();
        for (origin, e) in self.edges.iter().enumerate() {
            for _ in 0..e.capacity {
                let k = parallel.entry((e.from, e.to)).or_default();
                unit.push(UnitEdge {
                    from: e.from,
                    to: e.to,
                    parallel: *k,
                    origin,
                });
                *k += 1;
            }
        }
        UnitNetwork::new(self.clone(), unit)
    }

    pub fn multicast_feasible(&self) -> Feasibility {
        self.expand_capacities().multicast_feasible()
    }
}

/// Kahn's algorithm; the smallest ready index goes first. On a cycle, returns
/// the nodes that never became ready.
fn topological_order(
    n: usize,
    arcs: impl Iterator<Item = (NodeIx, NodeIx)>,
) -> Result<Vec<NodeIx>, Vec<NodeIx>> {
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<NodeIx>> = vec![Vec::new(); n];
    for (u, v) in arcs {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut ready: BinaryHeap<Reverse<NodeIx>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse(v));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| indeg[v] > 0).collect())
    }
}

pub type EdgeIx = usize;

/// One unit-capacity copy of an original edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitEdge {
    pub from: NodeIx,
    pub to: NodeIx,
    /// Index among the unit edges sharing `(from, to)`.
    pub parallel: u32,
    /// Index of the original edge in [`Network::edges`].
    pub origin: usize,
}

/// Capacity-expanded multigraph. Per-node incoming and outgoing edge lists
/// are sorted by `(peer name, parallel index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitNetwork {
    network: Network,
    edges: Vec<UnitEdge>,
    incoming: Vec<Vec<EdgeIx>>,
    outgoing: Vec<Vec<EdgeIx>>,
}

impl UnitNetwork {
    fn new(network: Network, edges: Vec<UnitEdge>) -> Self {
        let n = network.node_count();
        let mut incoming: Vec<Vec<EdgeIx>> = vec![Vec::new(); n];
        let mut outgoing: Vec<Vec<EdgeIx>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incoming[e.to].push(i);
            outgoing[e.from].push(i);
        }
        let names = network.names();
        for list in &mut incoming {
            list.sort_by(|&a, &b| {
                (names[edges[a].from].as_str(), edges[a].parallel)
                    .cmp(&(names[edges[b].from].as_str(), edges[b].parallel))
            });
        }
        for list in &mut outgoing {
            list.sort_by(|&a, &b| {
                (names[edges[a].to].as_str(), edges[a].parallel)
                    .cmp(&(names[edges[b].to].as_str(), edges[b].parallel))
            });
        }
        Self {
            network,
            edges,
            incoming,
            outgoing,
        }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn edges(&self) -> &[UnitEdge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIx) -> &UnitEdge {
        &self.edges[e]
    }

    pub fn incoming(&self, v: NodeIx) -> &[EdgeIx] {
        &self.incoming[v]
    }

    pub fn outgoing(&self, v: NodeIx) -> &[EdgeIx] {
        &self.outgoing[v]
    }

    /// Display label `from->to`, with `#k` appended for the k-th parallel copy (k > 0).
    pub fn edge_label(&self, e: EdgeIx) -> String {
        let edge = &self.edges[e];
        let base = format!(
            "{}->{}",
            self.network.name(edge.from),
            self.network.name(edge.to)
        );
        if edge.parallel == 0 {
            base
        } else {
            format!("{base}#{}", edge.parallel)
        }
    }

    /// Maximum `src -> sink` flow; each unit edge carries at most one unit.
    pub fn max_flow(&self, src: NodeIx, sink: NodeIx) -> u32 {
        let mut g = FlowGraph::new(self.network.node_count());
        for e in &self.edges {
            g.add_edge(e.from, e.to, 1);
        }
        g.max_flow(src, sink)
    }

    /// Attaches a super-source with one unit edge into every source and checks
    /// that each target receives flow at least `|S|` from it.
    pub fn multicast_feasible(&self) -> Feasibility {
        let n = self.network.node_count();
        let sigma = n;
        let mut base = FlowGraph::new(n + 1);
        for e in &self.edges {
            base.add_edge(e.from, e.to, 1);
        }
        for &s in self.network.sources() {
            base.add_edge(sigma, s, 1);
        }
        let required = self.network.sources().len() as u32;
        let mut flows = Vec::new();
        let mut violation = None;
        for &t in self.network.targets() {
            let flow = base.clone().max_flow(sigma, t);
            let name = self.network.name(t).to_string();
            if flow < required && violation.is_none() {
                violation = Some((name.clone(), flow));
            }
            flows.push(TargetFlow { target: name, flow });
        }
        match violation {
            None => Feasibility::Feasible { required, flows },
            Some((target, flow)) => Feasibility::Infeasible {
                target,
                flow,
                required,
                flows,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TargetFlow {
    pub target: String,
    pub flow: u32,
}

/// Outcome of the min-cut max-flow test. `Infeasible` names the first target
/// (in target order) whose flow falls short.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Feasibility {
    Feasible {
        required: u32,
        flows: Vec<TargetFlow>,
    },
    Infeasible {
        target: String,
        flow: u32,
        required: u32,
        flows: Vec<TargetFlow>,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn flows(&self) -> &[TargetFlow] {
        match self {
            Feasibility::Feasible { flows, .. } | Feasibility::Infeasible { flows, .. } => flows,
        }
    }
}

/// Residual graph for Edmonds-Karp.
#[derive(Debug, Clone)]
struct FlowGraph {
    adj: Vec<Vec<usize>>,
    // arcs[2k] is forward, arcs[2k+1] its reverse.
    head: Vec<usize>,
    cap: Vec<u32>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            head: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: u32) {
        self.adj[u].push(self.head.len());
        self.head.push(v);
        self.cap.push(c);
        self.adj[v].push(self.head.len());
        self.head.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u32 {
        if s == t {
            return 0;
        }
        let mut total = 0;
        loop {
            let mut via: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.head[a];
                    if self.cap[a] > 0 && !seen[v] {
                        seen[v] = true;
                        via[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = u32::MAX;
            let mut v = t;
            while let Some(a) = via[v] {
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.head[a ^ 1];
            }
            let mut v = t;
            while let Some(a) = via[v] {
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.head[a ^ 1];
            }
            total += bottleneck;
        }
    }
}
