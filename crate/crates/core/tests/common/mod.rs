#![allow(dead_code)]

use proptest::prelude::*;
use qnetcode::netgraph::{parse_network, Network};
use serde_json::json;

/// A random DAG over nodes `v0..v{n-1}`: edges only go from lower to higher index.
#[derive(Debug, Clone)]
pub struct Dag {
    pub n: usize,
    pub edges: Vec<(usize, usize, u32)>,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
}

impl Dag {
    pub fn json(&self) -> String {
        json!({
            "nodes": (0..self.n).map(|i| format!("v{i}")).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(a, b, c)| json!({"from": format!("v{a}"), "to": format!("v{b}"), "capacity": c})).collect::<Vec<_>>(),
            "sources": self.sources.iter().map(|i| format!("v{i}")).collect::<Vec<_>>(),
            "targets": self.targets.iter().map(|i| format!("v{i}")).collect::<Vec<_>>(),
        })
        .to_string()
    }

    pub fn network(&self) -> Network {
        parse_network(&self.json()).expect("generated DAG is valid")
    }
}

/// Up to `max_edges` edges on `2..=max_nodes` nodes; sources are drawn from the
/// first half, targets from the second.
pub fn dag(max_nodes: usize, max_edges: usize, max_cap: u32) -> impl Strategy<Value = Dag> {
    (3..=max_nodes).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let edges = proptest::collection::vec(
            (proptest::sample::select(pairs), 1..=max_cap),
            0..=max_edges,
        );
        let half = n / 2;
        let sources = proptest::sample::subsequence((0..half).collect::<Vec<_>>(), 1..=half.min(2));
        let targets =
            proptest::sample::subsequence((half..n).collect::<Vec<_>>(), 1..=(n - half).min(3));
        (Just(n), edges, sources, targets).prop_map(|(n, edges, sources, targets)| Dag {
            n,
            edges: edges.into_iter().map(|((a, b), c)| (a, b, c)).collect(),
            sources,
            targets,
        })
    })
}

/// Minimum over all vertex bipartitions separating `s` from `t` of the
/// capacity crossing from the `s` side to the `t` side.
pub fn brute_min_cut(n: usize, edges: &[(usize, usize, u32)], s: usize, t: usize) -> u32 {
    if s == t {
        return u32::MAX;
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    (0u32..1 << others.len())
        .map(|mask| {
            let mut side = vec![false; n];
            side[s] = true;
            for (k, &v) in others.iter().enumerate() {
                side[v] = mask >> k & 1 == 1;
            }
            edges
                .iter()
                .filter(|&&(a, b, _)| side[a] && !side[b])
                .map(|&(_, _, c)| c)
                .sum()
        })
        .min()
        .unwrap_or(0)
}
