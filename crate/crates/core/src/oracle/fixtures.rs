//! Networks shipped with the crate.

use crate::netgraph::{parse_network, Network};

pub const SINGLE_EDGE: &str = include_str!("../../fixtures/single_edge.json");
pub const TWO_PATHS: &str = include_str!("../../fixtures/two_paths.json");
pub const BUTTERFLY: &str = include_str!("../../fixtures/butterfly.json");
pub const BUTTERFLY_CUT: &str = include_str!("../../fixtures/butterfly_cut.json");
pub const TERNARY: &str = include_str!("../../fixtures/ternary.json");
pub const COMBINATION_4_2: &str = include_str!("../../fixtures/combination_4_2.json");

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub json: &'static str,
    pub feasible: bool,
    /// Field used for runs; `None` means the default choice.
    pub field: Option<u64>,
    /// Whether an end-to-end state-vector run fits the memory budget.
    pub simulable: bool,
}

impl Fixture {
    pub fn network(&self) -> Network {
        parse_network(self.json).expect("shipped fixture parses")
    }
}

pub const ALL: [Fixture; 6] = [
    Fixture {
        name: "single_edge",
        json: SINGLE_EDGE,
        feasible: true,
        field: None,
        simulable: true,
    },
    Fixture {
        name: "two_paths",
        json: TWO_PATHS,
        feasible: true,
        field: None,
        simulable: true,
    },
    Fixture {
        name: "butterfly",
        json: BUTTERFLY,
        feasible: true,
        field: None,
        simulable: true,
    },
    Fixture {
        name: "butterfly_cut",
        json: BUTTERFLY_CUT,
        feasible: false,
        field: None,
        simulable: false,
    },
    Fixture {
        name: "ternary",
        json: TERNARY,
        feasible: true,
        field: None,
        simulable: true,
    },
    Fixture {
        name: "combination_4_2",
        json: COMBINATION_4_2,
        feasible: true,
        field: Some(3),
        simulable: false,
    },
];

pub fn get(name: &str) -> Option<Fixture> {
    ALL.iter().copied().find(|f| f.name == name)
}
