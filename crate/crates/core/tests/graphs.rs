mod common;

use common::{brute_min_cut, dag};
use proptest::prelude::*;
use qnetcode::gf::choose_field_size;
use qnetcode::netcode::{construct_linear_code, CodeError, Port};
use qnetcode::netgraph::{parse_network, Feasibility};
use qnetcode::oracle::fixtures;

#[test]
fn butterfly_with_super_source_has_flow_two() {
    let mut doc = fixtures::get("butterfly").unwrap().network().to_document();
    doc.nodes.push("sigma".into());
    for s in ["s1", "s2"] {
        doc.edges.push(qnetcode::netgraph::EdgeDocument {
            from: "sigma".into(),
            to: s.into(),
            capacity: 1,
        });
    }
    let net = parse_network(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(net.edges().len(), 9);
    let unit = net.expand_capacities();
    let sigma = net.node("sigma").unwrap();
    let edges: Vec<(usize, usize, u32)> = net
        .edges()
        .iter()
        .map(|e| (e.from, e.to, e.capacity))
        .collect();
    for t in ["t1", "t2"] {
        let t = net.node(t).unwrap();
        assert_eq!(unit.max_flow(sigma, t), 2);
        assert_eq!(brute_min_cut(net.node_count(), &edges, sigma, t), 2);
    }
}

#[test]
fn cut_butterfly_reports_first_target_with_flow_one() {
    let net = fixtures::get("butterfly_cut").unwrap().network();
    match net.multicast_feasible() {
        Feasibility::Infeasible {
            target,
            flow,
            required,
            flows,
        } => {
            assert_eq!((target.as_str(), flow, required), ("t1", 1, 2));
            assert!(flows.iter().all(|f| f.flow == 1));
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn field_size_examples() {
    assert_eq!(
        choose_field_size(&fixtures::get("butterfly").unwrap().network()),
        2
    );
    assert_eq!(
        choose_field_size(&fixtures::get("ternary").unwrap().network()),
        3
    );
    let four = r#"{"nodes":["s","a","b","c","d"],"edges":[{"from":"s","to":"a","capacity":1},{"from":"s","to":"b","capacity":1},{"from":"s","to":"c","capacity":1},{"from":"s","to":"d","capacity":1}],"sources":["s"],"targets":["a","b","c","d"]}"#;
    assert_eq!(choose_field_size(&parse_network(four).unwrap()), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn max_flow_equals_brute_force_min_cut(d in dag(6, 10, 3)) {
        let net = d.network();
        let unit = net.expand_capacities();
        for s in 0..d.n {
            for t in 0..d.n {
                if s != t {
                    prop_assert_eq!(unit.max_flow(s, t), brute_min_cut(d.n, &d.edges, s, t), "{} -> {}", s, t);
                }
            }
        }
    }

    #[test]
    fn expansion_keeps_capacity_per_edge(d in dag(6, 10, 4)) {
        let net = d.network();
        let unit = net.expand_capacities();
        for (k, e) in net.edges().iter().enumerate() {
            let copies = unit.edges().iter().filter(|u| u.origin == k).count() as u32;
            prop_assert_eq!(copies, e.capacity);
            prop_assert!(unit.edges().iter().filter(|u| u.origin == k).all(|u| u.from == e.from && u.to == e.to));
        }
    }

    #[test]
    fn adding_an_edge_keeps_feasibility(d in dag(7, 10, 2), a in 0usize..7, b in 0usize..7) {
        let net = d.network();
        prop_assume!(net.multicast_feasible().is_feasible());
        let (a, b) = (a.min(b) % d.n, a.max(b) % d.n);
        prop_assume!(a < b);
        let bigger = net.with_edge(&format!("v{a}"), &format!("v{b}"), 1).unwrap();
        prop_assert!(bigger.multicast_feasible().is_feasible());
    }

    #[test]
    fn constructed_codes_decode_and_obey_propagation(d in dag(7, 12, 2), extra in 0u64..3, seed in any::<u64>()) {
        let net = d.network();
        prop_assume!(net.multicast_feasible().is_feasible());
        let p = [choose_field_size(&net), 5, 7][extra as usize].max(choose_field_size(&net));
        let unit = net.expand_capacities();
        let code = match construct_linear_code(&unit, p, seed) {
            Ok(code) => code,
            Err(CodeError::RetryBudgetExhausted { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let field = code.field();
        for step in code.steps() {
            for (j, &out) in step.outputs.iter().enumerate() {
                let mut acc = vec![0; code.rate()];
                for (i, &inp) in step.inputs.iter().enumerate() {
                    field.axpy(&mut acc, step.gamma[i][j], &code.port_vector(step.node, inp));
                }
                match out {
                    Port::Edge(e) => prop_assert_eq!(&acc[..], code.global_vector(e)),
                    Port::VirtualOut(i) => prop_assert_eq!(acc, field.unit_vector(code.rate(), i)),
                    Port::VirtualIn(_) => unreachable!(),
                }
            }
        }
        let h = code.rate() as u32;
        for idx in 0..p.pow(h) {
            let input: Vec<u64> = (0..h).map(|k| idx / p.pow(h - 1 - k) % p).collect();
            for (_, got) in code.classical_simulate(&input).unwrap() {
                prop_assert_eq!(&got, &input);
            }
        }
    }
}
