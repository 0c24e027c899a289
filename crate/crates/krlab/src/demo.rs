//! Built-in demonstration fixtures: the two-link relay, its serial and
//! parallel generalizations, and a seeded generator of random valid linear
//! protocols for oracle cross-checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::expr::{LinExpr, Var};
use crate::net::{Graph, Side, TopologyDoc, WiretapCollection};
use crate::proto::{Goal, Protocol, Setting, Step};

fn graph_from_json(json: &str) -> Arc<Graph> {
    let doc: TopologyDoc = serde_json::from_str(json).expect("fixture topology parses");
    Arc::new(Graph::from_doc(&doc).expect("fixture topology valid"))
}

/// The simplest relay: u1 - v - u2 over two locally keyed edges. The
/// midpoint announces the difference of the two local keys and both users
/// end up holding r_{e1}.
pub fn fig1() -> Protocol {
    let graph = graph_from_json(
        r#"{
          "nodes": ["u1", "v", "u2"],
          "edges": [
            {"id": "e1", "ends": ["u1", "v"]},
            {"id": "e2", "ends": ["v", "u2"]}
          ],
          "users": [{"i": 0, "u1": "u1", "u2": "u2"}]
        }"#,
    );
    let e1 = graph.edge_index("e1").unwrap();
    let e2 = graph.edge_index("e2").unwrap();
    let v = graph.node_index("v").unwrap();
    let mut p = Protocol::new(graph, Setting::Krp);
    p.schedule.push(Step::StartLks { edge: e1, from: v });
    p.schedule.push(Step::StartLks { edge: e2, from: v });
    p.schedule.push(Step::SendPc {
        edge: e2,
        from: v,
        payload: LinExpr::var(Var::LocalKey(e1)).xor_var(Var::LocalKey(e2)),
    });
    p.outputs
        .insert((0, Side::U1), LinExpr::var(Var::LocalKey(e1)));
    p.outputs.insert(
        (0, Side::U2),
        LinExpr::var(Var::LocalKey(e2))
            .xor(&LinExpr::var(Var::LocalKey(e1)).xor_var(Var::LocalKey(e2))),
    );
    p
}

/// fig1 with both local key sources replaced by node-generated bits over
/// secret channels; used by transform tests.
pub fn fig1_as_snc_pc() -> Protocol {
    crate::transform::lks_to_sc(&fig1())
        .expect("fig1 converts")
        .0
}

/// Serial relay over `n` edges: u1 = w0 - w1 - ... - wn = u2. Midpoints
/// announce adjacent differences; u2 telescopes them back to r_{e1}.
pub fn fig3a(n: usize) -> Protocol {
    assert!(n >= 2, "serial relay needs at least two edges");
    let nodes: Vec<String> = (0..=n)
        .map(|i| {
            if i == 0 {
                "u1".to_string()
            } else if i == n {
                "u2".to_string()
            } else {
                format!("v{i}")
            }
        })
        .collect();
    let doc = TopologyDoc {
        nodes: nodes.clone(),
        edges: nodes
            .windows(2)
            .enumerate()
            .map(|(i, pair)| crate::net::EdgeDoc {
                id: format!("e{}", i + 1),
                ends: [pair[0].clone(), pair[1].clone()],
            })
            .collect(),
        users: vec![crate::net::UserDoc {
            i: 0,
            u1: "u1".into(),
            u2: "u2".into(),
            sender: None,
        }],
        wiretap: None,
    };
    let graph = Arc::new(Graph::from_doc(&doc).unwrap());
    let mut p = Protocol::new(graph.clone(), Setting::Krp);
    let edge = |i: usize| graph.edge_index(&format!("e{i}")).unwrap();
    for i in 1..=n {
        let from = graph.node_index(&nodes[i - 1]).unwrap();
        p.schedule.push(Step::StartLks {
            edge: edge(i),
            from,
        });
    }
    // v_i announces r_i ^ r_{i+1} toward u2.
    #[allow(clippy::needless_range_loop)]
    for i in 1..n {
        let from = graph.node_index(&nodes[i]).unwrap();
        p.schedule.push(Step::SendPc {
            edge: edge(i + 1),
            from,
            payload: LinExpr::var(Var::LocalKey(edge(i))).xor_var(Var::LocalKey(edge(i + 1))),
        });
    }
    p.outputs
        .insert((0, Side::U1), LinExpr::var(Var::LocalKey(edge(1))));
    let mut k2 = LinExpr::var(Var::LocalKey(edge(n)));
    for i in 1..n {
        k2 = k2.xor(&LinExpr::var(Var::LocalKey(edge(i))).xor_var(Var::LocalKey(edge(i + 1))));
    }
    p.outputs.insert((0, Side::U2), k2);
    p
}

/// Parallel relay over two disjoint two-edge routes. Secure even when one
/// whole route is wiretapped, since the relayed key is the XOR of the two
/// route keys.
pub fn fig3b() -> Protocol {
    let graph = graph_from_json(
        r#"{
          "nodes": ["u1", "v1", "v2", "u2"],
          "edges": [
            {"id": "e11", "ends": ["u1", "v1"]},
            {"id": "e12", "ends": ["v1", "u2"]},
            {"id": "e21", "ends": ["u1", "v2"]},
            {"id": "e22", "ends": ["v2", "u2"]}
          ],
          "users": [{"i": 0, "u1": "u1", "u2": "u2"}]
        }"#,
    );
    let e = |id: &str| graph.edge_index(id).unwrap();
    let (e11, e12, e21, e22) = (e("e11"), e("e12"), e("e21"), e("e22"));
    let v1 = graph.node_index("v1").unwrap();
    let v2 = graph.node_index("v2").unwrap();
    let mut p = Protocol::new(graph, Setting::Krp);
    for (edge, from) in [(e11, v1), (e12, v1), (e21, v2), (e22, v2)] {
        p.schedule.push(Step::StartLks { edge, from });
    }
    p.schedule.push(Step::SendPc {
        edge: e12,
        from: v1,
        payload: LinExpr::var(Var::LocalKey(e11)).xor_var(Var::LocalKey(e12)),
    });
    p.schedule.push(Step::SendPc {
        edge: e22,
        from: v2,
        payload: LinExpr::var(Var::LocalKey(e21)).xor_var(Var::LocalKey(e22)),
    });
    p.outputs.insert(
        (0, Side::U1),
        LinExpr::var(Var::LocalKey(e11)).xor_var(Var::LocalKey(e21)),
    );
    // k2 sums the second-hop keys with the announcements; this telescopes
    // back to k1 (the figure caption's index typo corrected).
    let k2 = LinExpr::var(Var::LocalKey(e12))
        .xor_var(Var::LocalKey(e11))
        .xor_var(Var::LocalKey(e12))
        .xor(
            &LinExpr::var(Var::LocalKey(e22))
                .xor_var(Var::LocalKey(e21))
                .xor_var(Var::LocalKey(e22)),
        );
    p.outputs.insert((0, Side::U2), k2);
    p
}

/// Wiretap collections the fig3b fixture is analyzed against: each full
/// route as one member.
pub fn fig3b_wiretap(p: &Protocol) -> WiretapCollection {
    WiretapCollection::from_ids(
        &p.graph,
        &[
            vec!["e11".into(), "e12".into()],
            vec!["e21".into(), "e22".into()],
        ],
    )
    .unwrap()
}

/// A seeded random valid linear protocol with at most `max_vars`
/// fundamental variables, together with a wiretap collection. Valid by
/// construction: every payload and output is sampled from the sender's
/// knowledge span at that point.
pub fn random_protocol(seed: u64, max_vars: usize) -> (Protocol, WiretapCollection) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n_nodes = rng.gen_range(3..=5usize);
    let mut nodes: Vec<String> = (0..n_nodes).map(|i| format!("n{i}")).collect();
    nodes.sort();
    // Random spanning tree plus a few extra edges.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n_nodes {
        edges.push((rng.gen_range(0..i), i));
    }
    for _ in 0..rng.gen_range(0..3usize) {
        let a = rng.gen_range(0..n_nodes);
        let b = rng.gen_range(0..n_nodes);
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a, b));
        }
    }
    let n_pairs = rng.gen_range(1..=2usize).min(n_nodes / 2);
    let setting = *[
        Setting::Krp,
        Setting::SncPc,
        Setting::Snc,
        Setting::KrpBySnc,
    ]
    .choose(&mut rng)
    .unwrap();
    let doc = TopologyDoc {
        nodes: nodes.clone(),
        edges: edges
            .iter()
            .enumerate()
            .map(|(i, (a, b))| crate::net::EdgeDoc {
                id: format!("e{i}"),
                ends: [nodes[*a].clone(), nodes[*b].clone()],
            })
            .collect(),
        users: (0..n_pairs)
            .map(|i| crate::net::UserDoc {
                i,
                u1: nodes[2 * i].clone(),
                u2: nodes[2 * i + 1].clone(),
                sender: if setting.default_goal() == Goal::Messages {
                    Some(Side::U1)
                } else {
                    None
                },
            })
            .collect(),
        wiretap: None,
    };
    let graph = Arc::new(Graph::from_doc(&doc).unwrap());
    let mut p = Protocol::new(graph.clone(), setting);

    // Knowledge tracking in terms of expressions, mirroring the validator.
    let mut known: Vec<Vec<LinExpr>> = vec![Vec::new(); n_nodes];
    let mut var_budget = max_vars;
    for (node, pool) in known.iter_mut().enumerate() {
        for k in 0..rng.gen_range(0..=2u32) {
            if var_budget == 0 {
                break;
            }
            pool.push(LinExpr::var(Var::NodeRandom(node, k)));
            var_budget -= 1;
        }
    }
    if setting.default_goal() == Goal::Messages {
        for i in 0..n_pairs {
            if var_budget == 0 {
                break;
            }
            known[graph.users()[i].u1].push(LinExpr::var(Var::Message(i)));
            var_budget -= 1;
        }
    }

    let mut sc_free: BTreeSet<usize> = (0..graph.edge_count()).collect();
    let mut lks_free: BTreeSet<usize> = (0..graph.edge_count()).collect();
    let mut publics: Vec<LinExpr> = Vec::new();
    let sample_from = |rng: &mut ChaCha20Rng, pool: &[LinExpr]| -> Option<LinExpr> {
        if pool.is_empty() {
            return None;
        }
        let mut e = LinExpr::constant(rng.gen());
        for _ in 0..rng.gen_range(1..=3usize) {
            e = e.xor(pool.choose(rng).unwrap());
        }
        Some(e)
    };
    for _ in 0..rng.gen_range(4..=10usize) {
        let kind = rng.gen_range(0..3u8);
        match kind {
            0 if setting.allows_lks() && var_budget > 0 => {
                let Some(&edge) = lks_free.iter().choose(&mut rng) else {
                    continue;
                };
                lks_free.remove(&edge);
                var_budget -= 1;
                let from = graph.edge(edge).a;
                p.schedule.push(Step::StartLks { edge, from });
                let expr = LinExpr::var(Var::LocalKey(edge));
                known[graph.edge(edge).a].push(expr.clone());
                known[graph.edge(edge).b].push(expr);
            }
            1 if setting.allows_sc() => {
                let Some(&edge) = sc_free.iter().choose(&mut rng) else {
                    continue;
                };
                let from = if rng.gen() {
                    graph.edge(edge).a
                } else {
                    graph.edge(edge).b
                };
                let Some(payload) = sample_from(&mut rng, &known[from]) else {
                    continue;
                };
                sc_free.remove(&edge);
                let to = graph.edge(edge).other_end(from).unwrap();
                known[to].push(payload.clone());
                p.schedule.push(Step::SendSc {
                    edge,
                    from,
                    payload,
                });
            }
            _ if setting.allows_pc() => {
                let edge = rng.gen_range(0..graph.edge_count());
                let from = if rng.gen() {
                    graph.edge(edge).a
                } else {
                    graph.edge(edge).b
                };
                let Some(payload) = sample_from(&mut rng, &known[from]) else {
                    continue;
                };
                let to = graph.edge(edge).other_end(from).unwrap();
                known[to].push(payload.clone());
                publics.push(payload.clone());
                p.schedule.push(Step::SendPc {
                    edge,
                    from,
                    payload,
                });
            }
            _ => {}
        }
    }
    // Outputs: anything the user can compute (own knowledge plus publics).
    for i in 0..n_pairs {
        for side in [Side::U1, Side::U2] {
            let node = graph.users()[i].node(side);
            let mut pool = known[node].clone();
            pool.extend(publics.iter().cloned());
            let expr = sample_from(&mut rng, &pool).unwrap_or_else(LinExpr::zero);
            p.outputs.insert((i, side), expr);
        }
    }
    // For message goals the canonical decode may not exist; a key-style
    // goal keeps the fixture valid without changing the secrecy question.
    p.goal = Goal::Keys;

    let mut members = Vec::new();
    for _ in 0..rng.gen_range(1..=3usize) {
        let mut m = BTreeSet::new();
        for e in 0..graph.edge_count() {
            if rng.gen_bool(0.3) {
                m.insert(e);
            }
        }
        members.push(m);
    }
    if members.is_empty() {
        members.push(BTreeSet::new());
    }
    (p, WiretapCollection { members })
}
