//! The relay protocol on the counterexample graph, in both of its
//! formulations, and its security verification.
//!
//! The parity form fires every local key source, then has each butterfly
//! node announce fixed parities of its local keys (nine per subgraph, 162
//! public bits in total), and lets the users assemble their keys from
//! their own key and the announcements. The interactive form realizes the
//! same keys with the butterfly network coding run over one-time-padded
//! announcements followed by a serial relay along each standard path. Both
//! yield k_i^1 = k_i^2 = r[e_{1,i+8}^(2)].

use crate::error::KrlabError;
use crate::expr::{LinExpr, Var};
use crate::net::{Side, WiretapCollection};
use crate::proto::{Protocol, Setting, Step};
use crate::sec::{analyze, SecurityReport};

use super::graph::{build_g0, G0Labels, PATHS};

fn key(edge: usize) -> LinExpr {
    LinExpr::var(Var::LocalKey(edge))
}

/// The nine per-node parities of one subgraph, with the announcing node's
/// alpha index: two at v0, one at v1, two at v2, one at v3, one at v4, two
/// at v5.
fn subgraph_parities(labels: &G0Labels, s: usize, i: usize) -> Vec<(usize, LinExpr)> {
    let b = |beta: usize| key(labels.boundary_edge(s, i, beta));
    let e = |k: usize| key(labels.internal_edge(s, i, k));
    vec![
        (0, b(0).xor(&e(4))),
        (0, e(4).xor(&e(6))),
        (1, e(8).xor(&e(10)).xor(&b(1))),
        (2, e(5).xor(&e(8))),
        (2, b(2).xor(&e(5))),
        (3, e(6).xor(&e(9)).xor(&b(3))),
        (4, e(4).xor(&e(5)).xor(&e(7))),
        (5, e(7).xor(&e(10))),
        (5, e(7).xor(&e(9))),
    ]
}

/// Aggregate parities: the five per-node parities that telescope to
/// r[e^(0)] ^ r[e^(1)] (index 0) and r[e^(2)] ^ r[e^(3)] (index 1).
fn aggregate_parity(labels: &G0Labels, s: usize, i: usize, which: usize) -> LinExpr {
    let ps = subgraph_parities(labels, s, i);
    let pick = |indices: [usize; 5]| {
        indices
            .iter()
            .fold(LinExpr::zero(), |acc, &j| acc.xor(&ps[j].1))
    };
    match which {
        // p[v0,1] ^ p[v4] ^ p[v2,1] ^ p[v5,1] ^ p[v1]
        0 => pick([0, 6, 3, 7, 2]),
        // p[v2,2] ^ p[v4] ^ p[v0,2] ^ p[v5,2] ^ p[v3]
        1 => pick([4, 6, 1, 8, 5]),
        _ => unreachable!("two aggregates per subgraph"),
    }
}

fn lowest_incident_edge(p: &Protocol, node: usize) -> usize {
    *p.graph
        .incident_edges(node)
        .first()
        .expect("every node has an edge")
}

/// The parity form: all 171 key sources, then the 162 parity
/// announcements, then per-pair key assembly.
pub fn build_lkrp() -> (Protocol, G0Labels) {
    let (graph, labels) = build_g0();
    let mut p = Protocol::new(graph.clone(), Setting::Krp);
    for edge in 0..graph.edge_count() {
        p.schedule.push(Step::StartLks {
            edge,
            from: graph.edge(edge).a,
        });
    }
    for s in 1..=2 {
        for i in 0..PATHS {
            for (alpha, parity) in subgraph_parities(&labels, s, i) {
                let from = labels.node(s, i, alpha);
                p.schedule.push(Step::SendPc {
                    edge: lowest_incident_edge(&p, from),
                    from,
                    payload: parity,
                });
            }
        }
    }
    for i in 0..PATHS {
        let k1 = key(labels.boundary_edge(1, i + 8, 2));
        let k2 = aggregate_parity(&labels, 2, 2 * i, 1)
            .xor(&aggregate_parity(&labels, 1, i + 8, 1))
            .xor(&aggregate_parity(&labels, 1, i, 0))
            .xor(&aggregate_parity(&labels, 2, 2 * i + 1, 0))
            .xor(&key(labels.boundary_edge(2, 2 * i + 1, 1)));
        p.outputs.insert((i, Side::U1), k1);
        p.outputs.insert((i, Side::U2), k2);
    }
    (p, labels)
}

/// The message-passing form: butterfly network coding inside every
/// subgraph over one-time-padded announcements, then the serial relay
/// along each standard path.
pub fn build_lkrp_interactive() -> (Protocol, G0Labels) {
    let (graph, labels) = build_g0();
    let mut p = Protocol::new(graph.clone(), Setting::Krp);
    // Boundary key sources first: their keys are the payload of the
    // butterfly step.
    let mut st = labels.st_edges();
    st.sort_unstable();
    for edge in st {
        p.schedule.push(Step::StartLks {
            edge,
            from: graph.edge(edge).a,
        });
    }
    // Emulated secret transmission v -> w of `payload` across an internal
    // edge: fire the edge's key source, then announce payload ^ r_edge.
    let emulate = |p: &mut Protocol, edge: usize, from: usize, payload: LinExpr| {
        p.schedule.push(Step::StartLks { edge, from });
        p.schedule.push(Step::SendPc {
            edge,
            from,
            payload: payload.xor_var(Var::LocalKey(edge)),
        });
    };
    for s in 1..=2 {
        for i in 0..PATHS {
            let r0 = key(labels.boundary_edge(s, i, 0));
            let r2 = key(labels.boundary_edge(s, i, 2));
            let both = r0.clone().xor(&r2);
            let v = |alpha: usize| labels.node(s, i, alpha);
            let e = |k: usize| labels.internal_edge(s, i, k);
            emulate(&mut p, e(6), v(0), r0.clone());
            emulate(&mut p, e(4), v(0), r0.clone());
            emulate(&mut p, e(8), v(2), r2.clone());
            emulate(&mut p, e(5), v(2), r2.clone());
            emulate(&mut p, e(7), v(4), both.clone());
            emulate(&mut p, e(10), v(5), both.clone());
            emulate(&mut p, e(9), v(5), both.clone());
        }
    }
    // Serial relay: the four mid-path nodes of each path announce the
    // parity of their two path keys.
    for i in 0..PATHS {
        let path = labels.standard_path(i);
        let r = |gamma: usize| key(path.edges[gamma]);
        let announcers = [
            (labels.node(1, i + 8, 3), r(0).xor(&r(1))),
            (labels.node(1, i, 1), r(1).xor(&r(2))),
            (labels.node(2, 2 * i, 3), r(2).xor(&r(3))),
            (labels.node(2, 2 * i + 1, 1), r(3).xor(&r(4))),
        ];
        for (from, payload) in announcers {
            p.schedule.push(Step::SendPc {
                edge: lowest_incident_edge(&p, from),
                from,
                payload,
            });
        }
    }
    for i in 0..PATHS {
        let path = labels.standard_path(i);
        let r = |gamma: usize| key(path.edges[gamma]);
        p.outputs.insert((i, Side::U1), r(0));
        let k2 = r(4)
            .xor(&r(0).xor(&r(1)))
            .xor(&r(1).xor(&r(2)))
            .xor(&r(2).xor(&r(3)))
            .xor(&r(3).xor(&r(4)));
        p.outputs.insert((i, Side::U2), k2);
    }
    (p, labels)
}

/// Security of the relay protocol against the empty wiretap collection.
pub fn verify_lkrp() -> Result<SecurityReport, KrlabError> {
    let (p, _) = build_lkrp();
    analyze(&p, &WiretapCollection::empty_member())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::symbolic_execute;
    use crate::sec::Verdict;

    #[test]
    fn parity_form_validates_with_162_public_bits() {
        let (p, _) = build_lkrp();
        assert!(p.validate().is_valid(), "{}", p.validate());
        let publics = p
            .schedule
            .iter()
            .filter(|s| matches!(s, Step::SendPc { .. }))
            .count();
        assert_eq!(publics, 162);
        let lks = p
            .schedule
            .iter()
            .filter(|s| matches!(s, Step::StartLks { .. }))
            .count();
        assert_eq!(lks, 171);
    }

    #[test]
    fn aggregates_telescope_to_boundary_parities() {
        let (p, labels) = build_lkrp();
        for s in 1..=2 {
            for i in 0..PATHS {
                let expect0 =
                    key(labels.boundary_edge(s, i, 0)).xor(&key(labels.boundary_edge(s, i, 1)));
                assert_eq!(
                    aggregate_parity(&labels, s, i, 0),
                    expect0,
                    "G[{s},{i}] aggregate 0"
                );
                let expect1 =
                    key(labels.boundary_edge(s, i, 2)).xor(&key(labels.boundary_edge(s, i, 3)));
                assert_eq!(
                    aggregate_parity(&labels, s, i, 1),
                    expect1,
                    "G[{s},{i}] aggregate 1"
                );
            }
        }
        drop(p);
    }

    #[test]
    fn keys_collapse_to_the_shared_local_key() {
        let (p, labels) = build_lkrp();
        let t = symbolic_execute(&p).unwrap();
        for i in 0..PATHS {
            let col = t
                .column(&Var::LocalKey(labels.boundary_edge(1, i + 8, 2)))
                .unwrap();
            for side in [Side::U1, Side::U2] {
                let out = &t.outputs[&(i, side)];
                assert_eq!(
                    out.vec.ones().collect::<Vec<_>>(),
                    vec![col],
                    "pair {i} {side:?}"
                );
                assert!(!out.constant);
            }
        }
    }

    #[test]
    fn interactive_form_matches_parity_form() {
        let (a, _) = build_lkrp();
        let (b, _) = build_lkrp_interactive();
        assert!(b.validate().is_valid(), "{}", b.validate());
        let ta = symbolic_execute(&a).unwrap();
        let tb = symbolic_execute(&b).unwrap();
        assert_eq!(ta.basis, tb.basis);
        assert_eq!(ta.outputs, tb.outputs);
        assert_eq!(tb.public_steps.len(), 162);
    }

    #[test]
    fn lkrp_in_both_phases_orders_lks_before_pc() {
        let (p, _) = build_lkrp();
        let last_lks = p
            .schedule
            .iter()
            .rposition(|s| matches!(s, Step::StartLks { .. }))
            .unwrap();
        let first_pc = p
            .schedule
            .iter()
            .position(|s| matches!(s, Step::SendPc { .. }))
            .unwrap();
        assert!(last_lks < first_pc);
    }

    #[test]
    fn secure_against_nothing_wiretapped() {
        let report = verify_lkrp().unwrap();
        assert!(report.soundness.pass);
        assert_eq!(report.verdict, Verdict::Secure);
        assert_eq!(report.secrecy[0].rank_view, 162);
        assert_eq!(report.secrecy[0].leak, 0);
        // The joint rank exceeds the public rank by exactly the 9 keys.
        assert_eq!(
            report.secrecy[0].rank_joint,
            report.secrecy[0].rank_view + 9
        );
    }

    #[test]
    fn wiretapping_the_key_edge_leaks() {
        let (p, labels) = build_lkrp();
        let member = labels.boundary_edge(1, 8, 2);
        let w = WiretapCollection {
            members: vec![std::iter::once(member).collect()],
        };
        let report = analyze(&p, &w).unwrap();
        assert_eq!(report.verdict, Verdict::Insecure);
        assert!(report.secrecy[0].leak >= 1);
    }
}
