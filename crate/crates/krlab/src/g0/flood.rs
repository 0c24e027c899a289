//! A store-and-forward KRP-by-SNC candidate on the counterexample graph.
//!
//! A single bit is seeded at one spot and flooded over every standard
//! path, each subgraph storing it on arrival (one internal spanning
//! traversal) and forwarding it on its remaining boundary edges. Every
//! path edge then conveys exactly the relayed key, with the orders and
//! flow directions the path lemmas describe.
//!
//! No valid KRP-by-SNC on this graph can make the nine pair keys
//! independent — that is the theorem the graph exists to witness, and the
//! butterfly bottlenecks enforce it through causality — so this candidate
//! shares ONE bit among all pairs: per-pair equality and uniformity hold,
//! cross-pair independence fails, and the requirement diagnostics report
//! R2 false everywhere.

use std::collections::BTreeSet;

use crate::expr::{LinExpr, Var};
use crate::proto::{Protocol, Setting, Step};

use super::graph::{build_g0, G0Labels, PATHS};

/// Where the shared bit is seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloodSeed {
    /// Drawn by u_q^1; its path uses edges in order gamma = 0,1,2,3,4 and
    /// every other path starts at gamma = 0 flowing outward.
    User(usize),
    /// Drawn inside the second subgraph of path q and sent on that path's
    /// gamma = 2 edge first; path q's chains run 2,1,0 and 2,3,4.
    MidPath(usize),
}

/// Spanning traversals of the butterfly from each boundary entry node:
/// (internal edge k, sender alpha), forwarding one known bit to all six
/// nodes in causal order.
const TREES: [&[(usize, usize)]; 4] = [
    &[(4, 0), (6, 0), (5, 4), (7, 4), (10, 5)],
    &[(10, 1), (8, 1), (7, 5), (9, 5), (4, 4)],
    &[(5, 2), (8, 2), (4, 4), (7, 4), (9, 5)],
    &[(6, 3), (9, 3), (4, 0), (10, 5), (5, 4)],
];

struct FloodBuilder {
    p: Protocol,
    labels: G0Labels,
    bit: LinExpr,
    initialized: BTreeSet<(usize, usize)>,
}

impl FloodBuilder {
    fn sc(&mut self, edge: usize, from: usize) {
        self.p.schedule.push(Step::SendSc {
            edge,
            from,
            payload: self.bit.clone(),
        });
    }

    /// First arrival at a subgraph: spread the bit internally.
    fn init_subgraph(&mut self, s: usize, i: usize, entry_alpha: usize) {
        if !self.initialized.insert((s, i % PATHS)) {
            return;
        }
        for &(k, a) in TREES[entry_alpha] {
            let edge = self.labels.internal_edge(s, i, k);
            let from = self.labels.node(s, i, a);
            self.sc(edge, from);
        }
    }

    /// One pass over line j, assuming the bit already sits in A = the
    /// first subgraph of path j; fires the path edges left to right.
    fn sweep_line_forward(&mut self, j: usize) {
        let path = self.labels.standard_path(j);
        let a = (j + 8) % PATHS;
        // gamma 0 leftward to the user, then rightward along the line.
        self.sc(path.edges[0], self.labels.node(1, a, 2));
        self.sc(path.edges[1], self.labels.node(1, a, 3));
        self.init_subgraph(1, j, 0);
        self.sc(path.edges[2], self.labels.node(1, j, 1));
        self.init_subgraph(2, 2 * j, 2);
        self.sc(path.edges[3], self.labels.node(2, 2 * j, 3));
        self.init_subgraph(2, 2 * j + 1, 0);
        self.sc(path.edges[4], self.labels.node(2, 2 * j + 1, 1));
    }
}

/// Build the candidate. Valid and per-pair sound by construction; the
/// shared bit makes the pair keys dependent, which checkSoundness reports.
pub fn build_flood(seed: FloodSeed) -> (Protocol, G0Labels) {
    let (graph, labels) = build_g0();
    let q = match seed {
        FloodSeed::User(q) | FloodSeed::MidPath(q) => q % PATHS,
    };
    let seed_node = match seed {
        FloodSeed::User(_) => labels.user(q, 1),
        FloodSeed::MidPath(_) => labels.node(1, q, 1),
    };
    let bit = LinExpr::var(Var::NodeRandom(seed_node, 0));
    let mut b = FloodBuilder {
        p: Protocol::new(graph, Setting::KrpBySnc),
        labels,
        bit: bit.clone(),
        initialized: BTreeSet::new(),
    };
    match seed {
        FloodSeed::User(_) => {
            // Line q from the user inward, gamma 0 first.
            let path = b.labels.standard_path(q);
            b.sc(path.edges[0], b.labels.user(q, 1));
            b.init_subgraph(1, q + 8, 2);
            b.sc(path.edges[1], b.labels.node(1, q + 8, 3));
            b.init_subgraph(1, q, 0);
            b.sc(path.edges[2], b.labels.node(1, q, 1));
            b.init_subgraph(2, 2 * q, 2);
            b.sc(path.edges[3], b.labels.node(2, 2 * q, 3));
            b.init_subgraph(2, 2 * q + 1, 0);
            b.sc(path.edges[4], b.labels.node(2, 2 * q + 1, 1));
        }
        FloodSeed::MidPath(_) => {
            // Line q outward from its gamma = 2 edge: right chain 2,3,4
            // interleaved after the left chain 2,1,0.
            let path = b.labels.standard_path(q);
            b.sc(path.edges[2], b.labels.node(1, q, 1));
            b.init_subgraph(1, q, 1);
            b.sc(path.edges[1], b.labels.node(1, q, 0));
            b.init_subgraph(1, q + 8, 3);
            b.sc(path.edges[0], b.labels.node(1, q + 8, 2));
            b.init_subgraph(2, 2 * q, 2);
            b.sc(path.edges[3], b.labels.node(2, 2 * q, 3));
            b.init_subgraph(2, 2 * q + 1, 0);
            b.sc(path.edges[4], b.labels.node(2, 2 * q + 1, 1));
        }
    }
    for offset in 1..PATHS {
        b.sweep_line_forward((q + offset) % PATHS);
    }
    for i in 0..PATHS {
        for side in [crate::net::Side::U1, crate::net::Side::U2] {
            b.p.outputs.insert((i, side), bit.clone());
        }
    }
    let FloodBuilder { p, labels, .. } = b;
    (p, labels)
}
