//! The counterexample topology: two rings of nine modified-butterfly
//! subgraphs, cross-wired, with nine user pairs hanging off them.
//!
//! Node ids follow the coordinates `v[s,i,alpha]` (s in {1,2}, i mod 9,
//! alpha in 0..=5) and `u[i,j]`. Edge ids `e[s,i,k]` use k in 4..=10 for
//! the seven internal butterfly edges and k in 0..=3 for boundary edges;
//! boundary edges shared between coordinates are canonicalized once at
//! build time (e.g. e[s,i,3] also serves as e[s,i+1,0]).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::KrlabError;
use crate::net::{EdgeDoc, Graph, TopologyDoc, UserDoc};

pub const PATHS: usize = 9;
pub const SUBGRAPH_NODES: usize = 6;

/// Internal butterfly wiring: edge k connects v[.,.,a] and v[.,.,b].
/// The butterfly is the 6-cycle v0-v4-v2-v1-v5-v3 plus the chord e7.
const INTERNAL_EDGES: [(usize, usize, usize); 7] = [
    (4, 0, 4),
    (5, 2, 4),
    (6, 0, 3),
    (7, 4, 5),
    (8, 2, 1),
    (9, 5, 3),
    (10, 5, 1),
];

/// A coarse-grained participant: one butterfly subgraph or one user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entity {
    Sub { s: usize, i: usize },
    User { pair: usize, side: u8 },
}

impl std::fmt::Display for Entity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Entity::Sub { s, i } => write!(f, "G[{s},{i}]"),
            Entity::User { pair, side } => write!(f, "u[{pair},{side}]"),
        }
    }
}

/// The five edges of standard path `i`, from the u1 end to the u2 end.
#[derive(Clone, Debug)]
pub struct StandardPath {
    pub index: usize,
    /// Edge indices for gamma = 0..=4.
    pub edges: [usize; 5],
    /// The six entities along the path: u_i^1, four subgraphs, u_i^2.
    pub entities: [Entity; 6],
}

#[derive(Clone, Debug)]
pub struct G0Labels {
    node: BTreeMap<(usize, usize, usize), usize>,
    user: BTreeMap<(usize, u8), usize>,
    internal: BTreeMap<(usize, usize, usize), usize>,
    boundary: BTreeMap<(usize, usize, usize), usize>,
    entity_of: Vec<Entity>,
}

impl G0Labels {
    /// Resolve the label table against a graph carrying the canonical
    /// node and edge ids; errors when the graph is not the counterexample
    /// topology.
    pub fn for_graph(graph: &Graph) -> Result<G0Labels, KrlabError> {
        let missing = |id: &str| KrlabError::Topology(format!("expected id `{id}` not present"));
        if graph.node_count() != 18 + 18 * SUBGRAPH_NODES {
            return Err(KrlabError::Topology(format!(
                "expected 126 nodes, found {}",
                graph.node_count()
            )));
        }
        let mut node = BTreeMap::new();
        let mut user = BTreeMap::new();
        for i in 0..PATHS {
            for side in [1u8, 2] {
                let id = format!("u[{i},{side}]");
                user.insert(
                    (i, side),
                    graph.node_index(&id).ok_or_else(|| missing(&id))?,
                );
            }
        }
        for s in 1..=2 {
            for i in 0..PATHS {
                for alpha in 0..SUBGRAPH_NODES {
                    let id = format!("v[{s},{i},{alpha}]");
                    node.insert(
                        (s, i, alpha),
                        graph.node_index(&id).ok_or_else(|| missing(&id))?,
                    );
                }
            }
        }
        let mut internal = BTreeMap::new();
        let mut boundary = BTreeMap::new();
        for s in 1..=2 {
            for i in 0..PATHS {
                for &(k, _, _) in &INTERNAL_EDGES {
                    let id = format!("e[{s},{i},{k}]");
                    internal.insert(
                        (s, i, k),
                        graph.edge_index(&id).ok_or_else(|| missing(&id))?,
                    );
                }
                let ring = format!("e[{s},{i},3]");
                let ring_idx = graph.edge_index(&ring).ok_or_else(|| missing(&ring))?;
                boundary.insert((s, i, 3), ring_idx);
                boundary.insert((s, (i + 1) % PATHS, 0), ring_idx);
            }
        }
        for i in 0..PATHS {
            let cross = format!("e[1,{i},1]");
            let cross_idx = graph.edge_index(&cross).ok_or_else(|| missing(&cross))?;
            boundary.insert((1, i, 1), cross_idx);
            boundary.insert((2, (2 * i) % PATHS, 2), cross_idx);
            let user1 = format!("e[1,{i},2]");
            boundary.insert(
                (1, i, 2),
                graph.edge_index(&user1).ok_or_else(|| missing(&user1))?,
            );
            let user2 = format!("e[2,{i},1]");
            boundary.insert(
                (2, i, 1),
                graph.edge_index(&user2).ok_or_else(|| missing(&user2))?,
            );
        }
        let mut entity_of = vec![Entity::User { pair: 0, side: 1 }; graph.node_count()];
        for (&(i, side), &idx) in &user {
            entity_of[idx] = Entity::User { pair: i, side };
        }
        for (&(s, i, _), &idx) in &node {
            entity_of[idx] = Entity::Sub { s, i };
        }
        Ok(G0Labels {
            node,
            user,
            internal,
            boundary,
            entity_of,
        })
    }

    /// Internal node v[s,i,alpha].
    pub fn node(&self, s: usize, i: usize, alpha: usize) -> usize {
        self.node[&(s, i % PATHS, alpha)]
    }

    /// User node u[i,side].
    pub fn user(&self, pair: usize, side: u8) -> usize {
        self.user[&(pair % PATHS, side)]
    }

    /// Internal edge e[s,i,k], k in 4..=10.
    pub fn internal_edge(&self, s: usize, i: usize, k: usize) -> usize {
        self.internal[&(s, i % PATHS, k)]
    }

    /// Boundary edge e_{s,i}^(beta), beta in 0..=3, resolved to its
    /// canonical edge.
    pub fn boundary_edge(&self, s: usize, i: usize, beta: usize) -> usize {
        self.boundary[&(s, i % PATHS, beta)]
    }

    /// The subgraph or user a node belongs to.
    pub fn entity_of_node(&self, node: usize) -> Entity {
        self.entity_of[node]
    }

    /// The six internal nodes of subgraph (s,i).
    pub fn subgraph_nodes(&self, s: usize, i: usize) -> [usize; SUBGRAPH_NODES] {
        let mut out = [0; SUBGRAPH_NODES];
        for (alpha, slot) in out.iter_mut().enumerate() {
            *slot = self.node(s, i, alpha);
        }
        out
    }

    pub fn standard_path(&self, i: usize) -> StandardPath {
        let i = i % PATHS;
        StandardPath {
            index: i,
            edges: [
                self.boundary_edge(1, i + 8, 2),
                self.boundary_edge(1, i, 0),
                self.boundary_edge(1, i, 1),
                self.boundary_edge(2, 2 * i, 3),
                self.boundary_edge(2, 2 * i + 1, 1),
            ],
            entities: [
                Entity::User { pair: i, side: 1 },
                Entity::Sub {
                    s: 1,
                    i: (i + 8) % PATHS,
                },
                Entity::Sub { s: 1, i },
                Entity::Sub {
                    s: 2,
                    i: (2 * i) % PATHS,
                },
                Entity::Sub {
                    s: 2,
                    i: (2 * i + 1) % PATHS,
                },
                Entity::User { pair: i, side: 2 },
            ],
        }
    }

    /// All 45 standard-path edges (the coarse-grained edge set).
    pub fn st_edges(&self) -> Vec<usize> {
        (0..PATHS)
            .flat_map(|i| self.standard_path(i).edges)
            .collect()
    }
}

/// Build the counterexample graph with its label table.
pub fn build_g0() -> (Arc<Graph>, G0Labels) {
    let mut nodes = Vec::new();
    let mut node = BTreeMap::new();
    let mut user = BTreeMap::new();
    for i in 0..PATHS {
        for side in [1u8, 2] {
            user.insert((i, side), nodes.len());
            nodes.push(format!("u[{i},{side}]"));
        }
    }
    for s in 1..=2 {
        for i in 0..PATHS {
            for alpha in 0..SUBGRAPH_NODES {
                node.insert((s, i, alpha), nodes.len());
                nodes.push(format!("v[{s},{i},{alpha}]"));
            }
        }
    }

    let mut edges: Vec<EdgeDoc> = Vec::new();
    let node_id = |idx: usize, nodes: &[String]| nodes[idx].clone();

    for s in 1..=2 {
        for i in 0..PATHS {
            for &(k, a, b) in &INTERNAL_EDGES {
                edges.push(EdgeDoc {
                    id: format!("e[{s},{i},{k}]"),
                    ends: [
                        node_id(node[&(s, i, a)], &nodes),
                        node_id(node[&(s, i, b)], &nodes),
                    ],
                });
            }
        }
    }
    // Ring edges: e[s,i,3] joins v[s,i,3] to v[s,i+1,0] and doubles as
    // e[s,i+1,0].
    for s in 1..=2 {
        for i in 0..PATHS {
            edges.push(EdgeDoc {
                id: format!("e[{s},{i},3]"),
                ends: [
                    node_id(node[&(s, i, 3)], &nodes),
                    node_id(node[&(s, (i + 1) % PATHS, 0)], &nodes),
                ],
            });
        }
    }
    // Cross edges: e[1,i,1] joins v[1,i,1] to v[2,2i,2] and doubles as
    // e[2,2i,2].
    for i in 0..PATHS {
        edges.push(EdgeDoc {
            id: format!("e[1,{i},1]"),
            ends: [
                node_id(node[&(1, i, 1)], &nodes),
                node_id(node[&(2, (2 * i) % PATHS, 2)], &nodes),
            ],
        });
    }
    // User edges on ring 1: e[1,i,2] joins u[i+1,1] to v[1,i,2].
    for i in 0..PATHS {
        edges.push(EdgeDoc {
            id: format!("e[1,{i},2]"),
            ends: [
                node_id(user[&((i + 1) % PATHS, 1)], &nodes),
                node_id(node[&(1, i, 2)], &nodes),
            ],
        });
    }
    // User edges on ring 2: e[2,n,1] joins v[2,n,1] to u[5n+4,2].
    for n in 0..PATHS {
        edges.push(EdgeDoc {
            id: format!("e[2,{n},1]"),
            ends: [
                node_id(node[&(2, n, 1)], &nodes),
                node_id(user[&((5 * n + 4) % PATHS, 2)], &nodes),
            ],
        });
    }

    let doc = TopologyDoc {
        nodes: nodes.clone(),
        edges,
        users: (0..PATHS)
            .map(|i| UserDoc {
                i,
                u1: nodes[user[&(i, 1)]].clone(),
                u2: nodes[user[&(i, 2)]].clone(),
                sender: None,
            })
            .collect(),
        wiretap: None,
    };
    let graph = Arc::new(Graph::from_doc(&doc).expect("the counterexample graph is well formed"));
    let labels = G0Labels::for_graph(&graph).expect("freshly built ids resolve");
    (graph, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn node_and_edge_counts() {
        let (g, _) = build_g0();
        assert_eq!(g.node_count(), 126);
        assert_eq!(g.edge_count(), 171);
    }

    #[test]
    fn every_user_has_degree_one() {
        let (g, labels) = build_g0();
        for i in 0..PATHS {
            for side in [1u8, 2] {
                assert_eq!(g.degree(labels.user(i, side)), 1, "u[{i},{side}]");
            }
        }
    }

    #[test]
    fn boundary_identities_hold() {
        let (_, labels) = build_g0();
        for s in 1..=2 {
            for i in 0..PATHS {
                assert_eq!(
                    labels.boundary_edge(s, i, 3),
                    labels.boundary_edge(s, i + 1, 0)
                );
            }
        }
        for i in 0..PATHS {
            assert_eq!(
                labels.boundary_edge(1, i, 1),
                labels.boundary_edge(2, 2 * i, 2)
            );
        }
    }

    #[test]
    fn path_zero_starts_at_e_1_8_2() {
        let (g, labels) = build_g0();
        let p = labels.standard_path(0);
        assert_eq!(g.edge_id(p.edges[0]), "e[1,8,2]");
        // Far end of gamma=4: e[2,1,1] touches u[0,2].
        assert_eq!(g.edge_id(p.edges[4]), "e[2,1,1]");
        let u02 = labels.user(0, 2);
        assert!(g.edge(p.edges[4]).touches(u02));
    }

    #[test]
    fn paths_connect_their_user_pairs() {
        let (g, labels) = build_g0();
        for i in 0..PATHS {
            let p = labels.standard_path(i);
            assert!(
                g.edge(p.edges[0]).touches(labels.user(i, 1)),
                "path {i} left end"
            );
            assert!(
                g.edge(p.edges[4]).touches(labels.user(i, 2)),
                "path {i} right end"
            );
            // The five edges chain through the four subgraphs.
            for gamma in 0..4 {
                let a = g.edge(p.edges[gamma]);
                let b = g.edge(p.edges[gamma + 1]);
                let mut shared = 0;
                for x in [a.a, a.b] {
                    for y in [b.a, b.b] {
                        if labels.entity_of_node(x) == labels.entity_of_node(y)
                            && labels.entity_of_node(x) == p.entities[gamma + 1]
                        {
                            shared += 1;
                        }
                    }
                }
                assert!(shared > 0, "path {i} edges {gamma},{} disagree", gamma + 1);
            }
        }
    }

    #[test]
    fn paths_are_disjoint_and_cover_45_edges() {
        let (_, labels) = build_g0();
        let mut seen = BTreeSet::new();
        for i in 0..PATHS {
            for e in labels.standard_path(i).edges {
                assert!(seen.insert(e), "edge {e} on two paths");
            }
        }
        assert_eq!(seen.len(), 45);
    }

    #[test]
    fn st_edges_disjoint_from_internal() {
        let (g, labels) = build_g0();
        let st: BTreeSet<usize> = labels.st_edges().into_iter().collect();
        let mut internal_count = 0;
        for s in 1..=2 {
            for i in 0..PATHS {
                for k in 4..=10 {
                    let e = labels.internal_edge(s, i, k);
                    assert!(!st.contains(&e));
                    internal_count += 1;
                }
            }
        }
        assert_eq!(internal_count + st.len(), g.edge_count());
    }

    #[test]
    fn every_subgraph_touches_exactly_two_paths() {
        let (_, labels) = build_g0();
        let mut touched: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for i in 0..PATHS {
            for entity in labels.standard_path(i).entities {
                if let Entity::Sub { s, i: si } = entity {
                    touched.entry((s, si)).or_default().insert(i);
                }
            }
        }
        assert_eq!(touched.len(), 18);
        for ((s, i), paths) in touched {
            assert_eq!(paths.len(), 2, "G[{s},{i}] touches {paths:?}");
        }
    }
}
