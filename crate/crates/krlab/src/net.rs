//! Topology layer: undirected connected graphs, user pairs and wiretap
//! collections.
//!
//! Channel endowment is not baked into the graph; the protocol setting
//! decides which channel kinds every edge carries at analysis time, so the
//! same topology serves all four settings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::KrlabError;

/// Which side of a user pair acts as the sender in SNC settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "u1")]
    U1,
    #[serde(rename = "u2")]
    U2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::U1 => Side::U2,
            Side::U2 => Side::U1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: String,
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn other_end(&self, node: usize) -> Option<usize> {
        if node == self.a {
            Some(self.b)
        } else if node == self.b {
            Some(self.a)
        } else {
            None
        }
    }

    pub fn touches(&self, node: usize) -> bool {
        node == self.a || node == self.b
    }
}

#[derive(Clone, Debug)]
pub struct UserPair {
    pub u1: usize,
    pub u2: usize,
    /// Sender assignment for SNC settings; None in key-relay settings.
    pub sender: Option<Side>,
}

impl UserPair {
    pub fn node(&self, side: Side) -> usize {
        match side {
            Side::U1 => self.u1,
            Side::U2 => self.u2,
        }
    }
}

/// An immutable validated topology.
#[derive(Clone, Debug)]
pub struct Graph {
    nodes: Vec<String>,
    node_index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<String, usize>,
    users: Vec<UserPair>,
}

/// The collection of edge sets the adversary may wiretap. The empty set is
/// a legal member; an empty collection is normalized to the single empty
/// member so that the all-public view is always inspected.
#[derive(Clone, Debug, Default)]
pub struct WiretapCollection {
    pub members: Vec<BTreeSet<usize>>,
}

impl WiretapCollection {
    pub fn empty_member() -> Self {
        WiretapCollection {
            members: vec![BTreeSet::new()],
        }
    }

    pub fn from_ids(graph: &Graph, members: &[Vec<String>]) -> Result<Self, KrlabError> {
        let mut out = Vec::new();
        for member in members {
            let mut set = BTreeSet::new();
            for id in member {
                let e = graph
                    .edge_index(id)
                    .ok_or_else(|| KrlabError::UnknownWiretapEdge(id.clone()))?;
                set.insert(e);
            }
            out.push(set);
        }
        if out.is_empty() {
            out.push(BTreeSet::new());
        }
        Ok(WiretapCollection { members: out })
    }

    pub fn member_ids(&self, graph: &Graph) -> Vec<Vec<String>> {
        self.members
            .iter()
            .map(|m| m.iter().map(|&e| graph.edge_id(e).to_string()).collect())
            .collect()
    }
}

/// On-disk topology document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub users: Vec<UserDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wiretap: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub ends: [String; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UserDoc {
    pub i: usize,
    pub u1: String,
    pub u2: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sender: Option<Side>,
}

impl Graph {
    /// Build and validate a graph from its document form. Rejects unknown
    /// node references, duplicate ids, self-loops and disconnected graphs.
    pub fn from_doc(doc: &TopologyDoc) -> Result<Graph, KrlabError> {
        if doc.nodes.is_empty() {
            return Err(KrlabError::Topology("graph has no nodes".into()));
        }
        let mut node_index = BTreeMap::new();
        for (i, n) in doc.nodes.iter().enumerate() {
            if node_index.insert(n.clone(), i).is_some() {
                return Err(KrlabError::Topology(format!("duplicate node id `{n}`")));
            }
        }
        let mut edges = Vec::new();
        let mut edge_index = BTreeMap::new();
        for e in &doc.edges {
            let a = *node_index.get(&e.ends[0]).ok_or_else(|| {
                KrlabError::Topology(format!(
                    "edge `{}` references unknown node `{}`",
                    e.id, e.ends[0]
                ))
            })?;
            let b = *node_index.get(&e.ends[1]).ok_or_else(|| {
                KrlabError::Topology(format!(
                    "edge `{}` references unknown node `{}`",
                    e.id, e.ends[1]
                ))
            })?;
            if a == b {
                return Err(KrlabError::Topology(format!(
                    "edge `{}` is a self-loop",
                    e.id
                )));
            }
            if edge_index.insert(e.id.clone(), edges.len()).is_some() {
                return Err(KrlabError::Topology(format!(
                    "duplicate edge id `{}`",
                    e.id
                )));
            }
            edges.push(Edge {
                id: e.id.clone(),
                a,
                b,
            });
        }
        let mut users_sorted = doc.users.clone();
        users_sorted.sort_by_key(|u| u.i);
        let mut users = Vec::new();
        for (expect, u) in users_sorted.iter().enumerate() {
            if u.i != expect {
                return Err(KrlabError::Topology(format!(
                    "user pair indices must be dense from 0; missing or duplicate index {expect}"
                )));
            }
            let u1 = *node_index.get(&u.u1).ok_or_else(|| {
                KrlabError::Topology(format!("pair {} references unknown node `{}`", u.i, u.u1))
            })?;
            let u2 = *node_index.get(&u.u2).ok_or_else(|| {
                KrlabError::Topology(format!("pair {} references unknown node `{}`", u.i, u.u2))
            })?;
            if u1 == u2 {
                return Err(KrlabError::Topology(format!(
                    "pair {} has identical endpoints",
                    u.i
                )));
            }
            users.push(UserPair {
                u1,
                u2,
                sender: u.sender,
            });
        }
        let graph = Graph {
            nodes: doc.nodes.clone(),
            node_index,
            edges,
            edge_index,
            users,
        };
        if let Some(orphan) = graph.disconnected_witness() {
            return Err(KrlabError::Topology(format!(
                "graph is disconnected: node `{}` is unreachable from `{}`",
                graph.node_id(orphan),
                graph.node_id(0)
            )));
        }
        Ok(graph)
    }

    pub fn to_doc(&self, wiretap: Option<&WiretapCollection>) -> TopologyDoc {
        TopologyDoc {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    ends: [self.nodes[e.a].clone(), self.nodes[e.b].clone()],
                })
                .collect(),
            users: self
                .users
                .iter()
                .enumerate()
                .map(|(i, u)| UserDoc {
                    i,
                    u1: self.nodes[u.u1].clone(),
                    u2: self.nodes[u.u2].clone(),
                    sender: u.sender,
                })
                .collect(),
            wiretap: wiretap.map(|w| w.member_ids(self)),
        }
    }

    fn disconnected_witness(&self) -> Option<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                if let Some(w) = e.other_end(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn edge_id(&self, i: usize) -> &str {
        &self.edges[i].id
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn users(&self) -> &[UserPair] {
        &self.users
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.touches(node)).count()
    }

    pub fn incident_edges(&self, node: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].touches(node))
            .collect()
    }

    /// The same topology with sender roles reassigned; used by the
    /// setting conversions.
    pub fn with_senders(&self, senders: &[Option<Side>]) -> Graph {
        assert_eq!(senders.len(), self.users.len());
        let mut g = self.clone();
        for (u, s) in g.users.iter_mut().zip(senders) {
            u.sender = *s;
        }
        g
    }

    /// Deterministic shortest path between two nodes as a list of edge
    /// indices (BFS; ties broken by node index).
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[from] = true;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = Vec::new();
                let mut cur = to;
                while let Some((p, e)) = prev[cur] {
                    path.push(e);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            let mut next: Vec<(usize, usize)> = Vec::new();
            for (ei, e) in self.edges.iter().enumerate() {
                if let Some(w) = e.other_end(v) {
                    if !seen[w] {
                        next.push((w, ei));
                    }
                }
            }
            next.sort();
            for (w, ei) in next {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, ei));
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(json: &str) -> TopologyDoc {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn fig1_shape_builds() {
        let g = Graph::from_doc(&doc(r#"{"nodes":["u1","v","u2"],
                "edges":[{"id":"e1","ends":["u1","v"]},{"id":"e2","ends":["v","u2"]}],
                "users":[{"i":0,"u1":"u1","u2":"u2"}]}"#))
        .unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.users().len(), 1);
    }

    #[test]
    fn single_node_accepted() {
        let g = Graph::from_doc(&doc(r#"{"nodes":["a"],"edges":[],"users":[]}"#)).unwrap();
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn two_components_rejected() {
        let err =
            Graph::from_doc(&doc(r#"{"nodes":["a","b"],"edges":[],"users":[]}"#)).unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn unknown_node_reference_rejected() {
        let err = Graph::from_doc(&doc(
            r#"{"nodes":["a","b"],"edges":[{"id":"e","ends":["a","zzz"]}],"users":[]}"#,
        ))
        .unwrap_err();
        assert!(err.to_string().contains("unknown node"));
    }

    #[test]
    fn duplicate_edge_id_rejected() {
        let err = Graph::from_doc(&doc(
            r#"{"nodes":["a","b"],"edges":[{"id":"e","ends":["a","b"]},{"id":"e","ends":["b","a"]}],"users":[]}"#,
        ))
        .unwrap_err();
        assert!(err.to_string().contains("duplicate edge"));
    }

    #[test]
    fn wiretap_validates_against_edges() {
        let g = Graph::from_doc(&doc(
            r#"{"nodes":["a","b"],"edges":[{"id":"e","ends":["a","b"]}],"users":[]}"#,
        ))
        .unwrap();
        assert!(WiretapCollection::from_ids(&g, &[vec!["e".into()]]).is_ok());
        assert!(WiretapCollection::from_ids(&g, &[vec!["nope".into()]]).is_err());
        // Empty collection normalizes to the single empty member.
        let w = WiretapCollection::from_ids(&g, &[]).unwrap();
        assert_eq!(w.members.len(), 1);
        assert!(w.members[0].is_empty());
    }

    #[test]
    fn shortest_path_deterministic() {
        let g = Graph::from_doc(&doc(r#"{"nodes":["a","b","c","d"],
                "edges":[{"id":"ab","ends":["a","b"]},{"id":"bc","ends":["b","c"]},
                         {"id":"ad","ends":["a","d"]},{"id":"dc","ends":["d","c"]}],
                "users":[]}"#))
        .unwrap();
        let p = g
            .shortest_path(g.node_index("a").unwrap(), g.node_index("c").unwrap())
            .unwrap();
        assert_eq!(p.len(), 2);
        // Ties resolve toward the lower node index: a-b-c.
        assert_eq!(g.edge_id(p[0]), "ab");
        assert_eq!(g.edge_id(p[1]), "bc");
    }
}
