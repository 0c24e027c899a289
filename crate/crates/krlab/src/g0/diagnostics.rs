//! No-go diagnostics for KRP-by-SNC candidates on the counterexample
//! graph: the four per-subgraph requirements, and per-path consistency of
//! the conveyed secret bits with the relayed keys.
//!
//! These are analysis tools over concrete candidate protocols. The paper's
//! impossibility argument quantifies over all protocols; here we refute
//! any supplied candidate by exhibiting which requirement or consistency
//! condition it violates.

use serde::Serialize;

use crate::error::KrlabError;
use crate::exec::Transcript;
use crate::gf2::{intersection_dim, BitMatrix};
use crate::net::Side;
use crate::proto::{Protocol, Setting};

use super::graph::{Entity, G0Labels, PATHS};

/// Mutual information in bits between two single conveyed bits: the
/// intersection dimension of their one-row span matrices (0 or 1).
fn bit_mi(t: &Transcript, a: usize, b: usize) -> Option<usize> {
    let pa = t.sc_payload(a)?;
    let pb = t.sc_payload(b)?;
    let ma = BitMatrix::from_rows(vec![pa.vec.clone()], t.basis.len());
    let mb = BitMatrix::from_rows(vec![pb.vec.clone()], t.basis.len());
    intersection_dim(&ma, &mb).ok()
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgraphRequirements {
    pub s: usize,
    pub i: usize,
    /// False when some boundary edge carried no secret bit; the four
    /// requirements are then not evaluable for this subgraph.
    pub evaluable: bool,
    /// Correlation across both boundary pairs: I(S[e0];S[e1]) = 1 and
    /// I(S[e2];S[e3]) = 1.
    pub r1: bool,
    /// Independence across the pairs: I(S[e0];S[e2]) = 0.
    pub r2: bool,
    /// The subgraph sends on the later edge of each boundary pair.
    pub r3: bool,
    /// The subgraph receives on the second-largest of its four boundary
    /// edges.
    pub r4: bool,
    pub all_four: bool,
    /// Witnesses: the two pair correlations and the cross-pair mutual
    /// information, then the usage positions of the four boundary edges.
    pub mi_pairs: [usize; 2],
    pub mi_cross: usize,
    pub order_positions: [usize; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct RequirementReport {
    pub subgraphs: Vec<SubgraphRequirements>,
    pub any_all_four: bool,
}

/// Evaluate R1..R4 on every subgraph of a KRP-by-SNC transcript.
pub fn check_requirements(
    p: &Protocol,
    t: &Transcript,
    labels: &G0Labels,
) -> Result<RequirementReport, KrlabError> {
    if p.setting != Setting::KrpBySnc {
        return Err(KrlabError::InvalidProtocol(format!(
            "requirement diagnostics expect the KRP-by-SNC setting, got {:?}",
            p.setting
        )));
    }
    let order = t.usage_order();
    let mut subgraphs = Vec::new();
    let mut any_all_four = false;
    for s in 1..=2 {
        for i in 0..PATHS {
            let b: Vec<usize> = (0..4)
                .map(|beta| labels.boundary_edge(s, i, beta))
                .collect();
            let uses: Vec<Option<(usize, usize)>> = b.iter().map(|&e| t.sc_use(e)).collect();
            if uses.iter().any(|u| u.is_none()) {
                subgraphs.push(SubgraphRequirements {
                    s,
                    i,
                    evaluable: false,
                    r1: false,
                    r2: false,
                    r3: false,
                    r4: false,
                    all_four: false,
                    mi_pairs: [0, 0],
                    mi_cross: 0,
                    order_positions: [0; 4],
                });
                continue;
            }
            let mi01 = bit_mi(t, b[0], b[1]).expect("edges used");
            let mi23 = bit_mi(t, b[2], b[3]).expect("edges used");
            let mi02 = bit_mi(t, b[0], b[2]).expect("edges used");
            let r1 = mi01 == 1 && mi23 == 1;
            let r2 = mi02 == 0;
            let here = Entity::Sub { s, i };
            let pos: Vec<usize> = b
                .iter()
                .map(|&e| order.position(e).expect("one-shot use"))
                .collect();
            let sender_is_here = |beta: usize| {
                let (_, sender) = uses[beta].expect("edge used");
                labels.entity_of_node(sender) == here
            };
            let mut r3 = true;
            for beta in [0usize, 2] {
                let larger = if pos[beta] > pos[beta + 1] {
                    beta
                } else {
                    beta + 1
                };
                r3 &= sender_is_here(larger);
            }
            // Second largest of the four boundary edges by usage position.
            let mut ranked: Vec<usize> = (0..4).collect();
            ranked.sort_by_key(|&beta| std::cmp::Reverse(pos[beta]));
            let second_largest = ranked[1];
            let r4 = !sender_is_here(second_largest); // boundary edges have one inside endpoint
            let all_four = r1 && r2 && r3 && r4;
            any_all_four |= all_four;
            subgraphs.push(SubgraphRequirements {
                s,
                i,
                evaluable: true,
                r1,
                r2,
                r3,
                r4,
                all_four,
                mi_pairs: [mi01, mi23],
                mi_cross: mi02,
                order_positions: [pos[0], pos[1], pos[2], pos[3]],
            });
        }
    }
    Ok(RequirementReport {
        subgraphs,
        any_all_four,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeFinding {
    pub gamma: usize,
    pub used: bool,
    /// True when the conveyed bit equals the relayed key up to a constant.
    pub consistent: bool,
    /// The constant offset d, when consistent.
    pub d: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub path: usize,
    pub edges: Vec<EdgeFinding>,
    /// Gamma of the first edge used on this path.
    pub first_gamma: Option<usize>,
    /// Both monotone chains outward from the first edge, with the flow
    /// directions pointing away from it.
    pub order_conformant: bool,
    pub all_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathConsistencyReport {
    pub paths: Vec<PathReport>,
    pub all_paths_consistent: bool,
    pub all_orders_conformant: bool,
}

/// Per path: does every edge convey the relayed key up to a constant, and
/// is the usage order a two-sided outward monotone sweep from the first
/// edge used?
pub fn check_path_consistency(
    p: &Protocol,
    t: &Transcript,
    labels: &G0Labels,
) -> Result<PathConsistencyReport, KrlabError> {
    if p.setting != Setting::KrpBySnc {
        return Err(KrlabError::InvalidProtocol(format!(
            "path diagnostics expect the KRP-by-SNC setting, got {:?}",
            p.setting
        )));
    }
    let order = t.usage_order();
    let mut paths = Vec::new();
    let mut all_consistent = true;
    let mut all_conformant = true;
    for i in 0..PATHS {
        let path = labels.standard_path(i);
        let key = t
            .outputs
            .get(&(i, Side::U1))
            .ok_or_else(|| KrlabError::InvalidProtocol(format!("pair {i} lacks a key output")))?;
        let mut edges = Vec::new();
        let mut positions: Vec<Option<usize>> = Vec::new();
        for (gamma, &edge) in path.edges.iter().enumerate() {
            match t.sc_payload(edge) {
                Some(sbit) => {
                    let consistent = sbit.vec == key.vec;
                    edges.push(EdgeFinding {
                        gamma,
                        used: true,
                        consistent,
                        d: consistent.then_some(sbit.constant ^ key.constant),
                    });
                    positions.push(order.position(edge));
                }
                None => {
                    edges.push(EdgeFinding {
                        gamma,
                        used: false,
                        consistent: false,
                        d: None,
                    });
                    positions.push(None);
                }
            }
        }
        let path_consistent = edges.iter().all(|e| e.used && e.consistent);
        let (first_gamma, conformant) = if positions.iter().all(|p| p.is_some()) {
            let pos: Vec<usize> = positions.iter().map(|p| p.unwrap()).collect();
            let first = (0..5).min_by_key(|&g| pos[g]).unwrap();
            let mut ok = true;
            // Left chain: positions strictly increase toward gamma 0.
            for g in (1..=first).rev() {
                ok &= pos[g] < pos[g - 1];
            }
            // Right chain: positions strictly increase toward gamma 4.
            for g in first..4 {
                ok &= pos[g] < pos[g + 1];
            }
            // Flow directions away from the first edge; the first edge
            // itself may point either way.
            for (gamma, &edge) in path.edges.iter().enumerate() {
                if gamma == first {
                    continue;
                }
                let (_, sender) = t.sc_use(edge).expect("edge used");
                let sender_entity = labels.entity_of_node(sender);
                let expected = if gamma > first {
                    path.entities[gamma] // flows toward u2: the left side sends
                } else {
                    path.entities[gamma + 1] // flows toward u1: the right side sends
                };
                ok &= sender_entity == expected;
            }
            (Some(first), ok)
        } else {
            (None, false)
        };
        all_consistent &= path_consistent;
        all_conformant &= conformant;
        paths.push(PathReport {
            path: i,
            edges,
            first_gamma,
            order_conformant: conformant,
            all_consistent: path_consistent,
        });
    }
    Ok(PathConsistencyReport {
        paths,
        all_paths_consistent: all_consistent,
        all_orders_conformant: all_conformant,
    })
}
