//! The 77 candidate edge subsets used by the cover search: two constant
//! gamma-bands, 72 two-pivot subsets and three residue-class subsets.
//!
//! Each subset is a sub-family of the coarse-grained edge set, recorded as
//! an allowed-gamma set per path. The closure items checked here are the
//! combinatorial side conditions the no-go proof needs; the cover search
//! then shows every gamma-sequence hits at least one subset.

use serde::Serialize;

use super::graph::{G0Labels, PATHS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyTag {
    E1,
    E2,
    /// Pivot pair (i', i'') with i'' = i' + t, t in 1..=4; `swapped` is
    /// the mirrored variant with the pivots' roles exchanged.
    E3 {
        i1: usize,
        i2: usize,
        swapped: bool,
    },
    E4 {
        q: usize,
    },
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyTag::E1 => write!(f, "E1"),
            FamilyTag::E2 => write!(f, "E2"),
            FamilyTag::E3 {
                i1,
                i2,
                swapped: false,
            } => write!(f, "E3[{i1},{i2}]"),
            FamilyTag::E3 {
                i1,
                i2,
                swapped: true,
            } => write!(f, "E3[{i2},{i1}]"),
            FamilyTag::E4 { q } => write!(f, "E4[{q}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CandidateSubset {
    pub tag: FamilyTag,
    /// allowed[i] has bit gamma set iff e_i^<gamma> is in the subset.
    pub allowed: [u8; PATHS],
}

const ALL: u8 = 0b11111;

fn mask(gammas: &[usize]) -> u8 {
    gammas.iter().fold(0u8, |m, &g| m | (1 << g))
}

impl CandidateSubset {
    pub fn contains(&self, path: usize, gamma: usize) -> bool {
        (self.allowed[path % PATHS] >> gamma) & 1 == 1
    }

    /// Packed 45-bit membership mask: bit 5*i + gamma.
    pub fn mask45(&self) -> u64 {
        self.allowed
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &a)| m | ((a as u64) << (5 * i)))
    }

    /// The subset as concrete edge indices.
    pub fn edges(&self, labels: &G0Labels) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..PATHS {
            let path = labels.standard_path(i);
            for gamma in 0..5 {
                if self.contains(i, gamma) {
                    out.push(path.edges[gamma]);
                }
            }
        }
        out
    }
}

/// Offsets here are taken from the first pivot: d = i − i' (mod 9), with
/// the second pivot at distance t.
fn e3_primary(i1: usize, t: usize) -> CandidateSubset {
    let mut allowed = [0u8; PATHS];
    for d in 0..PATHS {
        let gammas: u8 = if d == 0 {
            mask(&[0, 1])
        } else if d < t {
            mask(&[2])
        } else if d == t {
            mask(&[3, 4])
        } else if d <= 4 {
            ALL
        } else if d <= t + 4 {
            mask(&[0, 1, 2])
        } else {
            ALL
        };
        allowed[(i1 + d) % PATHS] = gammas;
    }
    CandidateSubset {
        tag: FamilyTag::E3 {
            i1,
            i2: (i1 + t) % PATHS,
            swapped: false,
        },
        allowed,
    }
}

fn e3_swapped(i1: usize, t: usize) -> CandidateSubset {
    let mut allowed = [0u8; PATHS];
    for d in 0..PATHS {
        let gammas: u8 = if d == 0 {
            mask(&[3, 4])
        } else if d < t {
            ALL
        } else if d == t {
            mask(&[0, 1])
        } else if d <= 4 {
            mask(&[2])
        } else if d <= t + 4 {
            mask(&[2, 3, 4])
        } else {
            mask(&[2])
        };
        allowed[(i1 + d) % PATHS] = gammas;
    }
    CandidateSubset {
        tag: FamilyTag::E3 {
            i1,
            i2: (i1 + t) % PATHS,
            swapped: true,
        },
        allowed,
    }
}

/// All 77 candidate subsets: E1, E2, E3 over nine pivots and four
/// distances in both orientations, and the three residue classes of E4.
pub fn subset_families() -> Vec<CandidateSubset> {
    let mut out = Vec::with_capacity(77);
    out.push(CandidateSubset {
        tag: FamilyTag::E1,
        allowed: [mask(&[2, 3, 4]); PATHS],
    });
    out.push(CandidateSubset {
        tag: FamilyTag::E2,
        allowed: [mask(&[0, 1, 2]); PATHS],
    });
    for i1 in 0..PATHS {
        for t in 1..=4 {
            out.push(e3_primary(i1, t));
            out.push(e3_swapped(i1, t));
        }
    }
    // The three residue cases of E4 are read as a union: each residue
    // class of i mod 3 contributes its own gamma set.
    for q in 0..3 {
        let mut allowed = [0u8; PATHS];
        for (i, slot) in allowed.iter_mut().enumerate() {
            *slot = match (i + 3 - q) % 3 {
                0 => mask(&[0, 1]),
                1 => mask(&[2, 3, 4]),
                _ => mask(&[3, 4]),
            };
        }
        out.push(CandidateSubset {
            tag: FamilyTag::E4 { q },
            allowed,
        });
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemViolation {
    pub item: u8,
    pub path: usize,
    pub gamma: usize,
    pub gamma2: usize,
}

/// Items 2)-4): the subset is proper, and the two closure rules hold.
/// Item 3 couples paths i and i+1 through their shared ring-1 subgraph;
/// item 4 couples paths i and i+5 through their shared ring-2 subgraph.
pub fn check_items_234(c: &CandidateSubset) -> Result<(), ItemViolation> {
    if c.allowed.iter().all(|&a| a == ALL) {
        return Err(ItemViolation {
            item: 2,
            path: 0,
            gamma: 0,
            gamma2: 0,
        });
    }
    for i in 0..PATHS {
        for gamma in [1usize, 2] {
            for gamma2 in [0usize, 1] {
                if c.contains(i, gamma) && c.contains(i + 1, gamma2) {
                    let need1 = 3 - gamma;
                    let need2 = 1 - gamma2;
                    if !(c.contains(i, need1) && c.contains(i + 1, need2)) {
                        return Err(ItemViolation {
                            item: 3,
                            path: i,
                            gamma,
                            gamma2,
                        });
                    }
                }
            }
        }
        for gamma in [3usize, 4] {
            for gamma2 in [2usize, 3] {
                if c.contains(i, gamma) && c.contains(i + 5, gamma2) {
                    let need1 = 7 - gamma;
                    let need2 = 5 - gamma2;
                    if !(c.contains(i, need1) && c.contains(i + 5, need2)) {
                        return Err(ItemViolation {
                            item: 4,
                            path: i,
                            gamma,
                            gamma2,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
