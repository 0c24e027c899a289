//! Exact soundness and secrecy verdicts.
//!
//! For linear protocols over independent uniform bits, the mutual
//! information between the key tuple and the adversary's view equals the
//! dimension of the intersection of their row spaces, so secrecy is a rank
//! computation. The brute-force oracle recomputes the same quantity from
//! the joint distribution by exhaustive enumeration, in exact dyadic
//! arithmetic, and is kept independent of the rank path.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::KrlabError;
use crate::exec::{Resolved, Transcript};
use crate::gf2::{intersection_basis, intersection_dim, BitMatrix, BitVector};
use crate::net::{Side, WiretapCollection};
use crate::proto::{Goal, Protocol, Setting, Step};

/// The matrix of bits visible to the adversary under one wiretap member:
/// every public announcement, plus the wiretapped one-shot bits (local
/// keys in the KRP setting, secret bits in SC settings). Rows follow the
/// schedule order.
pub fn adversary_view(
    t: &Transcript,
    member: &BTreeSet<usize>,
    setting: Setting,
) -> Result<BitMatrix, KrlabError> {
    let mut m = BitMatrix::new(t.basis.len());
    for ts in &t.steps {
        match &ts.step {
            Step::StartLks { edge, .. } => {
                if member.contains(edge) {
                    let var = crate::expr::Var::LocalKey(*edge);
                    let col = t.column(&var).expect("generated key in basis");
                    m.push_row(BitVector::unit(t.basis.len(), col));
                }
            }
            Step::SendSc { edge, .. } => {
                if member.contains(edge) {
                    m.push_row(ts.payload.as_ref().expect("sc payload").vec.clone());
                }
            }
            Step::SendPc { .. } => {
                // Public bits reach the adversary in every PC-bearing
                // setting; PC steps cannot occur elsewhere.
                debug_assert!(setting.allows_pc());
                m.push_row(ts.payload.as_ref().expect("pc payload").vec.clone());
            }
        }
    }
    Ok(m)
}

/// The joint secrecy target: all relayed keys (or all messages), one row
/// per defining expression.
pub fn target_matrix(p: &Protocol, t: &Transcript) -> BitMatrix {
    let mut m = BitMatrix::new(t.basis.len());
    match p.goal {
        Goal::Keys => {
            for ((_, _), out) in t.outputs.iter() {
                m.push_row(out.vec.clone());
            }
        }
        Goal::Messages => {
            for pair in 0..p.graph.users().len() {
                if let Some(r) = t.resolve_var(&crate::expr::Var::Message(pair)) {
                    m.push_row(r.vec);
                }
            }
        }
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSoundness {
    pub pair: usize,
    /// Keys: outputs agree as functions (probability-1 equality).
    /// Messages: the receiver decodes the sender's message exactly.
    pub equal: bool,
    /// Keys only: the common output is a nonzero form, hence uniform.
    pub uniform: bool,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub pairs: Vec<PairSoundness>,
    /// Keys only: the key tuple is linearly independent across pairs.
    pub independent: bool,
    pub pass: bool,
}

/// Soundness per the goal: relayed keys must be equal, uniform and
/// independent across pairs; messages must be decoded exactly.
pub fn check_soundness(p: &Protocol, t: &Transcript) -> SoundnessReport {
    let mut pairs = Vec::new();
    let mut key_rows = BitMatrix::new(t.basis.len());
    let mut all_equal_uniform = true;
    for pair in 0..p.graph.users().len() {
        match p.goal {
            Goal::Keys => {
                let o1 = t.outputs.get(&(pair, Side::U1));
                let o2 = t.outputs.get(&(pair, Side::U2));
                let (equal, uniform, witness) = match (o1, o2) {
                    (Some(a), Some(b)) => {
                        let equal = a == b;
                        let uniform = !a.vec.is_zero();
                        key_rows.push_row(a.vec.clone());
                        (equal, uniform, describe(t, p, a))
                    }
                    _ => (false, false, "missing output".to_string()),
                };
                all_equal_uniform &= equal && uniform;
                pairs.push(PairSoundness {
                    pair,
                    equal,
                    uniform,
                    witness,
                });
            }
            Goal::Messages => {
                let sender = p.graph.users()[pair].sender.unwrap_or(Side::U1);
                let decoded = t.outputs.get(&(pair, sender.other()));
                let expect = t.resolve_var(&crate::expr::Var::Message(pair));
                let equal = match (decoded, &expect) {
                    (Some(d), Some(e)) => d == e,
                    _ => false,
                };
                all_equal_uniform &= equal;
                pairs.push(PairSoundness {
                    pair,
                    equal,
                    uniform: true,
                    witness: decoded
                        .map(|d| describe(t, p, d))
                        .unwrap_or_else(|| "missing output".into()),
                });
            }
        }
    }
    let independent = match p.goal {
        Goal::Keys => key_rows.rank() == p.graph.users().len(),
        Goal::Messages => true,
    };
    let pass = all_equal_uniform && independent;
    SoundnessReport {
        pairs,
        independent,
        pass,
    }
}

fn describe(t: &Transcript, p: &Protocol, r: &Resolved) -> String {
    let mut terms: Vec<String> = r
        .vec
        .ones()
        .map(|i| format!("{}", t.basis[i].display(&p.graph)))
        .collect();
    if r.constant {
        terms.push("1".into());
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ^ ")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SecrecyRow {
    pub member: Vec<String>,
    #[serde(rename = "rankK")]
    pub rank_k: usize,
    #[serde(rename = "rankView")]
    pub rank_view: usize,
    #[serde(rename = "rankJoint")]
    pub rank_joint: usize,
    /// Exact mutual information in bits between the key tuple and the
    /// view: rankK + rankView − rankJoint.
    pub leak: usize,
    /// A basis of the leaked subspace, when the leak is nonzero.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecrecyReport {
    pub rows: Vec<SecrecyRow>,
    pub pass: bool,
}

pub fn check_secrecy(
    p: &Protocol,
    t: &Transcript,
    w: &WiretapCollection,
) -> Result<SecrecyReport, KrlabError> {
    let keys = target_matrix(p, t);
    let mut rows = Vec::new();
    let mut pass = true;
    for member in &w.members {
        let view = adversary_view(t, member, p.setting)?;
        let rank_k = keys.rank();
        let rank_view = view.rank();
        let rank_joint = keys.stacked(&view)?.rank();
        let leak = rank_k + rank_view - rank_joint;
        let witness = if leak > 0 {
            intersection_basis(&keys, &view)?
                .iter()
                .map(|v| {
                    let r = Resolved {
                        vec: v.clone(),
                        constant: false,
                    };
                    describe(t, p, &r)
                })
                .collect()
        } else {
            Vec::new()
        };
        pass &= leak == 0;
        rows.push(SecrecyRow {
            member: member
                .iter()
                .map(|&e| p.graph.edge_id(e).to_string())
                .collect(),
            rank_k,
            rank_view,
            rank_joint,
            leak,
            witness,
        });
    }
    Ok(SecrecyReport { rows, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct SecurityReport {
    pub soundness: SoundnessReport,
    pub secrecy: Vec<SecrecyRow>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "secure")]
    Secure,
    #[serde(rename = "insecure")]
    Insecure,
}

/// Full analysis: validate, execute, judge soundness and secrecy. Secure
/// iff soundness passes and no member leaks.
pub fn analyze(p: &Protocol, w: &WiretapCollection) -> Result<SecurityReport, KrlabError> {
    p.validated()?;
    let t = crate::exec::symbolic_execute(p)?;
    let soundness = check_soundness(p, &t);
    let secrecy = check_secrecy(p, &t, w)?;
    let verdict = if soundness.pass && secrecy.pass {
        Verdict::Secure
    } else {
        Verdict::Insecure
    };
    Ok(SecurityReport {
        soundness,
        secrecy: secrecy.rows,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

/// An exact dyadic rational: `numer / 2^log2_denom`, kept reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyadic {
    numer: i128,
    log2_denom: u32,
}

impl Dyadic {
    pub fn new(numer: i128, log2_denom: u32) -> Self {
        let mut d = Dyadic { numer, log2_denom };
        d.reduce();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            numer: 0,
            log2_denom: 0,
        }
    }

    fn reduce(&mut self) {
        while self.log2_denom > 0 && self.numer % 2 == 0 {
            self.numer /= 2;
            self.log2_denom -= 1;
        }
        if self.numer == 0 {
            self.log2_denom = 0;
        }
    }

    pub fn as_integer(&self) -> Option<i128> {
        if self.log2_denom == 0 {
            Some(self.numer)
        } else {
            None
        }
    }

    pub fn numer(&self) -> i128 {
        self.numer
    }

    pub fn log2_denom(&self) -> u32 {
        self.log2_denom
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_denom == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, 1i128 << self.log2_denom)
        }
    }
}

pub const DEFAULT_ORACLE_BOUND: usize = 16;
pub const MAX_ORACLE_BOUND: usize = 24;

/// Exact mutual information, in bits, between two tuples of affine GF(2)
/// forms of independent uniform variables, by exhaustive enumeration of
/// the joint distribution. The entropy terms of jointly linear forms are
/// integers, so the result is an exact dyadic rational (and in fact an
/// integer); a non-dyadic joint distribution is reported as an error.
pub fn brute_force_mi(
    n_vars: usize,
    targets: &[Resolved],
    view: &[Resolved],
    bound: usize,
) -> Result<Dyadic, KrlabError> {
    if n_vars > bound || n_vars >= 63 {
        return Err(KrlabError::OracleBound {
            vars: n_vars,
            bound,
        });
    }
    assert!(
        targets.len() <= 64 && view.len() <= 64,
        "tuple too wide for the oracle"
    );
    let total: u64 = 1u64 << n_vars;
    let mut joint: HashMap<(u64, u64), u64> = HashMap::new();
    let mut left: HashMap<u64, u64> = HashMap::new();
    let mut right: HashMap<u64, u64> = HashMap::new();
    let eval_tuple = |exprs: &[Resolved], assignment: &BitVector| -> u64 {
        let mut acc = 0u64;
        for (i, e) in exprs.iter().enumerate() {
            if e.vec.dot(assignment) ^ e.constant {
                acc |= 1 << i;
            }
        }
        acc
    };
    for mask in 0..total {
        let assignment = BitVector::from_bits(
            &(0..n_vars)
                .map(|i| (mask >> i) & 1 == 1)
                .collect::<Vec<_>>(),
        );
        let tv = eval_tuple(targets, &assignment);
        let vv = eval_tuple(view, &assignment);
        *joint.entry((tv, vv)).or_insert(0) += 1;
        *left.entry(tv).or_insert(0) += 1;
        *right.entry(vv).or_insert(0) += 1;
    }
    // I = sum p(t,v) * log2( c(t,v) * 2^n / (c(t) c(v)) ); every count must
    // be a power of two for the logs to be integers.
    let log2_exact = |c: u64| -> Result<i128, KrlabError> {
        if c.is_power_of_two() {
            Ok(c.trailing_zeros() as i128)
        } else {
            Err(KrlabError::NonDyadic)
        }
    };
    let mut numer: i128 = 0;
    for ((tv, vv), c) in &joint {
        let term =
            log2_exact(*c)? + n_vars as i128 - log2_exact(left[tv])? - log2_exact(right[vv])?;
        numer += *c as i128 * term;
    }
    Ok(Dyadic::new(numer, n_vars as u32))
}

/// Oracle comparison for a whole protocol: for each wiretap member, the
/// rank-based leak and the brute-force mutual information.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub member: Vec<String>,
    pub rank_leak: usize,
    pub oracle_mi: String,
    pub agree: bool,
}

pub fn oracle_check(
    p: &Protocol,
    w: &WiretapCollection,
    bound: usize,
) -> Result<Vec<OracleRow>, KrlabError> {
    let t: Transcript = crate::exec::symbolic_execute(p)?;
    let n = t.basis.len();
    let keys = target_matrix(p, &t);
    let key_tuple: Vec<Resolved> = match p.goal {
        Goal::Keys => t.outputs.values().cloned().collect(),
        Goal::Messages => (0..p.graph.users().len())
            .filter_map(|i| t.resolve_var(&crate::expr::Var::Message(i)))
            .collect(),
    };
    let mut rows = Vec::new();
    for member in &w.members {
        let view = adversary_view(&t, member, p.setting)?;
        let rank_leak = intersection_dim(&keys, &view)?;
        let view_tuple: Vec<Resolved> = view
            .rows()
            .iter()
            .map(|v| Resolved {
                vec: v.clone(),
                constant: false,
            })
            .collect();
        let mi = brute_force_mi(n, &key_tuple, &view_tuple, bound)?;
        rows.push(OracleRow {
            member: member
                .iter()
                .map(|&e| p.graph.edge_id(e).to_string())
                .collect(),
            rank_leak,
            oracle_mi: mi.to_string(),
            agree: mi.as_integer() == Some(rank_leak as i128),
        });
    }
    Ok(rows)
}
