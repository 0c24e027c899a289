//! Constructive conversions between the protocol settings, implemented as
//! transcript-preserving rewrites.
//!
//! Each transform returns the image protocol together with a trace mapping
//! source steps and variables into the image, so that the analyzer can
//! check not just that verdicts agree but that the adversary learns the
//! same subspace before and after the rewrite.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::KrlabError;
use crate::exec::symbolic_execute;
use crate::expr::{LinExpr, Var};
use crate::gf2::{BitMatrix, BitVector, EchelonBasis};
use crate::net::{Side, WiretapCollection};
use crate::proto::{Goal, Protocol, Setting, Step};
use crate::sec::{adversary_view, check_soundness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    LksToSc,
    AttachOtp,
    ScToOtp,
    SncToKrpBySnc,
}

#[derive(Clone, Debug)]
pub struct TransformTrace {
    pub kind: TransformKind,
    /// Image schedule indices produced by each source step.
    pub step_map: Vec<Vec<usize>>,
    /// Source atoms renamed in the image (identity entries omitted).
    pub var_map: BTreeMap<Var, Var>,
    /// Atoms that exist only in the image.
    pub fresh: Vec<Var>,
    /// True when the source had nothing to rewrite.
    pub noop: bool,
}

fn substitute(expr: &LinExpr, map: &BTreeMap<Var, Var>) -> LinExpr {
    let mut out = LinExpr::constant(expr.constant);
    for v in expr.vars() {
        out = out.xor_var(*map.get(v).copied().as_ref().unwrap_or(v));
    }
    out
}

/// Next unused node-random index per node, so fresh randomness never
/// collides with existing atoms.
fn fresh_random_allocator(p: &Protocol) -> BTreeMap<usize, u32> {
    let mut next: BTreeMap<usize, u32> = BTreeMap::new();
    for var in p.basis() {
        if let Var::NodeRandom(node, k) = var {
            let e = next.entry(node).or_insert(0);
            *e = (*e).max(k + 1);
        }
    }
    next
}

/// Simulate every local key source by a secret channel: the initiator
/// draws the bit itself and sends it over SC. KRP → SNC with public
/// channels, key goal preserved.
pub fn lks_to_sc(p: &Protocol) -> Result<(Protocol, TransformTrace), KrlabError> {
    if p.setting != Setting::Krp {
        return Err(KrlabError::Transform(format!(
            "lks-to-sc expects a KRP source, got {:?}",
            p.setting
        )));
    }
    let mut next = fresh_random_allocator(p);
    let mut var_map = BTreeMap::new();
    let mut fresh = Vec::new();
    for step in &p.schedule {
        if let Step::StartLks { edge, from } = step {
            let k = next.entry(*from).or_insert(0);
            let var = Var::NodeRandom(*from, *k);
            *k += 1;
            var_map.insert(Var::LocalKey(*edge), var);
            fresh.push(var);
        }
    }
    let mut image = Protocol::new(p.graph.clone(), Setting::SncPc);
    image.goal = p.goal;
    let mut step_map = Vec::new();
    for step in &p.schedule {
        let idx = image.schedule.len();
        match step {
            Step::StartLks { edge, from } => {
                image.schedule.push(Step::SendSc {
                    edge: *edge,
                    from: *from,
                    payload: LinExpr::var(var_map[&Var::LocalKey(*edge)]),
                });
            }
            Step::SendPc {
                edge,
                from,
                payload,
            } => image.schedule.push(Step::SendPc {
                edge: *edge,
                from: *from,
                payload: substitute(payload, &var_map),
            }),
            Step::SendSc { .. } => unreachable!("no SC steps in a valid KRP source"),
        }
        step_map.push(vec![idx]);
    }
    for (k, expr) in &p.outputs {
        image.outputs.insert(*k, substitute(expr, &var_map));
    }
    let noop = var_map.is_empty();
    Ok((
        image,
        TransformTrace {
            kind: TransformKind::LksToSc,
            step_map,
            var_map,
            fresh,
            noop,
        },
    ))
}

/// One-time-pad a chosen message over an established key-sharing protocol:
/// the sender announces c_i = m_i + k_i along a public route and the
/// receiver decodes with its key copy.
pub fn attach_otp_message(
    p: &Protocol,
    roles: &[Side],
) -> Result<(Protocol, TransformTrace), KrlabError> {
    if p.setting != Setting::SncPc || p.goal != Goal::Keys {
        return Err(KrlabError::Transform(
            "attach-otp expects a key-sharing protocol in the SNC+PC setting".into(),
        ));
    }
    if roles.len() != p.graph.users().len() {
        return Err(KrlabError::Transform(format!(
            "got {} roles for {} pairs",
            roles.len(),
            p.graph.users().len()
        )));
    }
    let t = symbolic_execute(p)?;
    let soundness = check_soundness(p, &t);
    if !soundness.pass {
        return Err(KrlabError::Transform(
            "attach-otp requires a sound key-sharing source".into(),
        ));
    }
    let graph = Arc::new(
        p.graph
            .with_senders(&roles.iter().map(|&s| Some(s)).collect::<Vec<_>>()),
    );
    let mut image = Protocol::new(graph.clone(), Setting::SncPc);
    image.goal = Goal::Messages;
    image.schedule = p.schedule.clone();
    let step_map: Vec<Vec<usize>> = (0..p.schedule.len()).map(|i| vec![i]).collect();
    let mut fresh = Vec::new();
    for (pair, &sender) in roles.iter().enumerate() {
        let m = Var::Message(pair);
        fresh.push(m);
        let sender_node = graph.users()[pair].node(sender);
        let receiver_node = graph.users()[pair].node(sender.other());
        let key_at_sender = p.outputs.get(&(pair, sender)).ok_or_else(|| {
            KrlabError::Transform(format!("pair {pair} lacks a key output on the sender side"))
        })?;
        let key_at_receiver = p
            .outputs
            .get(&(pair, sender.other()))
            .expect("sound source has both outputs");
        let cipher = LinExpr::var(m).xor(key_at_sender);
        // Route the ciphertext along the shortest public path; public bits
        // are globally visible, so the route affects only the transcript.
        let path = graph
            .shortest_path(sender_node, receiver_node)
            .expect("graph is connected");
        let mut at = sender_node;
        for edge in path {
            image.schedule.push(Step::SendPc {
                edge,
                from: at,
                payload: cipher.clone(),
            });
            at = graph.edge(edge).other_end(at).expect("path edge");
        }
        image.outputs.insert((pair, sender), LinExpr::var(m));
        image
            .outputs
            .insert((pair, sender.other()), cipher.xor(key_at_receiver));
    }
    Ok((
        image,
        TransformTrace {
            kind: TransformKind::AttachOtp,
            step_map,
            var_map: BTreeMap::new(),
            fresh,
            noop: false,
        },
    ))
}

/// Simulate every secret channel by a local key source and a one-time-pad
/// announcement: SC_e(s) becomes LKS_e then p_e = s + r_e. Any SC-bearing
/// setting → KRP.
pub fn sc_to_otp(p: &Protocol) -> Result<(Protocol, TransformTrace), KrlabError> {
    if !p.setting.allows_sc() {
        return Err(KrlabError::Transform(format!(
            "sc-to-otp expects an SC-bearing source, got {:?}",
            p.setting
        )));
    }
    let mut image = Protocol::new(p.graph.clone(), Setting::Krp);
    image.goal = p.goal;
    let mut step_map = Vec::new();
    let mut fresh = Vec::new();
    let mut rewrites = 0usize;
    for step in &p.schedule {
        let idx = image.schedule.len();
        match step {
            Step::SendSc {
                edge,
                from,
                payload,
            } => {
                rewrites += 1;
                fresh.push(Var::LocalKey(*edge));
                image.schedule.push(Step::StartLks {
                    edge: *edge,
                    from: *from,
                });
                image.schedule.push(Step::SendPc {
                    edge: *edge,
                    from: *from,
                    payload: payload.clone().xor_var(Var::LocalKey(*edge)),
                });
                step_map.push(vec![idx, idx + 1]);
            }
            other => {
                image.schedule.push(other.clone());
                step_map.push(vec![idx]);
            }
        }
    }
    image.outputs = p.outputs.clone();
    Ok((
        image,
        TransformTrace {
            kind: TransformKind::ScToOtp,
            step_map,
            var_map: BTreeMap::new(),
            fresh,
            noop: rewrites == 0,
        },
    ))
}

/// Read a conventional SNC scheme as a KRP-by-SNC: the sender's chosen
/// message becomes a random bit it draws itself, and the pair's outputs
/// become relayed keys.
pub fn snc_to_krp_by_snc(p: &Protocol) -> Result<(Protocol, TransformTrace), KrlabError> {
    if p.setting != Setting::Snc || p.goal != Goal::Messages {
        return Err(KrlabError::Transform(format!(
            "snc-to-krpbysnc expects a conventional SNC source, got {:?}",
            p.setting
        )));
    }
    let mut next = fresh_random_allocator(p);
    let mut var_map = BTreeMap::new();
    let mut fresh = Vec::new();
    let mut sender_sides = Vec::new();
    for (pair, user) in p.graph.users().iter().enumerate() {
        let side = user.sender.ok_or_else(|| {
            KrlabError::Transform(format!("pair {pair} has no sender assignment"))
        })?;
        sender_sides.push(side);
        let node = user.node(side);
        let k = next.entry(node).or_insert(0);
        let var = Var::NodeRandom(node, *k);
        *k += 1;
        var_map.insert(Var::Message(pair), var);
        fresh.push(var);
    }
    let graph = Arc::new(p.graph.with_senders(&vec![None; p.graph.users().len()]));
    let mut image = Protocol::new(graph, Setting::KrpBySnc);
    image.goal = Goal::Keys;
    let mut step_map = Vec::new();
    for step in &p.schedule {
        let idx = image.schedule.len();
        match step {
            Step::SendSc {
                edge,
                from,
                payload,
            } => image.schedule.push(Step::SendSc {
                edge: *edge,
                from: *from,
                payload: substitute(payload, &var_map),
            }),
            Step::StartLks { .. } | Step::SendPc { .. } => {
                unreachable!("no LKS or PC steps in a valid conventional SNC source")
            }
        }
        step_map.push(vec![idx]);
    }
    for (pair, &side) in sender_sides.iter().enumerate() {
        let key = LinExpr::var(var_map[&Var::Message(pair)]);
        image.outputs.insert((pair, side), key);
        let decoded = p
            .outputs
            .get(&(pair, side.other()))
            .ok_or_else(|| KrlabError::Transform(format!("pair {pair} lacks a decoded output")))?;
        image
            .outputs
            .insert((pair, side.other()), substitute(decoded, &var_map));
    }
    Ok((
        image,
        TransformTrace {
            kind: TransformKind::SncToKrpBySnc,
            step_map,
            var_map,
            fresh,
            noop: false,
        },
    ))
}

/// Check that under the trace's variable map the adversary learns the same
/// subspace of the source variables in both protocols, for every member:
/// the image view, intersected with the subspace spanned by the source
/// atoms, must equal the mapped source view.
pub fn view_equivalent(
    src: &Protocol,
    img: &Protocol,
    trace: &TransformTrace,
    w: &WiretapCollection,
) -> Result<bool, KrlabError> {
    let ts = symbolic_execute(src)?;
    let ti = symbolic_execute(img)?;
    let img_cols: BTreeMap<Var, usize> = ti
        .basis
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let width = ti.basis.len();
    // Which image columns correspond to source atoms.
    let mut old_cols = vec![false; width];
    let mut src_to_img = Vec::with_capacity(ts.basis.len());
    for v in &ts.basis {
        let mapped = trace.var_map.get(v).copied().unwrap_or(*v);
        let col = img_cols.get(&mapped).copied().ok_or_else(|| {
            KrlabError::Transform("trace maps a variable outside the image basis".to_string())
        })?;
        old_cols[col] = true;
        src_to_img.push(col);
    }
    for member in &w.members {
        let sv = adversary_view(&ts, member, src.setting)?;
        let iv = adversary_view(&ti, member, img.setting)?;
        // Map source view rows into the image basis.
        let mut mapped = BitMatrix::new(width);
        for row in sv.rows() {
            let mut v = BitVector::zeros(width);
            for i in row.ones() {
                v.set(src_to_img[i], true);
            }
            mapped.push_row(v);
        }
        // Basis of rowspace(image view) ∩ span(source atoms): echelon form
        // with the non-source columns ordered first; rows whose leading
        // entry falls in the source region have no support outside it.
        let perm: Vec<usize> = (0..width)
            .filter(|&c| !old_cols[c])
            .chain((0..width).filter(|&c| old_cols[c]))
            .collect();
        let inv: Vec<usize> = {
            let mut inv = vec![0; width];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            inv
        };
        let n_new = old_cols.iter().filter(|&&b| !b).count();
        let mut ech = EchelonBasis::new(width);
        for row in iv.rows() {
            let mut permuted = BitVector::zeros(width);
            for i in row.ones() {
                permuted.set(inv[i], true);
            }
            ech.insert(permuted);
        }
        let mut restricted = BitMatrix::new(width);
        for row in ech.basis_rows() {
            if row.leading_index().is_some_and(|l| l >= n_new) {
                let mut unpermuted = BitVector::zeros(width);
                for i in row.ones() {
                    unpermuted.set(perm[i], true);
                }
                restricted.push_row(unpermuted);
            }
        }
        let ra = mapped.rank();
        let rb = restricted.rank();
        let rj = mapped.stacked(&restricted)?.rank();
        if !(ra == rb && rb == rj) {
            return Ok(false);
        }
    }
    Ok(true)
}
