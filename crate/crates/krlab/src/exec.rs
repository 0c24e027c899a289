//! Symbolic execution: resolve every payload and output of a valid
//! protocol to a GF(2) vector over the ordered basis of fundamental
//! variables.
//!
//! Payloads are already canonical linear expressions, so execution is the
//! resolution of each expression against the basis plus bookkeeping: which
//! bits are public, which secret bit rides each SC edge, and the total
//! order in which the one-shot channels fire.

use std::collections::BTreeMap;

use crate::error::KrlabError;
use crate::expr::Var;
use crate::gf2::{BitMatrix, BitVector};
use crate::net::Side;
use crate::proto::{Protocol, Step};

/// A payload or output resolved over the transcript basis. The constant
/// bit is kept apart from the vector part: only the vector part carries
/// information about the fundamental variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub vec: BitVector,
    pub constant: bool,
}

#[derive(Clone, Debug)]
pub struct TranscriptStep {
    pub step: Step,
    pub payload: Option<Resolved>,
}

/// A fully resolved symbolic run: a deterministic function of the protocol
/// alone.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub basis: Vec<Var>,
    col: BTreeMap<Var, usize>,
    pub steps: Vec<TranscriptStep>,
    pub outputs: BTreeMap<(usize, Side), Resolved>,
    /// Schedule indices of the public announcements, in order.
    pub public_steps: Vec<usize>,
    /// One-shot uses (LKS and SC) in schedule order: (position, edge).
    one_shot: Vec<usize>,
    usage_pos: BTreeMap<usize, usize>,
}

/// Total order over one-shot channel uses, induced by schedule position.
#[derive(Clone, Debug)]
pub struct UsageOrder {
    pos: BTreeMap<usize, usize>,
    edges: Vec<usize>,
}

impl UsageOrder {
    /// Position of an edge's one-shot use, if it fired.
    pub fn position(&self, edge: usize) -> Option<usize> {
        self.pos.get(&edge).copied()
    }

    /// True iff `a`'s one-shot use precedes `b`'s. Both must have fired.
    pub fn precedes(&self, a: usize, b: usize) -> Option<bool> {
        Some(self.pos.get(&a)? < self.pos.get(&b)?)
    }

    /// Edges in firing order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }
}

impl Transcript {
    pub fn column(&self, var: &Var) -> Option<usize> {
        self.col.get(var).copied()
    }

    pub fn resolve_var(&self, var: &Var) -> Option<Resolved> {
        Some(Resolved {
            vec: BitVector::unit(self.basis.len(), self.column(var)?),
            constant: false,
        })
    }

    /// The secret bit conveyed on an SC edge, if that edge was used.
    pub fn sc_payload(&self, edge: usize) -> Option<&Resolved> {
        self.steps.iter().find_map(|ts| match &ts.step {
            Step::SendSc { edge: e, .. } if *e == edge => ts.payload.as_ref(),
            _ => None,
        })
    }

    /// The SC step on an edge: (schedule index, sender node).
    pub fn sc_use(&self, edge: usize) -> Option<(usize, usize)> {
        self.steps
            .iter()
            .enumerate()
            .find_map(|(i, ts)| match &ts.step {
                Step::SendSc { edge: e, from, .. } if *e == edge => Some((i, *from)),
                _ => None,
            })
    }

    pub fn usage_order(&self) -> UsageOrder {
        UsageOrder {
            pos: self.usage_pos.clone(),
            edges: self.one_shot.clone(),
        }
    }

    /// All public payload vectors as a matrix, rows in schedule order.
    pub fn public_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.basis.len());
        for &i in &self.public_steps {
            m.push_row(
                self.steps[i]
                    .payload
                    .as_ref()
                    .expect("public step has payload")
                    .vec
                    .clone(),
            );
        }
        m
    }
}

/// Resolve a validated protocol. Errors if validation fails.
pub fn symbolic_execute(p: &Protocol) -> Result<Transcript, KrlabError> {
    p.validated()?;
    Ok(resolve_unchecked(p))
}

/// Resolution without the validity gate, for diagnostics that inspect
/// deliberately broken candidates.
pub fn resolve_unchecked(p: &Protocol) -> Transcript {
    let basis = p.basis();
    let col: BTreeMap<Var, usize> = basis
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let resolve = |e: &crate::expr::LinExpr| -> Resolved {
        let mut vec = BitVector::zeros(basis.len());
        for var in e.vars() {
            vec.set(col[var], true);
        }
        Resolved {
            vec,
            constant: e.constant,
        }
    };
    let mut steps = Vec::new();
    let mut public_steps = Vec::new();
    let mut one_shot = Vec::new();
    let mut usage_pos = BTreeMap::new();
    for (i, step) in p.schedule.iter().enumerate() {
        if step.is_one_shot() {
            usage_pos.insert(step.edge(), one_shot.len());
            one_shot.push(step.edge());
        }
        if matches!(step, Step::SendPc { .. }) {
            public_steps.push(i);
        }
        steps.push(TranscriptStep {
            step: step.clone(),
            payload: step.payload().map(&resolve),
        });
    }
    let outputs = p.outputs.iter().map(|(k, e)| (*k, resolve(e))).collect();
    Transcript {
        basis,
        col,
        steps,
        outputs,
        public_steps,
        one_shot,
        usage_pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::expr::Var;

    #[test]
    fn fig1_payload_and_outputs() {
        let p = demo::fig1();
        let t = symbolic_execute(&p).unwrap();
        let e1 = p.graph.edge_index("e1").unwrap();
        let e2 = p.graph.edge_index("e2").unwrap();
        let r1 = t.column(&Var::LocalKey(e1)).unwrap();
        let r2 = t.column(&Var::LocalKey(e2)).unwrap();

        // The announcement is r_{e1} ^ r_{e2}.
        let pc = t
            .steps
            .iter()
            .find(|s| matches!(s.step, Step::SendPc { .. }))
            .unwrap();
        let payload = pc.payload.as_ref().unwrap();
        assert!(payload.vec.get(r1) && payload.vec.get(r2));
        assert!(!payload.constant);

        // Both relayed keys resolve to r_{e1}.
        for side in [Side::U1, Side::U2] {
            let out = &t.outputs[&(0, side)];
            assert!(out.vec.get(r1));
            assert!(!out.vec.get(r2));
            assert!(!out.constant);
        }
    }

    #[test]
    fn fig3a_n4_key_cancels_to_r1() {
        let p = demo::fig3a(4);
        let t = symbolic_execute(&p).unwrap();
        let r1 = t
            .column(&Var::LocalKey(p.graph.edge_index("e1").unwrap()))
            .unwrap();
        let out = &t.outputs[&(0, Side::U2)];
        assert_eq!(out.vec.ones().collect::<Vec<_>>(), vec![r1]);
    }

    #[test]
    fn constant_zero_announcement() {
        use crate::expr::LinExpr;
        use crate::proto::{Protocol, Setting, Step};
        let g = demo::fig1().graph.clone();
        let mut p = Protocol::new(g.clone(), Setting::Krp);
        let e1 = g.edge_index("e1").unwrap();
        let e2 = g.edge_index("e2").unwrap();
        let v = g.node_index("v").unwrap();
        p.schedule.push(Step::StartLks { edge: e1, from: v });
        p.schedule.push(Step::StartLks { edge: e2, from: v });
        p.schedule.push(Step::SendPc {
            edge: e2,
            from: v,
            payload: LinExpr::constant(false),
        });
        // A zero announcement tells u2 nothing, so it cannot output r_e1.
        p.outputs
            .insert((0, Side::U1), LinExpr::var(Var::LocalKey(e1)));
        p.outputs
            .insert((0, Side::U2), LinExpr::var(Var::LocalKey(e1)));
        assert!(!p.validate().is_valid());
        // Each side outputting its own key is causal (though unsound).
        p.outputs
            .insert((0, Side::U2), LinExpr::var(Var::LocalKey(e2)));
        let t = symbolic_execute(&p).unwrap();
        let pc = t
            .steps
            .iter()
            .find(|s| matches!(s.step, Step::SendPc { .. }))
            .unwrap();
        let payload = pc.payload.as_ref().unwrap();
        assert!(payload.vec.is_zero());
        assert!(!payload.constant);
    }

    #[test]
    fn usage_order_follows_schedule() {
        let p = demo::fig1();
        let t = symbolic_execute(&p).unwrap();
        let order = t.usage_order();
        let e1 = p.graph.edge_index("e1").unwrap();
        let e2 = p.graph.edge_index("e2").unwrap();
        assert_eq!(order.precedes(e1, e2), Some(true));
        assert_eq!(order.position(e1), Some(0));
    }

    #[test]
    fn determinism() {
        let p = demo::fig3b();
        let a = symbolic_execute(&p).unwrap();
        let b = symbolic_execute(&p).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.outputs, b.outputs);
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.payload, y.payload);
        }
    }
}
