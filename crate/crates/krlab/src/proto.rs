//! One-shot linear protocols: schedules of channel uses with GF(2) linear
//! payloads, plus validation.
//!
//! Validation enforces the one-shot discipline (each LKS and each SC fires
//! at most once), channel/setting agreement, and causality: a node may only
//! send expressions inside the GF(2) span of what it has generated or
//! received so far. User outputs may additionally draw on all public
//! announcements, since public bits reach everyone (including the
//! adversary) by definition.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::KrlabError;
use crate::expr::{LinExpr, Var};
use crate::gf2::{BitVector, EchelonBasis};
use crate::net::{Graph, Side, TopologyDoc, WiretapCollection};

/// The four channel/goal settings of the protocol zoo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    /// Local key sources and public channels; goal: shared random bits.
    #[serde(rename = "krp")]
    Krp,
    /// Secret channels and public channels; goal: chosen messages.
    #[serde(rename = "snc_pc")]
    SncPc,
    /// Secret channels only; goal: chosen messages.
    #[serde(rename = "snc")]
    Snc,
    /// Secret channels only; goal: shared random bits.
    #[serde(rename = "krp_by_snc")]
    KrpBySnc,
}

impl Setting {
    pub fn allows_lks(self) -> bool {
        matches!(self, Setting::Krp)
    }

    pub fn allows_pc(self) -> bool {
        matches!(self, Setting::Krp | Setting::SncPc)
    }

    pub fn allows_sc(self) -> bool {
        matches!(self, Setting::SncPc | Setting::Snc | Setting::KrpBySnc)
    }

    pub fn default_goal(self) -> Goal {
        match self {
            Setting::Krp | Setting::KrpBySnc => Goal::Keys,
            Setting::SncPc | Setting::Snc => Goal::Messages,
        }
    }
}

/// What the user outputs mean: relayed keys (both endpoints must agree) or
/// decoded messages (the receiver must reproduce the sender's choice).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Goal {
    #[serde(rename = "keys")]
    Keys,
    #[serde(rename = "messages")]
    Messages,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Fire the local key source on an edge; the initiator is recorded but
    /// carries no information.
    StartLks { edge: usize, from: usize },
    /// Announce a bit on a public channel; delivered to the other end node
    /// and to the adversary.
    SendPc {
        edge: usize,
        from: usize,
        payload: LinExpr,
    },
    /// Send a bit over a one-use secret channel.
    SendSc {
        edge: usize,
        from: usize,
        payload: LinExpr,
    },
}

impl Step {
    pub fn edge(&self) -> usize {
        match self {
            Step::StartLks { edge, .. } | Step::SendPc { edge, .. } | Step::SendSc { edge, .. } => {
                *edge
            }
        }
    }

    pub fn from(&self) -> usize {
        match self {
            Step::StartLks { from, .. } | Step::SendPc { from, .. } | Step::SendSc { from, .. } => {
                *from
            }
        }
    }

    pub fn payload(&self) -> Option<&LinExpr> {
        match self {
            Step::StartLks { .. } => None,
            Step::SendPc { payload, .. } | Step::SendSc { payload, .. } => Some(payload),
        }
    }

    pub fn is_one_shot(&self) -> bool {
        matches!(self, Step::StartLks { .. } | Step::SendSc { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Protocol {
    pub graph: Arc<Graph>,
    pub setting: Setting,
    pub goal: Goal,
    pub schedule: Vec<Step>,
    pub outputs: BTreeMap<(usize, Side), LinExpr>,
}

impl Protocol {
    pub fn new(graph: Arc<Graph>, setting: Setting) -> Self {
        Protocol {
            goal: setting.default_goal(),
            graph,
            setting,
            schedule: Vec::new(),
            outputs: BTreeMap::new(),
        }
    }

    /// The ordered basis of fundamental variables: every generated local
    /// key plus every node-random and message atom appearing anywhere.
    pub fn basis(&self) -> Vec<Var> {
        let mut vars = BTreeSet::new();
        for step in &self.schedule {
            if let Step::StartLks { edge, .. } = step {
                vars.insert(Var::LocalKey(*edge));
            }
            if let Some(p) = step.payload() {
                vars.extend(p.vars().copied());
            }
        }
        for out in self.outputs.values() {
            vars.extend(out.vars().copied());
        }
        vars.into_iter().collect()
    }

    pub fn output(&self, pair: usize, side: Side) -> Option<&LinExpr> {
        self.outputs.get(&(pair, side))
    }

    /// Run all validity checks; the protocol is valid iff the report has
    /// no violations.
    pub fn validate(&self) -> ValidationReport {
        Validator::new(self).run()
    }

    pub fn validated(&self) -> Result<(), KrlabError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(KrlabError::InvalidProtocol(report.to_string()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    /// Schedule index, or None for output/global violations.
    pub step: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    SettingChannel,
    UnknownReference,
    NotAnEndpoint,
    OneShotReuse,
    Causality,
    OutputUnknowable,
    MissingOutput,
    MessageOwnership,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            match v.step {
                Some(i) => writeln!(f, "step {i}: {:?}: {}", v.kind, v.detail)?,
                None => writeln!(f, "{:?}: {}", v.kind, v.detail)?,
            }
        }
        Ok(())
    }
}

struct Validator<'p> {
    p: &'p Protocol,
    basis: Vec<Var>,
    col: BTreeMap<Var, usize>,
    spans: Vec<EchelonBasis>,
    public: Vec<BitVector>,
    report: ValidationReport,
}

impl<'p> Validator<'p> {
    fn new(p: &'p Protocol) -> Self {
        let basis = p.basis();
        let col: BTreeMap<Var, usize> = basis
            .iter()
            .copied()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let spans = (0..p.graph.node_count())
            .map(|_| EchelonBasis::new(basis.len()))
            .collect();
        Validator {
            p,
            basis,
            col,
            spans,
            public: Vec::new(),
            report: ValidationReport::default(),
        }
    }

    fn vec_of(&self, e: &LinExpr) -> BitVector {
        let mut v = BitVector::zeros(self.basis.len());
        for var in e.vars() {
            v.set(self.col[var], true);
        }
        v
    }

    fn violate(&mut self, step: Option<usize>, kind: ViolationKind, detail: String) {
        self.report
            .violations
            .push(Violation { step, kind, detail });
    }

    fn run(mut self) -> ValidationReport {
        self.seed_initial_knowledge();
        let generated: BTreeSet<usize> = self
            .p
            .schedule
            .iter()
            .filter_map(|s| match s {
                Step::StartLks { edge, .. } => Some(*edge),
                _ => None,
            })
            .collect();
        // Local keys referenced anywhere must come from some LKS start.
        for var in self.basis.clone() {
            if let Var::LocalKey(e) = var {
                if !generated.contains(&e) {
                    self.violate(
                        None,
                        ViolationKind::UnknownReference,
                        format!(
                            "local key r[{}] is referenced but LKS never fires",
                            self.p.graph.edge_id(e)
                        ),
                    );
                }
            }
        }

        let mut lks_used: BTreeSet<usize> = BTreeSet::new();
        let mut sc_used: BTreeSet<usize> = BTreeSet::new();
        for (i, step) in self.p.schedule.iter().enumerate() {
            self.check_step(i, step, &mut lks_used, &mut sc_used);
        }
        self.check_outputs();
        self.report
    }

    fn seed_initial_knowledge(&mut self) {
        for (i, var) in self.basis.clone().iter().enumerate() {
            match var {
                Var::NodeRandom(node, _) => {
                    let unit = BitVector::unit(self.basis.len(), i);
                    self.spans[*node].insert(unit);
                }
                Var::Message(pair) => {
                    match self.p.graph.users().get(*pair).and_then(|u| u.sender) {
                        Some(side) => {
                            let node = self.p.graph.users()[*pair].node(side);
                            let unit = BitVector::unit(self.basis.len(), i);
                            self.spans[node].insert(unit);
                        }
                        None => self.violate(
                            None,
                            ViolationKind::MessageOwnership,
                            format!("message m[{pair}] used but pair {pair} declares no sender"),
                        ),
                    }
                }
                Var::LocalKey(_) => {}
            }
        }
    }

    fn check_step(
        &mut self,
        i: usize,
        step: &Step,
        lks_used: &mut BTreeSet<usize>,
        sc_used: &mut BTreeSet<usize>,
    ) {
        let edge_idx = step.edge();
        if edge_idx >= self.p.graph.edge_count() {
            self.violate(
                Some(i),
                ViolationKind::UnknownReference,
                format!("edge index {edge_idx} out of range"),
            );
            return;
        }
        let edge = self.p.graph.edge(edge_idx).clone();
        let from = step.from();
        if !edge.touches(from) {
            self.violate(
                Some(i),
                ViolationKind::NotAnEndpoint,
                format!(
                    "node `{}` is not an endpoint of edge `{}`",
                    self.p.graph.node_id(from),
                    edge.id
                ),
            );
            return;
        }
        let to = edge.other_end(from).expect("endpoint checked");
        match step {
            Step::StartLks { .. } => {
                if !self.p.setting.allows_lks() {
                    self.violate(
                        Some(i),
                        ViolationKind::SettingChannel,
                        format!("LKS use in {:?} setting", self.p.setting),
                    );
                }
                if !lks_used.insert(edge_idx) {
                    self.violate(
                        Some(i),
                        ViolationKind::OneShotReuse,
                        format!("LKS on edge `{}` fired more than once", edge.id),
                    );
                    return;
                }
                let var = Var::LocalKey(edge_idx);
                let unit = BitVector::unit(self.basis.len(), self.col[&var]);
                self.spans[edge.a].insert(unit.clone());
                self.spans[edge.b].insert(unit);
            }
            Step::SendPc { payload, .. } => {
                if !self.p.setting.allows_pc() {
                    self.violate(
                        Some(i),
                        ViolationKind::SettingChannel,
                        format!("PC use in {:?} setting", self.p.setting),
                    );
                }
                let vec = self.vec_of(payload);
                if !self.spans[from].contains(&vec) {
                    self.violate(
                        Some(i),
                        ViolationKind::Causality,
                        format!(
                            "`{}` cannot yet compute payload {}",
                            self.p.graph.node_id(from),
                            payload.display(&self.p.graph)
                        ),
                    );
                }
                self.spans[to].insert(vec.clone());
                self.public.push(vec);
            }
            Step::SendSc { payload, .. } => {
                if !self.p.setting.allows_sc() {
                    self.violate(
                        Some(i),
                        ViolationKind::SettingChannel,
                        format!("SC use in {:?} setting", self.p.setting),
                    );
                }
                if !sc_used.insert(edge_idx) {
                    self.violate(
                        Some(i),
                        ViolationKind::OneShotReuse,
                        format!("SC on edge `{}` used more than once", edge.id),
                    );
                    return;
                }
                let vec = self.vec_of(payload);
                if !self.spans[from].contains(&vec) {
                    self.violate(
                        Some(i),
                        ViolationKind::Causality,
                        format!(
                            "`{}` cannot yet compute payload {}",
                            self.p.graph.node_id(from),
                            payload.display(&self.p.graph)
                        ),
                    );
                }
                self.spans[to].insert(vec);
            }
        }
    }

    fn check_outputs(&mut self) {
        for ((pair, side), expr) in &self.p.outputs {
            let Some(user) = self.p.graph.users().get(*pair) else {
                self.violate(
                    None,
                    ViolationKind::UnknownReference,
                    format!("output for unknown pair {pair}"),
                );
                continue;
            };
            let node = user.node(*side);
            let vec = self.vec_of(expr);
            // The user's own knowledge plus every public bit: public
            // information is available to everyone once announced.
            let mut joined = EchelonBasis::new(self.basis.len());
            for row in self.spans[node].basis_rows() {
                joined.insert(row.clone());
            }
            for row in &self.public {
                joined.insert(row.clone());
            }
            if !joined.contains(&vec) {
                self.report.violations.push(Violation {
                    step: None,
                    kind: ViolationKind::OutputUnknowable,
                    detail: format!(
                        "user u[{pair},{}] cannot compute output {}",
                        match side {
                            Side::U1 => 1,
                            Side::U2 => 2,
                        },
                        expr.display(&self.p.graph)
                    ),
                });
            }
        }
        match self.p.goal {
            Goal::Keys => {
                for pair in 0..self.p.graph.users().len() {
                    for side in [Side::U1, Side::U2] {
                        if !self.p.outputs.contains_key(&(pair, side)) {
                            self.report.violations.push(Violation {
                                step: None,
                                kind: ViolationKind::MissingOutput,
                                detail: format!(
                                    "pair {pair} has no relayed-key output on side {side:?}"
                                ),
                            });
                        }
                    }
                }
            }
            Goal::Messages => {
                for (pair, user) in self.p.graph.users().iter().enumerate() {
                    match user.sender {
                        Some(sender) => {
                            if !self.p.outputs.contains_key(&(pair, sender.other())) {
                                self.report.violations.push(Violation {
                                    step: None,
                                    kind: ViolationKind::MissingOutput,
                                    detail: format!(
                                        "pair {pair} has no decoded-message output at the receiver"
                                    ),
                                });
                            }
                        }
                        None => self.report.violations.push(Violation {
                            step: None,
                            kind: ViolationKind::MessageOwnership,
                            detail: format!(
                                "message goal requires a sender assignment for pair {pair}"
                            ),
                        }),
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// On-disk protocol documents.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolDoc {
    pub setting: Setting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Goal>,
    pub graph: GraphRef,
    pub schedule: Vec<StepDoc>,
    pub outputs: Vec<OutputDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Inline(TopologyDoc),
    Path(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDoc {
    pub op: String,
    pub edge: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputDoc {
    pub user: String,
    pub expr: String,
}

impl Protocol {
    /// Load a protocol document, resolving an inline or referenced graph.
    /// `base_dir` anchors relative graph paths.
    pub fn from_doc(
        doc: &ProtocolDoc,
        base_dir: Option<&std::path::Path>,
    ) -> Result<(Protocol, Option<WiretapCollection>), KrlabError> {
        let topo = match &doc.graph {
            GraphRef::Inline(t) => t.clone(),
            GraphRef::Path(p) => {
                let path = match base_dir {
                    Some(dir) => dir.join(p),
                    None => std::path::PathBuf::from(p),
                };
                let text = std::fs::read_to_string(&path)?;
                serde_json::from_str(&text)?
            }
        };
        let graph = Arc::new(Graph::from_doc(&topo)?);
        let wiretap = match &topo.wiretap {
            Some(members) => Some(WiretapCollection::from_ids(&graph, members)?),
            None => None,
        };
        let mut p = Protocol::new(graph.clone(), doc.setting);
        if let Some(goal) = doc.goal {
            p.goal = goal;
        }
        for s in &doc.schedule {
            let edge = graph
                .edge_index(&s.edge)
                .ok_or_else(|| KrlabError::ProtocolFile(format!("unknown edge `{}`", s.edge)))?;
            let from = match &s.from {
                Some(f) => graph
                    .node_index(f)
                    .ok_or_else(|| KrlabError::ProtocolFile(format!("unknown node `{f}`")))?,
                None => graph.edge(edge).a,
            };
            let step = match s.op.as_str() {
                "lks" => Step::StartLks { edge, from },
                "pc" | "sc" => {
                    let text = s.payload.as_ref().ok_or_else(|| {
                        KrlabError::ProtocolFile(format!("`{}` step needs a payload", s.op))
                    })?;
                    let payload = LinExpr::parse(text, &graph)?;
                    if s.op == "pc" {
                        Step::SendPc {
                            edge,
                            from,
                            payload,
                        }
                    } else {
                        Step::SendSc {
                            edge,
                            from,
                            payload,
                        }
                    }
                }
                other => return Err(KrlabError::ProtocolFile(format!("unknown op `{other}`"))),
            };
            p.schedule.push(step);
        }
        for o in &doc.outputs {
            let (pair, side) = parse_user_ref(&o.user)?;
            if pair >= graph.users().len() {
                return Err(KrlabError::ProtocolFile(format!(
                    "output references unknown pair {pair}"
                )));
            }
            let expr = LinExpr::parse(&o.expr, &graph)?;
            p.outputs.insert((pair, side), expr);
        }
        Ok((p, wiretap))
    }

    pub fn to_doc(&self, wiretap: Option<&WiretapCollection>) -> ProtocolDoc {
        let g = &self.graph;
        ProtocolDoc {
            setting: self.setting,
            goal: if self.goal == self.setting.default_goal() {
                None
            } else {
                Some(self.goal)
            },
            graph: GraphRef::Inline(g.to_doc(wiretap)),
            schedule: self
                .schedule
                .iter()
                .map(|s| StepDoc {
                    op: match s {
                        Step::StartLks { .. } => "lks".into(),
                        Step::SendPc { .. } => "pc".into(),
                        Step::SendSc { .. } => "sc".into(),
                    },
                    edge: g.edge_id(s.edge()).to_string(),
                    from: Some(g.node_id(s.from()).to_string()),
                    payload: s.payload().map(|p| p.display(g).to_string()),
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|((pair, side), expr)| OutputDoc {
                    user: format!(
                        "u[{pair},{}]",
                        match side {
                            Side::U1 => 1,
                            Side::U2 => 2,
                        }
                    ),
                    expr: expr.display(g).to_string(),
                })
                .collect(),
        }
    }
}

fn parse_user_ref(s: &str) -> Result<(usize, Side), KrlabError> {
    let s = s.trim();
    let inner = s
        .strip_prefix("u[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| {
            KrlabError::ProtocolFile(format!("bad user reference `{s}`; expected u[i,j]"))
        })?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 2 {
        return Err(KrlabError::ProtocolFile(format!(
            "bad user reference `{s}`"
        )));
    }
    let pair: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| KrlabError::ProtocolFile(format!("bad pair index in `{s}`")))?;
    let side = match parts[1].trim() {
        "1" => Side::U1,
        "2" => Side::U2,
        _ => {
            return Err(KrlabError::ProtocolFile(format!(
                "bad side in `{s}`; expected 1 or 2"
            )))
        }
    };
    Ok((pair, side))
}
