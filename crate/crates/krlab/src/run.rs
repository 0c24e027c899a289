//! Concrete execution of a linear protocol: each node computes its sends
//! from the data it actually holds, so tampering with a single delivery
//! propagates exactly as it would in a real run.
//!
//! Compilation decomposes every payload over the sender's received
//! generators (Gaussian elimination with generators taken in arrival
//! order). The run then evaluates those decompositions on drawn bits. By
//! linearity, the difference between a tampered and an untampered run is a
//! fixed offset independent of the draw; `tamper_offset` computes it by
//! running the compiled program on the all-zero draw with only the
//! tampered slot flipped.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::error::KrlabError;
use crate::exec::{resolve_unchecked, Transcript};
use crate::expr::Var;
use crate::gf2::BitVector;
use crate::net::Side;
use crate::proto::{Protocol, Step};

/// A single-point perturbation of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tamper {
    /// Flip the bit delivered by schedule step `step` (a PC or SC send) as
    /// seen by its receiver.
    InTransit { step: usize },
    /// Flip the local key of `edge` as delivered to `node`.
    LksDelivery { edge: usize, node: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gen {
    /// A variable the node owns (node randomness or its pair message).
    Own(Var),
    /// The local key of `edge`, delivered to this node by its LKS.
    Lks { edge: usize },
    /// The payload of schedule step `step`, received on an incident edge.
    Recv { step: usize },
}

struct NodeState {
    gens: Vec<Gen>,
    /// Echelon rows over the transcript basis, with the combination of
    /// generators that produced each row.
    echelon: Vec<(BitVector, Vec<usize>)>,
}

impl NodeState {
    fn new() -> Self {
        NodeState {
            gens: Vec::new(),
            echelon: Vec::new(),
        }
    }

    fn add_gen(&mut self, gen: Gen, vec: BitVector) {
        let idx = self.gens.len();
        self.gens.push(gen);
        let mut v = vec;
        let mut combo = vec![idx];
        loop {
            let Some(lead) = v.leading_index() else {
                return;
            };
            match self
                .echelon
                .iter()
                .find(|(b, _)| b.leading_index() == Some(lead))
            {
                Some((b, c)) => {
                    let (b, c) = (b.clone(), c.clone());
                    v.xor_assign(&b);
                    combo = xor_combo(combo, c);
                }
                None => {
                    self.echelon.push((v, combo));
                    return;
                }
            }
        }
    }

    /// Express `target` as an XOR of generators, if possible.
    fn decompose(&self, target: &BitVector) -> Option<Vec<usize>> {
        let mut v = target.clone();
        let mut combo = Vec::new();
        loop {
            let Some(lead) = v.leading_index() else {
                return Some(combo);
            };
            let (b, c) = self
                .echelon
                .iter()
                .find(|(b, _)| b.leading_index() == Some(lead))?;
            v.xor_assign(b);
            combo = xor_combo(combo, c.clone());
        }
    }
}

fn xor_combo(mut a: Vec<usize>, b: Vec<usize>) -> Vec<usize> {
    for x in b {
        if let Some(pos) = a.iter().position(|&y| y == x) {
            a.remove(pos);
        } else {
            a.push(x);
        }
    }
    a
}

fn gen_vector(
    transcript: &Transcript,
    col: &BTreeMap<Var, usize>,
    width: usize,
    gen: Gen,
) -> BitVector {
    match gen {
        Gen::Own(v) => BitVector::unit(width, col[&v]),
        Gen::Lks { edge } => BitVector::unit(width, col[&Var::LocalKey(edge)]),
        Gen::Recv { step } => transcript.steps[step]
            .payload
            .as_ref()
            .expect("recv has payload")
            .vec
            .clone(),
    }
}

/// XOR of the affine constants the generators carry: received payloads
/// deliver `vec·x ^ c`, so a combination of them is off from its vector
/// part by the XOR of their constants.
fn gens_constant(transcript: &Transcript, gens: &[Gen]) -> bool {
    gens.iter().fold(false, |acc, g| {
        acc ^ match g {
            Gen::Recv { step } => {
                transcript.steps[*step]
                    .payload
                    .as_ref()
                    .expect("recv has payload")
                    .constant
            }
            Gen::Own(_) | Gen::Lks { .. } => false,
        }
    })
}

/// What each node computes at each of its sends, in terms of its received
/// generators. Compile once, run many seeds.
pub struct LocalProgram {
    transcript: Transcript,
    /// Per schedule step: sender node, generator combination, constant.
    step_programs: Vec<Option<(usize, Vec<Gen>, bool)>>,
    output_programs: BTreeMap<(usize, Side), (Vec<OutGen>, bool)>,
    output_nodes: BTreeMap<(usize, Side), usize>,
    n_pc: usize,
}

#[derive(Clone, Copy, Debug)]
enum OutGen {
    Node(Gen),
    /// A public announcement, usable by every user at output time.
    Public {
        step: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    /// Drawn value for each basis variable, in basis order.
    pub draws: Vec<bool>,
    /// One bit per schedule step; None for LKS starts.
    pub step_bits: Vec<Option<bool>>,
    pub outputs: BTreeMap<(usize, Side), bool>,
}

impl LocalProgram {
    pub fn compile(p: &Protocol) -> Result<LocalProgram, KrlabError> {
        p.validated()?;
        let transcript = resolve_unchecked(p);
        let width = transcript.basis.len();
        let col: BTreeMap<Var, usize> = transcript
            .basis
            .iter()
            .copied()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let mut nodes: Vec<NodeState> = (0..p.graph.node_count())
            .map(|_| NodeState::new())
            .collect();
        for (var, &c) in &col {
            match var {
                Var::NodeRandom(node, _) => {
                    nodes[*node].add_gen(Gen::Own(*var), BitVector::unit(width, c))
                }
                Var::Message(pair) => {
                    let side = p.graph.users()[*pair]
                        .sender
                        .expect("validated message ownership");
                    let node = p.graph.users()[*pair].node(side);
                    nodes[node].add_gen(Gen::Own(*var), BitVector::unit(width, c));
                }
                Var::LocalKey(_) => {}
            }
        }
        let mut step_programs = Vec::with_capacity(p.schedule.len());
        let mut n_pc = 0;
        for (i, step) in p.schedule.iter().enumerate() {
            let edge = p.graph.edge(step.edge()).clone();
            match step {
                Step::StartLks { edge: e, .. } => {
                    let unit = BitVector::unit(width, col[&Var::LocalKey(*e)]);
                    nodes[edge.a].add_gen(Gen::Lks { edge: *e }, unit.clone());
                    nodes[edge.b].add_gen(Gen::Lks { edge: *e }, unit);
                    step_programs.push(None);
                }
                Step::SendPc { from, .. } | Step::SendSc { from, .. } => {
                    if matches!(step, Step::SendPc { .. }) {
                        n_pc += 1;
                    }
                    let resolved = transcript.steps[i]
                        .payload
                        .as_ref()
                        .expect("send has payload");
                    let combo = nodes[*from].decompose(&resolved.vec).ok_or_else(|| {
                        KrlabError::InvalidProtocol(format!(
                            "step {i}: sender cannot compute payload"
                        ))
                    })?;
                    let gens: Vec<Gen> = combo.iter().map(|&g| nodes[*from].gens[g]).collect();
                    // The decomposition matches vector parts; the node
                    // flips its correction bit to absorb the affine
                    // constants its received generators carry.
                    let constant = resolved.constant ^ gens_constant(&transcript, &gens);
                    step_programs.push(Some((*from, gens, constant)));
                    let to = edge.other_end(*from).expect("validated endpoint");
                    nodes[to].add_gen(Gen::Recv { step: i }, resolved.vec.clone());
                }
            }
        }
        let mut output_programs = BTreeMap::new();
        let mut output_nodes = BTreeMap::new();
        for ((pair, side), resolved) in &transcript.outputs {
            let node = p.graph.users()[*pair].node(*side);
            output_nodes.insert((*pair, *side), node);
            // Outputs may combine the user's own data with any public bit.
            let mut out_state = NodeState::new();
            for gen in nodes[node].gens.clone() {
                let vec = gen_vector(&transcript, &col, width, gen);
                out_state.add_gen(gen, vec);
            }
            let public_base = out_state.gens.len();
            for &s in &transcript.public_steps {
                let vec = transcript.steps[s].payload.as_ref().unwrap().vec.clone();
                out_state.add_gen(Gen::Recv { step: s }, vec);
            }
            let combo = out_state.decompose(&resolved.vec).ok_or_else(|| {
                KrlabError::InvalidProtocol(format!("pair {pair} output not computable"))
            })?;
            let plain: Vec<Gen> = combo.iter().map(|&g| out_state.gens[g]).collect();
            let constant = resolved.constant ^ gens_constant(&transcript, &plain);
            let gens = combo
                .iter()
                .map(|&g| {
                    if g < public_base {
                        OutGen::Node(out_state.gens[g])
                    } else {
                        let Gen::Recv { step } = out_state.gens[g] else {
                            unreachable!()
                        };
                        OutGen::Public { step }
                    }
                })
                .collect();
            output_programs.insert((*pair, *side), (gens, constant));
        }
        Ok(LocalProgram {
            transcript,
            step_programs,
            output_programs,
            output_nodes,
            n_pc,
        })
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn public_count(&self) -> usize {
        self.n_pc
    }

    /// Evaluate on drawn bits; `tamper` optionally flips one delivery.
    /// With `linear_only`, constants are suppressed so the result is the
    /// pure linear image of the draw (used for offset prediction).
    fn eval(&self, draws: &[bool], tamper: Option<Tamper>, linear_only: bool) -> RunOutcome {
        let col: BTreeMap<Var, usize> = self
            .transcript
            .basis
            .iter()
            .copied()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let mut step_bits: Vec<Option<bool>> = Vec::with_capacity(self.step_programs.len());
        let gen_value = |gen: Gen, node: usize, step_bits: &[Option<bool>]| -> bool {
            match gen {
                Gen::Own(v) => draws[col[&v]],
                Gen::Lks { edge } => {
                    let mut b = draws[col[&Var::LocalKey(edge)]];
                    if tamper == Some(Tamper::LksDelivery { edge, node }) {
                        b ^= true;
                    }
                    b
                }
                Gen::Recv { step } => {
                    let mut b = step_bits[step].expect("received step evaluated");
                    if tamper == Some(Tamper::InTransit { step }) {
                        b ^= true;
                    }
                    b
                }
            }
        };
        for program in &self.step_programs {
            match program {
                None => step_bits.push(None),
                Some((from, gens, constant)) => {
                    let mut bit = *constant && !linear_only;
                    for &g in gens {
                        bit ^= gen_value(g, *from, &step_bits);
                    }
                    step_bits.push(Some(bit));
                }
            }
        }
        let mut outputs = BTreeMap::new();
        for ((pair, side), (gens, constant)) in &self.output_programs {
            let user_node = self.output_nodes[&(*pair, *side)];
            let mut bit = *constant && !linear_only;
            for g in gens {
                bit ^= match g {
                    OutGen::Node(gen) => gen_value(*gen, user_node, &step_bits),
                    // An in-transit flip corrupts the wire itself, so the
                    // public record carries the flipped bit too.
                    OutGen::Public { step } => {
                        step_bits[*step].expect("public step evaluated")
                            ^ (tamper == Some(Tamper::InTransit { step: *step }))
                    }
                };
            }
            outputs.insert((*pair, *side), bit);
        }
        RunOutcome {
            draws: draws.to_vec(),
            step_bits,
            outputs,
        }
    }

    /// Draw every variable uniformly from the seed and evaluate.
    pub fn sample_run(&self, seed: u64) -> RunOutcome {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let draws: Vec<bool> = (0..self.transcript.basis.len())
            .map(|_| rng.gen())
            .collect();
        self.eval(&draws, None, false)
    }

    /// Evaluate on an explicit assignment of the basis variables.
    pub fn run_on(&self, draws: &[bool]) -> RunOutcome {
        assert_eq!(draws.len(), self.transcript.basis.len());
        self.eval(draws, None, false)
    }

    pub fn run_with_tamper(&self, seed: u64, tamper: Tamper) -> RunOutcome {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let draws: Vec<bool> = (0..self.transcript.basis.len())
            .map(|_| rng.gen())
            .collect();
        self.eval(&draws, Some(tamper), false)
    }

    /// The seed-independent offset a tamper induces on every step bit and
    /// output: the compiled program applied to the zero draw with only the
    /// tampered slot flipped.
    pub fn tamper_offset(&self, tamper: Tamper) -> RunOutcome {
        let draws = vec![false; self.transcript.basis.len()];
        self.eval(&draws, Some(tamper), true)
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TamperReport {
    pub seeds_checked: usize,
    /// Offset on each step bit (None for LKS steps).
    pub step_offsets: Vec<Option<bool>>,
    pub output_offsets: BTreeMap<String, bool>,
    /// True when every seed's run difference equals the predicted offset.
    pub offsets_seed_independent: bool,
}

/// Verify over `seeds` sampled runs that the perturbed run differs from
/// the unperturbed one by the predicted seed-independent offset. With
/// `delta` false the perturbation is the identity and every offset is 0.
pub fn check_tamper_linearity(
    p: &Protocol,
    tamper: Tamper,
    delta: bool,
    seeds: u64,
) -> Result<TamperReport, KrlabError> {
    let program = LocalProgram::compile(p)?;
    let predicted = if delta {
        program.tamper_offset(tamper)
    } else {
        let zero = vec![false; program.transcript().basis.len()];
        program.eval(&zero, None, true)
    };
    let mut ok = true;
    for seed in 0..seeds {
        let base = program.sample_run(seed);
        let tampered = if delta {
            program.run_with_tamper(seed, tamper)
        } else {
            program.sample_run(seed)
        };
        for (i, (a, b)) in base.step_bits.iter().zip(&tampered.step_bits).enumerate() {
            let diff = match (a, b) {
                (Some(x), Some(y)) => Some(x ^ y),
                _ => None,
            };
            if diff != predicted.step_bits[i] {
                ok = false;
            }
        }
        for (k, v) in &base.outputs {
            if tampered.outputs[k] ^ v != predicted.outputs[k] {
                ok = false;
            }
        }
    }
    Ok(TamperReport {
        seeds_checked: seeds as usize,
        step_offsets: predicted.step_bits.clone(),
        output_offsets: predicted
            .outputs
            .iter()
            .map(|((pair, side), &v)| {
                (
                    format!("u[{pair},{}]", if *side == Side::U1 { 1 } else { 2 }),
                    v,
                )
            })
            .collect(),
        offsets_seed_independent: ok,
    })
}

/// Check that a concrete outcome matches the symbolic transcript: every
/// step bit and output equals its resolved vector evaluated on the draw.
pub fn agrees_with_symbolic(program: &LocalProgram, outcome: &RunOutcome) -> bool {
    let t = program.transcript();
    let assignment = BitVector::from_bits(&outcome.draws);
    for (i, ts) in t.steps.iter().enumerate() {
        if let Some(resolved) = &ts.payload {
            let expect = resolved.vec.dot(&assignment) ^ resolved.constant;
            if outcome.step_bits[i] != Some(expect) {
                return false;
            }
        }
    }
    for (k, resolved) in &t.outputs {
        let expect = resolved.vec.dot(&assignment) ^ resolved.constant;
        if outcome.outputs.get(k) != Some(&expect) {
            return false;
        }
    }
    true
}
