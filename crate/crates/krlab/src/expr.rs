//! GF(2) linear expressions over the fundamental random variables of a
//! protocol run.
//!
//! The atoms are `r[edge]` (a local key delivered by an LKS), `x[node,k]`
//! (randomness generated by a player), `m[i]` (the message chosen by pair
//! i's sender) and the constant `1`. An expression is a set of atoms XORed
//! together plus a constant bit; the canonical form keeps each atom at
//! most once, so algebraic cancellation happens on construction.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::KrlabError;
use crate::net::Graph;

/// One fundamental uniform GF(2) variable. Identifiers are resolved graph
/// indices, not strings; use [`Var::display`] to print against a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// The local key r_e delivered by the LKS on an edge.
    LocalKey(usize),
    /// Randomness generated by a node before or during the run.
    NodeRandom(usize, u32),
    /// The message chosen by the sender of pair i.
    Message(usize),
}

impl Var {
    pub fn display<'g>(&self, graph: &'g Graph) -> VarDisplay<'g> {
        VarDisplay { var: *self, graph }
    }
}

pub struct VarDisplay<'g> {
    var: Var,
    graph: &'g Graph,
}

impl fmt::Display for VarDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.var {
            Var::LocalKey(e) => write!(f, "r[{}]", self.graph.edge_id(e)),
            Var::NodeRandom(v, k) => write!(f, "x[{},{}]", self.graph.node_id(v), k),
            Var::Message(i) => write!(f, "m[{i}]"),
        }
    }
}

/// A linear expression: XOR of distinct variables plus a constant bit.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub constant: bool,
    vars: BTreeSet<Var>,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(bit: bool) -> Self {
        LinExpr {
            constant: bit,
            vars: BTreeSet::new(),
        }
    }

    pub fn var(v: Var) -> Self {
        let mut vars = BTreeSet::new();
        vars.insert(v);
        LinExpr {
            constant: false,
            vars,
        }
    }

    pub fn xor(mut self, other: &LinExpr) -> Self {
        self.constant ^= other.constant;
        for v in &other.vars {
            self.toggle(*v);
        }
        self
    }

    pub fn xor_var(mut self, v: Var) -> Self {
        self.toggle(v);
        self
    }

    fn toggle(&mut self, v: Var) {
        if !self.vars.remove(&v) {
            self.vars.insert(v);
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.vars.iter()
    }

    pub fn is_zero(&self) -> bool {
        !self.constant && self.vars.is_empty()
    }

    /// Parse the textual form, e.g. `"r[e1] ^ x[v,0] ^ 1"`. Whitespace is
    /// insignificant; brackets nest so graph ids like `e[1,3,4]` work.
    pub fn parse(input: &str, graph: &Graph) -> Result<LinExpr, KrlabError> {
        let mut expr = LinExpr::zero();
        for token in split_top_level(input, '^') {
            let token = token.trim();
            if token.is_empty() {
                return Err(KrlabError::ExprParse(format!("empty term in `{input}`")));
            }
            match token {
                "0" => {}
                "1" => expr.constant ^= true,
                _ => {
                    let v = parse_atom(token, graph)?;
                    expr.toggle(v);
                }
            }
        }
        Ok(expr)
    }

    pub fn display<'g>(&self, graph: &'g Graph) -> ExprDisplay<'g, '_> {
        ExprDisplay { expr: self, graph }
    }
}

pub struct ExprDisplay<'g, 'e> {
    expr: &'e LinExpr,
    graph: &'g Graph,
}

impl fmt::Display for ExprDisplay<'_, '_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.expr.vars {
            if !first {
                write!(f, " ^ ")?;
            }
            write!(f, "{}", v.display(self.graph))?;
            first = false;
        }
        if self.expr.constant {
            if !first {
                write!(f, " ^ ")?;
            }
            write!(f, "1")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Split on a separator at bracket depth zero.
fn split_top_level(input: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in input.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&input[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&input[start..]);
    parts
}

fn parse_atom(token: &str, graph: &Graph) -> Result<Var, KrlabError> {
    let open = token
        .find('[')
        .ok_or_else(|| KrlabError::ExprParse(format!("unknown atom `{token}`")))?;
    if !token.ends_with(']') {
        return Err(KrlabError::ExprParse(format!(
            "unterminated atom `{token}`"
        )));
    }
    let kind = token[..open].trim();
    let inner = &token[open + 1..token.len() - 1];
    match kind {
        "r" => {
            let edge = graph
                .edge_index(inner.trim())
                .ok_or_else(|| KrlabError::ExprParse(format!("unknown edge `{}`", inner.trim())))?;
            Ok(Var::LocalKey(edge))
        }
        "x" => {
            let parts = split_top_level(inner, ',');
            if parts.len() != 2 {
                return Err(KrlabError::ExprParse(format!(
                    "x atom needs `x[node,k]`: `{token}`"
                )));
            }
            let node = graph.node_index(parts[0].trim()).ok_or_else(|| {
                KrlabError::ExprParse(format!("unknown node `{}`", parts[0].trim()))
            })?;
            let k: u32 = parts[1]
                .trim()
                .parse()
                .map_err(|_| KrlabError::ExprParse(format!("bad index in `{token}`")))?;
            Ok(Var::NodeRandom(node, k))
        }
        "m" => {
            let i: usize = inner
                .trim()
                .parse()
                .map_err(|_| KrlabError::ExprParse(format!("bad pair index in `{token}`")))?;
            if i >= graph.users().len() {
                return Err(KrlabError::ExprParse(format!(
                    "pair index {i} out of range"
                )));
            }
            Ok(Var::Message(i))
        }
        other => Err(KrlabError::ExprParse(format!(
            "unknown atom kind `{other}`"
        ))),
    }
}
