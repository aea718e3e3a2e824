use std::fmt;

use crate::bunch::Bunch;
use crate::qcalg::{Channel, OutputBunch};
use crate::syntax::{Term, TypeExpr, VarName, WireSet};

/// A node of a typing derivation; `ctx` lists exactly the bindings of the
/// judgment at this node.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub ctx: Vec<(VarName, TypeExpr)>,
    pub term: Term,
    pub ty: TypeExpr,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Var,
    Derelict(Box<Derivation>),
    Promote(Box<Derivation>),
    Unit,
    True,
    False,
    Lambda(Box<Derivation>),
    App(Box<Derivation>, Box<Derivation>),
    If(Box<Derivation>, Box<Derivation>, Box<Derivation>),
    LetPair(Box<Derivation>, Box<Derivation>),
    Pair(Box<Derivation>, Box<Derivation>),
    Box,
    Unbox,
    QChan(Box<Bunch<Derivation>>),
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Var => "var",
            Rule::Derelict(_) => "d",
            Rule::Promote(_) => "p",
            Rule::Unit => "I",
            Rule::True => "tt",
            Rule::False => "ff",
            Rule::Lambda(_) => "-oI",
            Rule::App(..) => "-oE",
            Rule::If(..) => "if",
            Rule::LetPair(..) => "*E",
            Rule::Pair(..) => "*I",
            Rule::Box => "box",
            Rule::Unbox => "unbox",
            Rule::QChan(_) => "QChan_I",
        }
    }
}

impl Derivation {
    pub fn children(&self) -> Vec<&Derivation> {
        match &self.rule {
            Rule::Var | Rule::Unit | Rule::True | Rule::False | Rule::Box | Rule::Unbox => vec![],
            Rule::Derelict(d) | Rule::Promote(d) | Rule::Lambda(d) => vec![d],
            Rule::App(a, b) | Rule::LetPair(a, b) | Rule::Pair(a, b) => vec![a, b],
            Rule::If(a, b, c) => vec![a, b, c],
            Rule::QChan(leaves) => leaves.leaves(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|d| d.node_count()).sum::<usize>()
    }

    /// Number of dereliction and promotion nodes.
    pub fn structural_count(&self) -> usize {
        let own = matches!(self.rule, Rule::Derelict(_) | Rule::Promote(_)) as usize;
        own + self.children().iter().map(|d| d.structural_count()).sum::<usize>()
    }

    fn write_tree(&self, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self.ctx.iter().map(|(x, t)| format!("{x}:{t}")).collect();
        writeln!(f, "{:indent$}({}) {} |- {} : {}", "", self.rule.name(), ctx.join(", "), self.term, self.ty)?;
        for c in self.children() {
            c.write_tree(indent + 2, f)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tree(0, f)
    }
}

/// Typing of a configuration `(Q, m)`: every leaf of `m` is typed under the
/// wires of the matching output of `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDerivation {
    pub channel: Channel,
    pub inputs: WireSet,
    pub outputs: OutputBunch,
    pub ty: TypeExpr,
    pub leaves: Bunch<Derivation>,
}
