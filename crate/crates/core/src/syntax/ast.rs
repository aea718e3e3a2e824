use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::bunch::Bunch;
use crate::qcalg::Channel;

use super::SyntaxError;

/// Words the parser treats as keywords in term position.
pub const RESERVED: &[&str] = &[
    "fun", "let", "in", "if", "then", "else", "tt", "ff", "box", "unbox", "qchan", "input", "meas",
    "free", "init_tt", "init_ff", "gate",
];

/// Interned identifier, shared between variables and wire names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(s: &str) -> Result<Self, SyntaxError> {
        if is_identifier(s) && !RESERVED.contains(&s) {
            Ok(VarName(Arc::from(s)))
        } else {
            Err(SyntaxError::InvalidIdentifier(s.to_string()))
        }
    }

    /// Builds a name without validation; for names produced internally.
    pub fn raw(s: &str) -> Self {
        VarName(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The same name with a prime appended.
    pub fn primed(&self) -> Self {
        VarName(Arc::from(format!("{}'", self.0)))
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> Self {
        VarName::raw(s)
    }
}

pub type WireSet = BTreeSet<VarName>;

pub fn wires<'a>(names: impl IntoIterator<Item = &'a str>) -> WireSet {
    names.into_iter().map(VarName::raw).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Var(VarName),
    Unit,
    Pair(Box<Pattern>, Box<Pattern>),
}

impl Pattern {
    pub fn pair(a: Pattern, b: Pattern) -> Self {
        Pattern::Pair(Box::new(a), Box::new(b))
    }

    /// Variables in left-to-right order.
    pub fn vars(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        fn go(p: &Pattern, out: &mut Vec<VarName>) {
            match p {
                Pattern::Var(x) => out.push(x.clone()),
                Pattern::Unit => {}
                Pattern::Pair(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn var_set(&self) -> WireSet {
        self.vars().into_iter().collect()
    }

    pub fn has_duplicates(&self) -> Option<VarName> {
        let mut seen = BTreeSet::new();
        self.vars().into_iter().find(|v| !seen.insert(v.clone()))
    }

    /// The pattern read back as a value.
    pub fn to_term(&self) -> Term {
        match self {
            Pattern::Var(x) => Term::Var(x.clone()),
            Pattern::Unit => Term::Unit,
            Pattern::Pair(a, b) => Term::pair(a.to_term(), b.to_term()),
        }
    }

    /// The pattern type whose shape this pattern has, with every variable a qubit.
    pub fn qubit_type(&self) -> PatternType {
        match self {
            Pattern::Var(_) => PatternType::Qubit,
            Pattern::Unit => PatternType::Unit,
            Pattern::Pair(a, b) => PatternType::tensor(a.qubit_type(), b.qubit_type()),
        }
    }

    pub fn rename(&self, map: &BTreeMap<VarName, VarName>) -> Pattern {
        match self {
            Pattern::Var(x) => Pattern::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Pattern::Unit => Pattern::Unit,
            Pattern::Pair(a, b) => Pattern::pair(a.rename(map), b.rename(map)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternType {
    Unit,
    Qubit,
    Tensor(Box<PatternType>, Box<PatternType>),
}

impl PatternType {
    pub fn tensor(a: PatternType, b: PatternType) -> Self {
        PatternType::Tensor(Box::new(a), Box::new(b))
    }

    pub fn to_type(&self) -> TypeExpr {
        match self {
            PatternType::Unit => TypeExpr::Unit,
            PatternType::Qubit => TypeExpr::Qubit,
            PatternType::Tensor(a, b) => TypeExpr::tensor(a.to_type(), b.to_type()),
        }
    }

    pub fn from_type(t: &TypeExpr) -> Option<PatternType> {
        match t {
            TypeExpr::Unit => Some(PatternType::Unit),
            TypeExpr::Qubit => Some(PatternType::Qubit),
            TypeExpr::Tensor(a, b) => Some(PatternType::tensor(Self::from_type(a)?, Self::from_type(b)?)),
            _ => None,
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            PatternType::Unit => 0,
            PatternType::Qubit => 1,
            PatternType::Tensor(a, b) => a.qubit_count() + b.qubit_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Unit,
    Bool,
    Qubit,
    QChan(PatternType, Box<TypeExpr>),
    Lolli(Box<TypeExpr>, Box<TypeExpr>),
    Tensor(Box<TypeExpr>, Box<TypeExpr>),
    Bang(Box<TypeExpr>),
}

impl TypeExpr {
    pub fn lolli(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Lolli(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn bang(a: TypeExpr) -> Self {
        TypeExpr::Bang(Box::new(a))
    }

    pub fn qchan(p: PatternType, a: TypeExpr) -> Self {
        TypeExpr::QChan(p, Box::new(a))
    }

    /// Variables of these types may be used any number of times.
    pub fn is_nonlinear(&self) -> bool {
        matches!(self, TypeExpr::Bang(_) | TypeExpr::QChan(..))
    }

    /// Built from `I`, `bool`, `qubit` and `⊗` only.
    pub fn is_basic(&self) -> bool {
        match self {
            TypeExpr::Unit | TypeExpr::Bool | TypeExpr::Qubit => true,
            TypeExpr::Tensor(a, b) => a.is_basic() && b.is_basic(),
            _ => false,
        }
    }

    /// Strips every outer `!`.
    pub fn peel(&self) -> &TypeExpr {
        match self {
            TypeExpr::Bang(a) => a.peel(),
            t => t,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TypeExpr::Unit | TypeExpr::Bool | TypeExpr::Qubit => 1,
            TypeExpr::QChan(p, a) => 1 + p.to_type().size() + a.size(),
            TypeExpr::Lolli(a, b) | TypeExpr::Tensor(a, b) => 1 + a.size() + b.size(),
            TypeExpr::Bang(a) => 1 + a.size(),
        }
    }
}

/// Channel constant `(p, Q, m)`: the pattern names the inputs of `Q` and
/// the body is a branching term matching the output shape of `Q`.
#[derive(Clone, Debug)]
pub struct ChannelConst {
    pub pattern: Pattern,
    pub channel: Channel,
    pub body: BranchingTerm,
}

#[derive(Clone, Debug)]
pub enum Term {
    Var(VarName),
    Unit,
    True,
    False,
    QChan(Box<ChannelConst>),
    Lambda(VarName, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    LetPair(VarName, VarName, Box<Term>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Box(PatternType),
    Unbox,
    UnboxApplied(Box<Term>),
}

pub type BranchingTerm = Bunch<Term>;

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(VarName::raw(name))
    }

    /// Application; `unbox V` with `V` a value is kept in its applied form.
    pub fn app(f: Term, a: Term) -> Term {
        match f {
            Term::Unbox if a.is_value() => Term::UnboxApplied(Box::new(a)),
            f => Term::App(Box::new(f), Box::new(a)),
        }
    }

    pub fn unbox(v: Term) -> Term {
        Term::app(Term::Unbox, v)
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn lambda(x: &str, body: Term) -> Term {
        Term::Lambda(VarName::raw(x), Box::new(body))
    }

    pub fn let_pair(x: &str, y: &str, bound: Term, body: Term) -> Term {
        Term::LetPair(VarName::raw(x), VarName::raw(y), Box::new(bound), Box::new(body))
    }

    pub fn if_(c: Term, a: Term, b: Term) -> Term {
        Term::If(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn qchan(pattern: Pattern, channel: Channel, body: BranchingTerm) -> Term {
        Term::QChan(Box::new(ChannelConst { pattern, channel, body }))
    }

    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) | Term::Unit | Term::True | Term::False | Term::Lambda(..) => true,
            Term::Box(_) | Term::Unbox => true,
            Term::Pair(a, b) => a.is_value() && b.is_value(),
            Term::QChan(k) => is_branching_value(&k.body),
            Term::UnboxApplied(v) => v.is_value(),
            Term::App(..) | Term::LetPair(..) | Term::If(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarName>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Unit | Term::True | Term::False | Term::Box(_) | Term::Unbox => {}
            Term::Lambda(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Pair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::LetPair(x, y, m, n) => {
                m.collect_free(bound, out);
                bound.push(x.clone());
                bound.push(y.clone());
                n.collect_free(bound, out);
                bound.pop();
                bound.pop();
            }
            Term::If(c, a, b) => {
                c.collect_free(bound, out);
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Term::UnboxApplied(v) => v.collect_free(bound, out),
            Term::QChan(k) => {
                let n = bound.len();
                bound.extend(k.bound_names());
                for leaf in k.body.leaves() {
                    leaf.collect_free(bound, out);
                }
                bound.truncate(n);
            }
        }
    }

    /// Every name occurring anywhere in the term, bound or free, including wires.
    pub fn all_names(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Unit | Term::True | Term::False | Term::Box(_) | Term::Unbox => {}
            Term::Lambda(x, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            Term::App(a, b) | Term::Pair(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::LetPair(x, y, m, n) => {
                out.insert(x.clone());
                out.insert(y.clone());
                m.all_names(out);
                n.all_names(out);
            }
            Term::If(c, a, b) => {
                c.all_names(out);
                a.all_names(out);
                b.all_names(out);
            }
            Term::UnboxApplied(v) => v.all_names(out),
            Term::QChan(k) => {
                out.extend(k.bound_names());
                for leaf in k.body.leaves() {
                    leaf.all_names(out);
                }
            }
        }
    }

    /// Number of term nodes, channel constants counting their leaf bodies.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Unit | Term::True | Term::False | Term::Box(_) | Term::Unbox => 1,
            Term::Lambda(_, b) | Term::UnboxApplied(b) => 1 + b.size(),
            Term::App(a, b) | Term::Pair(a, b) | Term::LetPair(_, _, a, b) => 1 + a.size() + b.size(),
            Term::If(c, a, b) => 1 + c.size() + a.size() + b.size(),
            Term::QChan(k) => 1 + k.body.leaves().iter().map(|t| t.size()).sum::<usize>(),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Term::Unit => Shape::Unit,
            Term::Pair(a, b) => Shape::Pair(Box::new(a.shape()), Box::new(b.shape())),
            _ => Shape::Leaf,
        }
    }
}

impl ChannelConst {
    /// Names bound by the constant inside its body.
    pub fn bound_names(&self) -> BTreeSet<VarName> {
        let mut s = self.channel.all_wires();
        s.extend(self.pattern.vars());
        s
    }
}

pub fn is_branching_value(m: &BranchingTerm) -> bool {
    m.all(&mut |t| t.is_value())
}

pub fn branching_free_vars(m: &BranchingTerm) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    for t in m.leaves() {
        out.extend(t.free_vars());
    }
    out
}

/// Structural shape of patterns and values, used to match one against the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf,
    Unit,
    Pair(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn of_pattern(p: &Pattern) -> Shape {
        match p {
            Pattern::Var(_) => Shape::Leaf,
            Pattern::Unit => Shape::Unit,
            Pattern::Pair(a, b) => Shape::Pair(Box::new(Self::of_pattern(a)), Box::new(Self::of_pattern(b))),
        }
    }

    /// Whether a pattern of shape `self` can bind a value of shape `value`.
    pub fn matches(&self, value: &Shape) -> bool {
        match (self, value) {
            (Shape::Leaf, _) => true,
            (Shape::Unit, Shape::Unit) => true,
            (Shape::Pair(a, b), Shape::Pair(c, d)) => a.matches(c) && b.matches(d),
            _ => false,
        }
    }
}

// Equality on terms is alpha-equivalence; wire names inside channel
// constants are compared literally.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        alpha_eq(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

impl Eq for Term {}

#[derive(Clone, PartialEq)]
enum Binder {
    Bound(VarName),
    Literal(VarName),
}

fn lookup(env: &[Binder], x: &VarName) -> Option<(usize, bool)> {
    env.iter().rev().enumerate().find_map(|(i, b)| match b {
        Binder::Bound(y) if y == x => Some((i, false)),
        Binder::Literal(y) if y == x => Some((i, true)),
        _ => None,
    })
}

fn alpha_eq(a: &Term, b: &Term, ea: &mut Vec<Binder>, eb: &mut Vec<Binder>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (lookup(ea, x), lookup(eb, y)) {
            (None, None) => x == y,
            (Some((i, false)), Some((j, false))) => i == j,
            (Some((i, true)), Some((j, true))) => i == j && x == y,
            _ => false,
        },
        (Term::Unit, Term::Unit) | (Term::True, Term::True) | (Term::False, Term::False) => true,
        (Term::Unbox, Term::Unbox) => true,
        (Term::Box(p), Term::Box(q)) => p == q,
        (Term::Lambda(x, m), Term::Lambda(y, n)) => {
            ea.push(Binder::Bound(x.clone()));
            eb.push(Binder::Bound(y.clone()));
            let r = alpha_eq(m, n, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Term::App(a1, a2), Term::App(b1, b2)) | (Term::Pair(a1, a2), Term::Pair(b1, b2)) => {
            alpha_eq(a1, b1, ea, eb) && alpha_eq(a2, b2, ea, eb)
        }
        (Term::LetPair(x1, y1, m1, n1), Term::LetPair(x2, y2, m2, n2)) => {
            if !alpha_eq(m1, m2, ea, eb) {
                return false;
            }
            ea.push(Binder::Bound(x1.clone()));
            ea.push(Binder::Bound(y1.clone()));
            eb.push(Binder::Bound(x2.clone()));
            eb.push(Binder::Bound(y2.clone()));
            let r = alpha_eq(n1, n2, ea, eb);
            ea.truncate(ea.len() - 2);
            eb.truncate(eb.len() - 2);
            r
        }
        (Term::If(c1, a1, b1), Term::If(c2, a2, b2)) => {
            alpha_eq(c1, c2, ea, eb) && alpha_eq(a1, a2, ea, eb) && alpha_eq(b1, b2, ea, eb)
        }
        (Term::UnboxApplied(v), Term::UnboxApplied(w)) => alpha_eq(v, w, ea, eb),
        (Term::QChan(k1), Term::QChan(k2)) => {
            if k1.pattern != k2.pattern || k1.channel != k2.channel || !k1.body.same_shape(&k2.body) {
                return false;
            }
            let (na, nb) = (ea.len(), eb.len());
            for w in k1.bound_names() {
                ea.push(Binder::Literal(w.clone()));
                eb.push(Binder::Literal(w));
            }
            let r = k1
                .body
                .leaves()
                .into_iter()
                .zip(k2.body.leaves())
                .all(|(m, n)| alpha_eq(m, n, ea, eb));
            ea.truncate(na);
            eb.truncate(nb);
            r
        }
        _ => false,
    }
}
