//! Seeded random generators for channels, states, programs and semantic
//! morphisms.
//!
//! The program generator is type-directed: it threads a linear context and
//! only builds terms that consume every linear variable exactly once, so its
//! output is well-typed by construction. Callers still run the checker on it.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::denot::{BbMorphism, Branching, DenotError, Index, Kleisli, MMorphism, Object, Superop};
use crate::linalg::{c, CMatrix};
use crate::qcalg::{Channel, GateName};
use crate::scalar::Real;
use crate::sim::DensityMatrix;
use crate::syntax::{macros, PatternType, Term, TypeExpr, VarName, WireSet};

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

const ONE_QUBIT: [&str; 6] = ["X", "Y", "Z", "H", "S", "T"];
const TWO_QUBIT: [&str; 2] = ["CNOT", "CZ"];

/// A valid channel over at most `max_wires` live wires and of depth at most
/// `max_depth`, together with its input wires.
pub fn random_channel(r: &mut Rng8, max_wires: usize, max_depth: usize) -> (Channel, WireSet) {
    let n = r.gen_range(0..=max_wires);
    let inputs: WireSet = (0..n).map(|i| VarName::raw(&format!("w{i}"))).collect();
    let q = channel_from(r, inputs.clone(), max_wires, max_depth);
    (q, inputs)
}

fn channel_from(r: &mut Rng8, live: WireSet, max_wires: usize, depth: usize) -> Channel {
    if depth == 0 || r.gen_bool(0.15) {
        return Channel::Eps(live);
    }
    let ws: Vec<VarName> = live.iter().cloned().collect();
    let mut choices = vec![];
    if !ws.is_empty() {
        choices.extend([0, 1, 2, 3]);
    }
    if ws.len() >= 2 {
        choices.push(4);
    }
    if ws.len() < max_wires {
        choices.extend([5, 5]);
    }
    let Some(&k) = choices.choose(r) else { return Channel::Eps(live) };
    let pick = |r: &mut Rng8| ws.choose(r).unwrap().clone();
    match k {
        0 | 1 => {
            let g = GateName::new(ONE_QUBIT.choose(r).unwrap());
            let w = pick(r);
            Channel::Gate(g, vec![w], Box::new(channel_from(r, live, max_wires, depth - 1)))
        }
        2 => {
            let w = pick(r);
            let a = channel_from(r, live.clone(), max_wires, depth - 1);
            let b = channel_from(r, live, max_wires, depth - 1);
            Channel::Meas(w, Box::new(a), Box::new(b))
        }
        3 => {
            let w = pick(r);
            let mut rest = live;
            rest.remove(&w);
            Channel::Free(w, Box::new(channel_from(r, rest, max_wires, depth - 1)))
        }
        4 => {
            let mut two: Vec<VarName> = ws.choose_multiple(r, 2).cloned().collect();
            two.shuffle(r);
            let g = GateName::new(TWO_QUBIT.choose(r).unwrap());
            Channel::Gate(g, two, Box::new(channel_from(r, live, max_wires, depth - 1)))
        }
        _ => {
            let w = (0..)
                .map(|i| VarName::raw(&format!("w{i}")))
                .find(|w| !live.contains(w))
                .unwrap();
            let mut rest = live;
            rest.insert(w.clone());
            Channel::Init(r.gen_bool(0.5), w, Box::new(channel_from(r, rest, max_wires, depth - 1)))
        }
    }
}

/// A random full-rank density matrix `A A† / tr(A A†)` on the given wires.
pub fn random_state<T: Real>(r: &mut Rng8, wires: &[VarName]) -> DensityMatrix<T> {
    let d = 1 << wires.len();
    let a: CMatrix<T> = CMatrix::from_fn(d, d, |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    let rho = a.mul(&a.adjoint());
    let tr = rho.trace();
    let rho = rho.scale(tr.inv());
    DensityMatrix::new(wires.to_vec(), rho).expect("dimension matches wires")
}

/// Limits for the program generator.
#[derive(Clone, Copy, Debug)]
pub struct ProgramLimits {
    pub max_size: usize,
    pub max_inputs: usize,
    pub max_qubits: usize,
}

impl Default for ProgramLimits {
    fn default() -> Self {
        ProgramLimits { max_size: 30, max_inputs: 3, max_qubits: 3 }
    }
}

/// A generated open program: linear qubit inputs, a term and its type.
#[derive(Clone, Debug)]
pub struct Generated {
    pub inputs: Vec<VarName>,
    pub term: Term,
    pub ty: TypeExpr,
}

type Lin = (VarName, TypeExpr);

struct ProgramGen<'a> {
    r: &'a mut Rng8,
    next: usize,
    inits_left: usize,
}

/// Generates a well-typed program within the limits. Oversized candidates
/// are discarded and regenerated.
pub fn random_program(r: &mut Rng8, limits: ProgramLimits) -> Generated {
    loop {
        let n = r.gen_range(0..=limits.max_inputs.min(limits.max_qubits));
        let inputs: Vec<VarName> = (0..n).map(|i| VarName::raw(&format!("v{i}"))).collect();
        let budget = r.gen_range(2..=limits.max_size as i64 / 2);
        let mut g = ProgramGen { r, next: 0, inits_left: (limits.max_qubits - n).min(2) };
        let lin = inputs.iter().map(|v| (v.clone(), TypeExpr::Qubit)).collect();
        let (term, ty) = g.consume(lin, budget);
        if term.size() <= limits.max_size {
            return Generated { inputs, term, ty };
        }
    }
}

impl ProgramGen<'_> {
    fn fresh(&mut self) -> VarName {
        self.next += 1;
        VarName::raw(&format!("x{}", self.next))
    }

    /// Builds a term using every binding of `lin` exactly once.
    fn consume(&mut self, mut lin: Vec<Lin>, budget: i64) -> (Term, TypeExpr) {
        if budget <= 0 {
            return self.tuple(lin);
        }
        match lin.len() {
            0 => self.closed(budget),
            1 => {
                let x = lin.pop().unwrap();
                self.single(x, budget)
            }
            _ => self.several(lin, budget),
        }
    }

    fn tuple(&mut self, lin: Vec<Lin>) -> (Term, TypeExpr) {
        let mut it = lin.into_iter().rev();
        let Some((x, t)) = it.next() else { return (Term::Unit, TypeExpr::Unit) };
        let mut acc = (Term::Var(x), t);
        for (y, s) in it {
            acc = (Term::pair(Term::Var(y), acc.0), TypeExpr::tensor(s, acc.1));
        }
        acc
    }

    fn closed(&mut self, budget: i64) -> (Term, TypeExpr) {
        let k = self.r.gen_range(0..if budget < 4 { 4 } else { 8 });
        match k {
            0 => (Term::True, TypeExpr::Bool),
            1 => (Term::False, TypeExpr::Bool),
            2 => (Term::Unit, TypeExpr::Unit),
            3 | 4 if self.inits_left > 0 => {
                self.inits_left -= 1;
                let b = self.r.gen_bool(0.5);
                (Term::app(macros::init(b), Term::Unit), TypeExpr::Qubit)
            }
            3 | 4 => (Term::True, TypeExpr::Bool),
            5 => {
                let c = if self.r.gen_bool(0.5) { Term::True } else { Term::False };
                let (m, t) = self.closed(budget - 2);
                let (m, n) = self.branches(m);
                (Term::if_(c, m, n), t)
            }
            6 => {
                let (a, ta) = self.closed(budget / 2);
                let (b, tb) = self.closed(budget / 2);
                let (x, y) = (self.fresh(), self.fresh());
                let (body, t) = self.consume(vec![(x.clone(), ta), (y.clone(), tb)], budget - 3);
                (Term::LetPair(x, y, Box::new(Term::pair(a, b)), Box::new(body)), t)
            }
            _ => {
                let u = self.fresh();
                let (body, t) = self.consume(vec![(u.clone(), TypeExpr::Unit)], budget - 3);
                (boxed_apply(PatternType::Unit, u, body, Term::Unit), t)
            }
        }
    }

    fn single(&mut self, (x, t): Lin, budget: i64) -> (Term, TypeExpr) {
        let v = Term::Var(x.clone());
        match t.clone() {
            TypeExpr::Qubit => match self.r.gen_range(0..9) {
                0 => (v, t),
                1 => (Term::app(macros::meas(), v), TypeExpr::tensor(TypeExpr::Bool, TypeExpr::Qubit)),
                2 => (Term::app(macros::free(), v), TypeExpr::Unit),
                3 | 4 => {
                    let g = GateName::new(ONE_QUBIT.choose(self.r).unwrap());
                    let y = self.fresh();
                    let (body, s) = self.consume(vec![(y.clone(), TypeExpr::Qubit)], budget - 2);
                    (Term::app(Term::Lambda(y, Box::new(body)), Term::app(macros::gate(&g, 1), v)), s)
                }
                5 => {
                    let y = self.fresh();
                    let (body, s) = self.consume(vec![(y.clone(), TypeExpr::Qubit)], budget - 3);
                    (boxed_apply(PatternType::Qubit, y, body, v), s)
                }
                6 | 7 => {
                    let (b, q) = (self.fresh(), self.fresh());
                    let lin = vec![(b.clone(), TypeExpr::Bool), (q.clone(), TypeExpr::Qubit)];
                    let (body, s) = self.consume(lin, budget - 4);
                    (Term::LetPair(b, q, Box::new(Term::app(macros::meas(), v)), Box::new(body)), s)
                }
                _ => {
                    let y = self.fresh();
                    let (body, s) = self.consume(vec![(y.clone(), TypeExpr::Qubit)], budget - 2);
                    (Term::app(Term::Lambda(y, Box::new(body)), v), s)
                }
            },
            TypeExpr::Bool => match self.r.gen_range(0..3) {
                0 => (v, t),
                _ => {
                    let (m, s) = self.closed(budget - 2);
                    let (m, n) = self.branches(m);
                    (Term::if_(v, m, n), s)
                }
            },
            TypeExpr::Tensor(a, b) if self.r.gen_bool(0.6) => {
                let (p, q) = (self.fresh(), self.fresh());
                let (body, s) = self.consume(vec![(p.clone(), *a), (q.clone(), *b)], budget - 2);
                (Term::LetPair(p, q, Box::new(v), Box::new(body)), s)
            }
            TypeExpr::Unit if self.r.gen_bool(0.5) => {
                let (m, s) = self.closed(budget - 1);
                (Term::pair(v, m), TypeExpr::tensor(t, s))
            }
            _ => (v, t),
        }
    }

    fn several(&mut self, mut lin: Vec<Lin>, budget: i64) -> (Term, TypeExpr) {
        lin.shuffle(self.r);
        let qubits: Vec<usize> = (0..lin.len()).filter(|&i| lin[i].1 == TypeExpr::Qubit).collect();
        match self.r.gen_range(0..6) {
            0 | 1 => {
                let cut = self.r.gen_range(1..lin.len());
                let right = lin.split_off(cut);
                let (a, ta) = self.consume(lin, budget / 2);
                let (b, tb) = self.consume(right, budget / 2);
                (Term::pair(a, b), TypeExpr::tensor(ta, tb))
            }
            2 if qubits.len() >= 2 => {
                let (i, j) = (qubits[0], qubits[1]);
                let g = GateName::new(TWO_QUBIT.choose(self.r).unwrap());
                let arg = Term::pair(Term::Var(lin[i].0.clone()), Term::Var(lin[j].0.clone()));
                let mut rest: Vec<Lin> = lin.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, b)| b.clone()).collect();
                let (p, q) = (self.fresh(), self.fresh());
                rest.push((p.clone(), TypeExpr::Qubit));
                rest.push((q.clone(), TypeExpr::Qubit));
                let (body, s) = self.consume(rest, budget - 4);
                (Term::LetPair(p, q, Box::new(Term::app(macros::gate(&g, 2), arg)), Box::new(body)), s)
            }
            3 if lin.iter().any(|(_, t)| *t == TypeExpr::Bool) => {
                let i = lin.iter().position(|(_, t)| *t == TypeExpr::Bool).unwrap();
                let (b, _) = lin.remove(i);
                let (m, s) = self.consume(lin, budget - 2);
                let (m, n) = self.branches(m);
                (Term::if_(Term::Var(b), m, n), s)
            }
            4 => {
                let cut = self.r.gen_range(1..=lin.len());
                let rest = lin.split_off(cut);
                let (arg, ta) = self.consume(lin, budget / 3);
                let y = self.fresh();
                let mut inner = rest;
                inner.push((y.clone(), ta));
                let (body, s) = self.consume(inner, budget - budget / 3 - 2);
                (Term::app(Term::Lambda(y, Box::new(body)), arg), s)
            }
            _ => {
                let x = lin.remove(0);
                let (a, ta) = self.single(x, budget / 2);
                let (b, tb) = self.consume(lin, budget / 2);
                (Term::pair(a, b), TypeExpr::tensor(ta, tb))
            }
        }
    }

    /// The two arms of a conditional: `m` and a mutation of it, in random order.
    fn branches(&mut self, m: Term) -> (Term, Term) {
        let n = self.mutate(&m);
        if self.r.gen_bool(0.5) {
            (m, n)
        } else {
            (n, m)
        }
    }

    /// A different term of the same type over the same linear variables.
    fn mutate(&mut self, m: &Term) -> Term {
        if self.r.gen_bool(0.5) {
            let z = self.fresh();
            Term::app(Term::Lambda(z.clone(), Box::new(Term::Var(z))), m.clone())
        } else {
            swap_booleans(m)
        }
    }
}

/// `unbox (box[P] (fun y -> body)) arg`.
fn boxed_apply(p: PatternType, y: VarName, body: Term, arg: Term) -> Term {
    let boxed = Term::app(Term::Box(p), Term::Lambda(y, Box::new(body)));
    Term::app(Term::unbox(boxed), arg)
}

fn swap_booleans(t: &Term) -> Term {
    let s = |t: &Term| Box::new(swap_booleans(t));
    match t {
        Term::True => Term::False,
        Term::False => Term::True,
        Term::Lambda(x, b) => Term::Lambda(x.clone(), s(b)),
        Term::App(a, b) => Term::app(swap_booleans(a), swap_booleans(b)),
        Term::Pair(a, b) => Term::Pair(s(a), s(b)),
        Term::LetPair(x, y, a, b) => Term::LetPair(x.clone(), y.clone(), s(a), s(b)),
        Term::If(c, a, b) => Term::If(s(c), s(a), s(b)),
        Term::UnboxApplied(v) => Term::UnboxApplied(s(v)),
        other => other.clone(),
    }
}

/// Untyped terms over a few variable names, for checker agreement tests.
pub fn random_term(r: &mut Rng8, max_size: usize) -> Term {
    loop {
        let budget = r.gen_range(1..=max_size as i64);
        let t = untyped(r, budget);
        if t.size() <= max_size {
            return t;
        }
    }
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn untyped(r: &mut Rng8, budget: i64) -> Term {
    let name = |r: &mut Rng8| VarName::raw(NAMES.choose(r).unwrap());
    if budget <= 1 {
        return match r.gen_range(0..6) {
            0 => Term::Unit,
            1 => Term::True,
            2 => Term::False,
            3 => Term::Unbox,
            _ => Term::Var(name(r)),
        };
    }
    let b = budget - 1;
    match r.gen_range(0..12) {
        0 | 1 => Term::Lambda(name(r), Box::new(untyped(r, b))),
        2 | 3 => Term::app(untyped(r, b / 2), untyped(r, b / 2)),
        4 | 5 => Term::pair(untyped(r, b / 2), untyped(r, b / 2)),
        6 => Term::LetPair(name(r), name(r), Box::new(untyped(r, b / 2)), Box::new(untyped(r, b / 2))),
        7 => Term::if_(untyped(r, b / 3), untyped(r, b / 3), untyped(r, b / 3)),
        8 => Term::app(macros::meas(), untyped(r, 1)),
        9 => Term::app(macros::free(), untyped(r, 1)),
        10 => Term::app(macros::init(r.gen_bool(0.5)), untyped(r, 1)),
        _ => {
            let p = if r.gen_bool(0.7) { PatternType::Qubit } else { PatternType::Unit };
            Term::app(Term::Box(p), untyped(r, b))
        }
    }
}

/// Small types for contexts and targets in the agreement tests.
pub fn random_type(r: &mut Rng8, depth: usize) -> TypeExpr {
    let base = [TypeExpr::Qubit, TypeExpr::Bool, TypeExpr::Unit];
    if depth == 0 || r.gen_bool(0.5) {
        return base.choose(r).unwrap().clone();
    }
    match r.gen_range(0..4) {
        0 => TypeExpr::tensor(random_type(r, depth - 1), random_type(r, depth - 1)),
        1 => TypeExpr::lolli(random_type(r, depth - 1), random_type(r, depth - 1)),
        2 => TypeExpr::bang(random_type(r, depth - 1)),
        _ => TypeExpr::qchan(PatternType::Qubit, random_type(r, depth - 1)),
    }
}

/// A random completely positive map with two Kraus operators of norm
/// around one half.
pub fn random_superop<T: Real>(r: &mut Rng8, qubits_in: usize, qubits_out: usize) -> Superop<T> {
    let (rows, cols) = (1 << qubits_out, 1 << qubits_in);
    let scale = 0.5 / (rows as f64).sqrt();
    let ks: Vec<CMatrix<T>> = (0..2)
        .map(|_| CMatrix::from_fn(rows, cols, |_, _| c(scale * r.gen_range(-1.0..1.0), scale * r.gen_range(-1.0..1.0))))
        .collect();
    Superop::from_kraus(qubits_in, qubits_out, &ks)
}

/// A random map between sums of registers; each component is present with
/// probability 3/4.
pub fn random_mmorphism<T: Real>(r: &mut Rng8, dom: &[usize], cod: &[usize]) -> MMorphism<T> {
    let mut m = MMorphism::zero(dom.to_vec(), cod.to_vec());
    for (i, &a) in dom.iter().enumerate() {
        for (j, &b) in cod.iter().enumerate() {
            if r.gen_bool(0.75) {
                m.comps[i][j] = Some(random_superop(r, a, b));
            }
        }
    }
    m
}

fn lookup<V: Clone>(table: &[(Index<f64>, V)], x: &Index<f64>) -> Result<V, DenotError> {
    table
        .iter()
        .find(|(y, _)| y == x)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| DenotError::Shape(format!("{x} is outside the sampled domain")))
}

/// A random pure morphism between objects with finitely many points.
pub fn random_pure(r: &mut Rng8, a: &Object, b: &Object) -> BbMorphism<f64> {
    let pb = b.points::<f64>().expect("finite codomain");
    let mut table = vec![];
    for x in a.points::<f64>().expect("finite domain") {
        let y = pb.choose(r).unwrap().clone();
        let m = random_mmorphism(r, &a.fiber(&x).unwrap(), &b.fiber(&y).unwrap());
        table.push((x, (y, m)));
    }
    BbMorphism::new(a.clone(), b.clone(), move |x| lookup(&table, x))
}

/// A random Kleisli morphism with one or two outcomes per point.
pub fn random_kleisli(r: &mut Rng8, a: &Object, b: &Object) -> Kleisli<f64> {
    let pb = b.points::<f64>().expect("finite codomain");
    let mut table = vec![];
    for x in a.points::<f64>().expect("finite domain") {
        let k = r.gen_range(1..=2);
        let outcomes: Vec<Index<f64>> = (0..k).map(|_| pb.choose(r).unwrap().clone()).collect();
        let blocks: Vec<_> = outcomes.iter().map(|y| b.fiber(y).unwrap()).collect();
        let map = random_mmorphism(r, &a.fiber(&x).unwrap(), &blocks.concat());
        table.push((x, Branching { outcomes, blocks, map }));
    }
    Kleisli::new(a.clone(), b.clone(), move |x| lookup(&table, x))
}
