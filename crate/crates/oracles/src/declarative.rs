//! Exhaustive search for derivations in the declarative type system.
//!
//! Goals are `Γ ⊢ M : A`. Linear bindings are split between premises in
//! every possible way, and types that the rules leave open (the argument of
//! an application, the components of a destructured pair) are drawn from a
//! finite universe. Derivations never contain a promotion directly followed
//! by a dereliction or the reverse, which loses nothing: such detours can
//! always be cut out.

use std::collections::{BTreeSet, HashMap};

use pql_core::syntax::{Pattern, PatternType, Term, TypeExpr, VarName};

type Ctx = Vec<(VarName, TypeExpr)>;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Mode {
    Any,
    /// The last rule is not a promotion.
    NoPromote,
    /// The last rule is not a dereliction.
    NoDerelict,
}

fn nonlinear(t: &TypeExpr) -> bool {
    matches!(t, TypeExpr::Bang(_) | TypeExpr::QChan(..))
}

/// Deepest run of `!` anywhere in a type.
fn bang_depth(t: &TypeExpr) -> usize {
    match t {
        TypeExpr::Bang(a) => 1 + bang_depth(a),
        TypeExpr::Lolli(a, b) | TypeExpr::Tensor(a, b) => bang_depth(a).max(bang_depth(b)),
        TypeExpr::QChan(_, a) => bang_depth(a),
        _ => 0,
    }
}

fn all_nonlinear(g: &Ctx) -> bool {
    g.iter().all(|(_, t)| nonlinear(t))
}

fn pattern_type_of(p: &Pattern) -> PatternType {
    match p {
        Pattern::Var(_) => PatternType::Qubit,
        Pattern::Unit => PatternType::Unit,
        Pattern::Pair(a, b) => PatternType::tensor(pattern_type_of(a), pattern_type_of(b)),
    }
}

fn subtypes(t: &TypeExpr, out: &mut BTreeSet<TypeExpr>) {
    out.insert(t.clone());
    match t {
        TypeExpr::Lolli(a, b) | TypeExpr::Tensor(a, b) => {
            subtypes(a, out);
            subtypes(b, out);
        }
        TypeExpr::Bang(a) => subtypes(a, out),
        TypeExpr::QChan(p, a) => {
            subtypes(&p.to_type(), out);
            subtypes(a, out);
        }
        _ => {}
    }
}

fn term_types(t: &Term, out: &mut BTreeSet<TypeExpr>) {
    match t {
        Term::Box(p) => {
            subtypes(&p.to_type(), out);
        }
        Term::QChan(k) => {
            subtypes(&pattern_type_of(&k.pattern).to_type(), out);
            for l in k.body.leaves() {
                term_types(l, out);
            }
        }
        Term::Lambda(_, m) | Term::UnboxApplied(m) => term_types(m, out),
        Term::App(a, b) | Term::Pair(a, b) | Term::LetPair(_, _, a, b) => {
            term_types(a, out);
            term_types(b, out);
        }
        Term::If(a, b, c) => {
            term_types(a, out);
            term_types(b, out);
            term_types(c, out);
        }
        _ => {}
    }
}

fn box_patterns(t: &Term, out: &mut BTreeSet<PatternType>) {
    match t {
        Term::Box(p) => {
            out.insert(p.clone());
        }
        Term::Lambda(_, a) | Term::UnboxApplied(a) => box_patterns(a, out),
        Term::App(a, b) | Term::Pair(a, b) | Term::LetPair(_, _, a, b) => {
            box_patterns(a, out);
            box_patterns(b, out);
        }
        Term::If(c, a, b) => {
            box_patterns(c, out);
            box_patterns(a, out);
            box_patterns(b, out);
        }
        Term::QChan(k) => k.body.leaves().into_iter().for_each(|m| box_patterns(m, out)),
        _ => {}
    }
}

/// The bounded universe for a query: base types, their binary combinations,
/// small channel types, every subterm of the types in the query, function
/// and channel types over each boxed pattern type, and one level of `!`
/// over all of them.
pub fn universe(ctx: &[(VarName, TypeExpr)], target: &TypeExpr, term: &Term) -> Vec<TypeExpr> {
    let base = [TypeExpr::Unit, TypeExpr::Bool, TypeExpr::Qubit];
    let mut u: BTreeSet<TypeExpr> = base.iter().cloned().collect();
    for a in &base {
        for b in &base {
            u.insert(TypeExpr::tensor(a.clone(), b.clone()));
            u.insert(TypeExpr::lolli(a.clone(), b.clone()));
        }
        u.insert(TypeExpr::qchan(PatternType::Unit, a.clone()));
        u.insert(TypeExpr::qchan(PatternType::Qubit, a.clone()));
    }
    subtypes(target, &mut u);
    for (_, t) in ctx {
        subtypes(t, &mut u);
    }
    term_types(term, &mut u);
    let mut boxes = BTreeSet::new();
    box_patterns(term, &mut boxes);
    let known: Vec<TypeExpr> = u.iter().filter(|t| !matches!(t, TypeExpr::Bang(_))).cloned().collect();
    for p in &boxes {
        for x in &known {
            u.insert(TypeExpr::lolli(p.to_type(), x.clone()));
            u.insert(TypeExpr::qchan(p.clone(), x.clone()));
        }
    }
    let plain: Vec<TypeExpr> = u.iter().filter(|t| !matches!(t, TypeExpr::Bang(_))).cloned().collect();
    for t in plain {
        u.insert(TypeExpr::bang(t));
    }
    u.into_iter().collect()
}

pub struct Search {
    universe: Vec<TypeExpr>,
    /// Dereliction premises are not asked for more `!` than this.
    max_bangs: usize,
    memo: HashMap<(String, usize, TypeExpr, Mode), bool>,
    /// Number of distinct goals explored.
    pub goals: usize,
}

impl Search {
    pub fn new(universe: Vec<TypeExpr>) -> Self {
        let max_bangs = universe.iter().map(bang_depth).max().unwrap_or(0) + 1;
        Search { universe, max_bangs, memo: HashMap::new(), goals: 0 }
    }

    /// Whether `ctx ⊢ t : a` has a derivation. Names in `ctx` must be distinct.
    pub fn derivable(&mut self, ctx: &[(VarName, TypeExpr)], t: &Term, a: &TypeExpr) -> bool {
        self.memo.clear();
        let mut g: Ctx = ctx.to_vec();
        g.sort();
        self.goal(&g, t, a, Mode::Any)
    }

    fn goal(&mut self, g: &Ctx, t: &Term, a: &TypeExpr, mode: Mode) -> bool {
        if !head_fits(t, a) {
            return false;
        }
        let fv = t.free_vars();
        if g.iter().any(|(x, s)| !nonlinear(s) && !fv.contains(x)) {
            return false;
        }
        let key = (format!("{g:?}"), t as *const Term as usize, a.clone(), mode);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        self.goals += 1;
        let r = self.solve(g, t, a, mode);
        self.memo.insert(key, r);
        r
    }

    fn solve(&mut self, g: &Ctx, t: &Term, a: &TypeExpr, mode: Mode) -> bool {
        if mode != Mode::NoDerelict && bang_depth(a) < self.max_bangs && self.goal(g, t, &TypeExpr::bang(a.clone()), Mode::NoPromote) {
            return true;
        }
        if mode != Mode::NoPromote {
            if let TypeExpr::Bang(inner) = a {
                if t.is_value() && all_nonlinear(g) && self.goal(g, t, inner, Mode::NoDerelict) {
                    return true;
                }
            }
        }
        self.structural(g, t, a)
    }

    fn splits(g: &Ctx) -> Vec<(Ctx, Ctx)> {
        let lin: Vec<usize> = (0..g.len()).filter(|&i| !nonlinear(&g[i].1)).collect();
        let mut out = vec![];
        for mask in 0..(1u32 << lin.len()) {
            let mut l = vec![];
            let mut r = vec![];
            for (i, b) in g.iter().enumerate() {
                match lin.iter().position(|&j| j == i) {
                    None => {
                        l.push(b.clone());
                        r.push(b.clone());
                    }
                    Some(k) if mask & (1 << k) != 0 => l.push(b.clone()),
                    Some(_) => r.push(b.clone()),
                }
            }
            out.push((l, r));
        }
        out
    }

    /// Adds a binding; a shadowed linear binding can no longer be used, so
    /// the extension fails.
    fn extend(g: &Ctx, x: &VarName, t: &TypeExpr) -> Option<Ctx> {
        let mut out = vec![];
        for (y, s) in g {
            if y == x {
                if !nonlinear(s) {
                    return None;
                }
            } else {
                out.push((y.clone(), s.clone()));
            }
        }
        out.push((x.clone(), t.clone()));
        out.sort();
        Some(out)
    }

    /// Argument types worth trying for `f x : a`. The constants fix their
    /// argument type, and a variable can only be used at its own type with
    /// `!` added or removed.
    fn arg_candidates(&self, g: &Ctx, f: &Term, x: &Term, a: &TypeExpr) -> Vec<TypeExpr> {
        match (f, x) {
            (Term::Unbox, _) => match a {
                TypeExpr::Lolli(p, b) => match PatternType::from_type(p) {
                    Some(pt) => vec![TypeExpr::qchan(pt, (**b).clone())],
                    None => vec![],
                },
                _ => vec![],
            },
            (Term::Box(p), _) => match a.peel() {
                TypeExpr::QChan(p2, b) if p2 == p => vec![TypeExpr::bang(TypeExpr::lolli(p.to_type(), (**b).clone()))],
                _ => vec![],
            },
            (_, Term::Var(y)) => match g.iter().find(|(z, _)| z == y) {
                Some((_, t)) => {
                    let mut out: Vec<TypeExpr> = self.universe.iter().filter(|u| u.peel() == t.peel()).cloned().collect();
                    if !out.contains(t) {
                        out.push(t.clone());
                    }
                    out
                }
                None => vec![],
            },
            _ => self.universe.iter().filter(|u| head_fits(x, u)).cloned().collect(),
        }
    }

    fn structural(&mut self, g: &Ctx, t: &Term, a: &TypeExpr) -> bool {
        match t {
            Term::Var(x) => g.iter().all(|(y, s)| if y == x { s == a } else { nonlinear(s) }) && g.iter().any(|(y, _)| y == x),
            Term::Unit => all_nonlinear(g) && *a == TypeExpr::Unit,
            Term::True | Term::False => all_nonlinear(g) && *a == TypeExpr::Bool,
            Term::Box(p) => {
                all_nonlinear(g)
                    && match a {
                        TypeExpr::Lolli(f, c) => match (&**f, &**c) {
                            (TypeExpr::Bang(f), TypeExpr::Bang(c)) => match (&**f, &**c) {
                                (TypeExpr::Lolli(p1, b1), TypeExpr::QChan(p2, b2)) => **p1 == p.to_type() && p2 == p && b1 == b2,
                                _ => false,
                            },
                            _ => false,
                        },
                        _ => false,
                    }
            }
            Term::Unbox => all_nonlinear(g) && unbox_shape(a),
            Term::Lambda(x, m) => match a {
                TypeExpr::Lolli(aa, bb) => match Self::extend(g, x, aa) {
                    Some(g2) => self.goal(&g2, m, bb, Mode::Any),
                    None => false,
                },
                _ => false,
            },
            Term::App(f, x) => {
                let u = self.arg_candidates(g, f, x, a);
                Self::splits(g).iter().any(|(ga, gb)| {
                    u.iter().any(|arg| {
                        let ft = TypeExpr::lolli(arg.clone(), a.clone());
                        self.goal(ga, f, &ft, Mode::Any) && self.goal(gb, x, arg, Mode::Any)
                    })
                })
            }
            Term::UnboxApplied(v) => {
                let TypeExpr::Lolli(p, c) = a else { return false };
                let Some(pt) = PatternType::from_type(p) else { return false };
                let arg = TypeExpr::qchan(pt, (**c).clone());
                Self::splits(g).iter().any(|(ga, gb)| all_nonlinear(ga) && self.goal(gb, v, &arg, Mode::Any))
            }
            Term::Pair(l, r) => match a {
                TypeExpr::Tensor(ta, tb) => {
                    Self::splits(g).iter().any(|(ga, gb)| self.goal(ga, l, ta, Mode::Any) && self.goal(gb, r, tb, Mode::Any))
                }
                _ => false,
            },
            Term::LetPair(x, y, m, n) => {
                if x == y {
                    return false;
                }
                let pairs: Vec<TypeExpr> = self.universe.iter().filter(|t| matches!(t, TypeExpr::Tensor(..))).cloned().collect();
                Self::splits(g).iter().any(|(ga, gb)| {
                    pairs.iter().any(|pt| {
                        let TypeExpr::Tensor(ta, tb) = pt else { unreachable!() };
                        let Some(g2) = Self::extend(gb, x, ta).and_then(|g1| Self::extend(&g1, y, tb)) else { return false };
                        self.goal(ga, m, pt, Mode::Any) && self.goal(&g2, n, a, Mode::Any)
                    })
                })
            }
            Term::If(c, m, n) => Self::splits(g)
                .iter()
                .any(|(ga, gb)| self.goal(ga, c, &TypeExpr::Bool, Mode::Any) && self.goal(gb, m, a, Mode::Any) && self.goal(gb, n, a, Mode::Any)),
            Term::QChan(k) => {
                let TypeExpr::Bang(inner) = a else { return false };
                let TypeExpr::QChan(p, b) = &**inner else { return false };
                if !all_nonlinear(g) || *p != pattern_type_of(&k.pattern) {
                    return false;
                }
                let vars = k.pattern.vars();
                if vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
                    return false;
                }
                let Ok(outs) = k.channel.validate(&k.pattern.var_set()) else { return false };
                let Some(pairs) = outs.zip(&k.body) else { return false };
                pairs.leaves().into_iter().all(|(wires, leaf)| {
                    let mut lg: Ctx = g.iter().filter(|(x, _)| !wires.contains(x)).cloned().collect();
                    lg.extend(wires.iter().map(|w| (w.clone(), TypeExpr::Qubit)));
                    lg.sort();
                    self.goal(&lg, leaf, b, Mode::Any)
                })
            }
        }
    }
}

/// Introduction forms can only be given types whose outermost constructor
/// below any `!` is the one they introduce.
fn head_fits(t: &Term, a: &TypeExpr) -> bool {
    let mut a = a;
    while let TypeExpr::Bang(inner) = a {
        a = inner;
    }
    match t {
        Term::Unit => *a == TypeExpr::Unit,
        Term::True | Term::False => *a == TypeExpr::Bool,
        Term::Lambda(..) | Term::Box(_) | Term::Unbox | Term::UnboxApplied(_) => matches!(a, TypeExpr::Lolli(..)),
        Term::Pair(..) => matches!(a, TypeExpr::Tensor(..)),
        Term::QChan(_) => matches!(a, TypeExpr::QChan(..)),
        Term::Var(_) | Term::App(..) | Term::LetPair(..) | Term::If(..) => true,
    }
}

fn unbox_shape(a: &TypeExpr) -> bool {
    match a {
        TypeExpr::Lolli(c, f) => match (&**c, &**f) {
            (TypeExpr::QChan(p, a1), TypeExpr::Lolli(p2, a2)) => p.to_type() == **p2 && a1 == a2,
            _ => false,
        },
        _ => false,
    }
}

/// One-shot query with the default universe.
pub fn derivable(ctx: &[(VarName, TypeExpr)], t: &Term, a: &TypeExpr) -> bool {
    Search::new(universe(ctx, a, t)).derivable(ctx, t, a)
}
