use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{ChannelConst, Pattern, PatternType, Shape, Term, VarName};

use super::{EvalError, FreshNameGen};

pub type Substitution = BTreeMap<VarName, Term>;

/// Capture-avoiding simultaneous substitution. Binders that would capture a
/// free variable of the substituted terms are renamed by appending primes;
/// so are the wire names of channel constants.
pub fn substitute(t: &Term, s: &Substitution) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(x) => s.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Unit | Term::True | Term::False | Term::Box(_) | Term::Unbox => t.clone(),
        Term::App(f, a) => Term::app(substitute(f, s), substitute(a, s)),
        Term::Pair(a, b) => Term::pair(substitute(a, s), substitute(b, s)),
        Term::If(c, a, b) => Term::if_(substitute(c, s), substitute(a, s), substitute(b, s)),
        Term::UnboxApplied(v) => Term::UnboxApplied(Box::new(substitute(v, s))),
        Term::Lambda(x, body) => {
            let (names, s2) = under_binders(std::slice::from_ref(x), std::slice::from_ref(&**body), s);
            Term::Lambda(names[0].clone(), Box::new(substitute(body, &s2)))
        }
        Term::LetPair(x, y, m, n) => {
            let m2 = substitute(m, s);
            let (names, s2) = under_binders(&[x.clone(), y.clone()], std::slice::from_ref(&**n), s);
            Term::LetPair(names[0].clone(), names[1].clone(), Box::new(m2), Box::new(substitute(n, &s2)))
        }
        Term::QChan(k) => Term::QChan(Box::new(substitute_const(k, s))),
    }
}

fn relevant(bodies: &[Term], s: &Substitution, binders: &BTreeSet<VarName>) -> Substitution {
    let mut fv = BTreeSet::new();
    for b in bodies {
        fv.extend(b.free_vars());
    }
    s.iter().filter(|(k, _)| fv.contains(*k) && !binders.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Restricts `s` below the binders and renames the binders that would capture.
fn under_binders(binders: &[VarName], bodies: &[Term], s: &Substitution) -> (Vec<VarName>, Substitution) {
    let bset: BTreeSet<VarName> = binders.iter().cloned().collect();
    let mut s2 = relevant(bodies, s, &bset);
    let range_fv: BTreeSet<VarName> = s2.values().flat_map(|v| v.free_vars()).collect();
    let mut avoid: BTreeSet<VarName> = range_fv.clone();
    for b in bodies {
        b.all_names(&mut avoid);
    }
    avoid.extend(binders.iter().cloned());
    let mut names = Vec::new();
    for x in binders {
        if range_fv.contains(x) {
            let mut y = x.primed();
            while avoid.contains(&y) {
                y = y.primed();
            }
            avoid.insert(y.clone());
            s2.insert(x.clone(), Term::Var(y.clone()));
            names.push(y);
        } else {
            names.push(x.clone());
        }
    }
    (names, s2)
}

fn substitute_const(k: &ChannelConst, s: &Substitution) -> ChannelConst {
    let bound = k.bound_names();
    let leaves: Vec<Term> = k.body.leaves().into_iter().cloned().collect();
    let mut s2 = relevant(&leaves, s, &bound);
    if s2.is_empty() {
        return k.clone();
    }
    let range_fv: BTreeSet<VarName> = s2.values().flat_map(|v| v.free_vars()).collect();
    let clash: Vec<VarName> = bound.intersection(&range_fv).cloned().collect();
    let mut pattern = k.pattern.clone();
    let mut channel = k.channel.clone();
    if !clash.is_empty() {
        let mut avoid = range_fv.clone();
        avoid.extend(bound.iter().cloned());
        for l in &leaves {
            l.all_names(&mut avoid);
        }
        let mut ren = BTreeMap::new();
        for w in clash {
            let mut y = w.primed();
            while avoid.contains(&y) {
                y = y.primed();
            }
            avoid.insert(y.clone());
            s2.insert(w.clone(), Term::Var(y.clone()));
            ren.insert(w, y);
        }
        pattern = pattern.rename(&ren);
        channel = channel.rename(&ren);
    }
    let body = k.body.map(&mut |l| substitute(l, &s2));
    ChannelConst { pattern, channel, body }
}

/// Renames free occurrences of variables.
pub fn rename_free(t: &Term, ren: &BTreeMap<VarName, VarName>) -> Term {
    let s: Substitution = ren.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect();
    substitute(t, &s)
}

/// Matches a value against a pattern.
pub fn bind_pattern(p: &Pattern, v: &Term) -> Result<Substitution, EvalError> {
    let mut s = Substitution::new();
    fn go(p: &Pattern, v: &Term, s: &mut Substitution) -> Result<(), EvalError> {
        match (p, v) {
            (Pattern::Var(x), v) => {
                s.insert(x.clone(), v.clone());
                Ok(())
            }
            (Pattern::Unit, Term::Unit) => Ok(()),
            (Pattern::Pair(a, b), Term::Pair(c, d)) => {
                go(a, c, s)?;
                go(b, d, s)
            }
            _ => Err(EvalError::ShapeMismatch(format!("pattern {p} does not match {v}"))),
        }
    }
    if !Shape::of_pattern(p).matches(&v.shape()) {
        return Err(EvalError::ShapeMismatch(format!("pattern {p} does not match {v}")));
    }
    go(p, v, &mut s)?;
    Ok(s)
}

/// A pattern of the given type with fresh variable names.
pub fn fresh_pattern(p: &PatternType, gen: &mut FreshNameGen) -> Pattern {
    match p {
        PatternType::Unit => Pattern::Unit,
        PatternType::Qubit => Pattern::Var(gen.fresh()),
        PatternType::Tensor(a, b) => {
            let a = fresh_pattern(a, gen);
            Pattern::pair(a, fresh_pattern(b, gen))
        }
    }
}
