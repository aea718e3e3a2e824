//! Rule-by-rule validation of derivation trees produced by the checker.

use std::collections::BTreeMap;

use pql_core::syntax::{Pattern, PatternType, Term, TypeExpr, VarName};
use pql_core::typecheck::{Derivation, Rule};

fn nonlinear(t: &TypeExpr) -> bool {
    matches!(t, TypeExpr::Bang(_) | TypeExpr::QChan(..))
}

type Split = (BTreeMap<VarName, TypeExpr>, BTreeMap<VarName, TypeExpr>);

/// Linear and nonlinear parts of a node's context; repeated names are an error.
fn parts(d: &Derivation) -> Result<Split, String> {
    let mut lin = BTreeMap::new();
    let mut nl = BTreeMap::new();
    for (x, t) in &d.ctx {
        let dst = if nonlinear(t) { &mut nl } else { &mut lin };
        if dst.insert(x.clone(), t.clone()).is_some() || (lin.contains_key(x) && nl.contains_key(x)) {
            return Err(format!("{x} bound twice at {}", d.term));
        }
    }
    Ok((lin, nl))
}

fn err<T>(d: &Derivation, msg: &str) -> Result<T, String> {
    Err(format!("({}) at `{}` : {}: {msg}", d.rule.name(), d.term, d.ty))
}

/// The linear parts of the premises must partition the conclusion's.
fn partition(d: &Derivation, kids: &[&Derivation]) -> Result<(), String> {
    let (lin, _) = parts(d)?;
    let mut seen = BTreeMap::new();
    for k in kids {
        let (kl, _) = parts(k)?;
        for (x, t) in kl {
            if seen.insert(x.clone(), t).is_some() {
                return err(d, &format!("{x} consumed by two premises"));
            }
        }
    }
    if seen != lin {
        return err(d, "premises do not consume exactly the linear context");
    }
    Ok(())
}

fn no_linear(d: &Derivation) -> Result<(), String> {
    if parts(d)?.0.is_empty() {
        Ok(())
    } else {
        err(d, "linear bindings in an axiom or promotion")
    }
}

fn pattern_type_of(p: &Pattern) -> PatternType {
    match p {
        Pattern::Var(_) => PatternType::Qubit,
        Pattern::Unit => PatternType::Unit,
        Pattern::Pair(a, b) => PatternType::tensor(pattern_type_of(a), pattern_type_of(b)),
    }
}

/// Checks every node of `d` against its typing rule.
pub fn verify(d: &Derivation) -> Result<(), String> {
    parts(d)?;
    match (&d.rule, &d.term) {
        (Rule::Var, Term::Var(x)) => {
            let (lin, nl) = parts(d)?;
            let found = lin.get(x).or(nl.get(x));
            if found != Some(&d.ty) {
                return err(d, "variable type does not match the context");
            }
            if lin.keys().any(|y| y != x) {
                return err(d, "unused linear binding");
            }
        }
        (Rule::Unit, Term::Unit) if d.ty == TypeExpr::Unit => no_linear(d)?,
        (Rule::True, Term::True) | (Rule::False, Term::False) if d.ty == TypeExpr::Bool => no_linear(d)?,
        (Rule::Box, Term::Box(p)) => {
            no_linear(d)?;
            let ok = matches!(&d.ty, TypeExpr::Lolli(f, c) if match (&**f, &**c) {
                (TypeExpr::Bang(f), TypeExpr::Bang(c)) => matches!((&**f, &**c),
                    (TypeExpr::Lolli(p1, b1), TypeExpr::QChan(p2, b2)) if **p1 == p.to_type() && p2 == p && b1 == b2),
                _ => false,
            });
            if !ok {
                return err(d, "not a box type");
            }
        }
        (Rule::Unbox, Term::Unbox) => {
            no_linear(d)?;
            let ok = matches!(&d.ty, TypeExpr::Lolli(c, f) if matches!((&**c, &**f),
                (TypeExpr::QChan(p, a1), TypeExpr::Lolli(p2, a2)) if p.to_type() == **p2 && a1 == a2));
            if !ok {
                return err(d, "not an unbox type");
            }
        }
        (Rule::Derelict(s), _) => {
            if s.term != d.term || s.ctx != d.ctx || s.ty != TypeExpr::bang(d.ty.clone()) {
                return err(d, "dereliction premise mismatch");
            }
            verify(s)?;
        }
        (Rule::Promote(s), _) => {
            no_linear(d)?;
            if !d.term.is_value() || s.term != d.term || s.ctx != d.ctx || d.ty != TypeExpr::bang(s.ty.clone()) {
                return err(d, "promotion premise mismatch");
            }
            verify(s)?;
        }
        (Rule::Lambda(s), Term::Lambda(x, m)) => {
            let TypeExpr::Lolli(a, b) = &d.ty else { return err(d, "not a function type") };
            if s.term != **m || s.ty != **b {
                return err(d, "body premise mismatch");
            }
            let (lin, nl) = parts(d)?;
            let (sl, snl) = parts(s)?;
            if lin.contains_key(x) {
                return err(d, "binder shadows a consumed linear variable");
            }
            let mut want_l = lin.clone();
            let mut want_nl: BTreeMap<_, _> = nl.into_iter().filter(|(y, _)| y != x).collect();
            if nonlinear(a) {
                want_nl.insert(x.clone(), (**a).clone());
            } else {
                want_l.insert(x.clone(), (**a).clone());
            }
            if sl != want_l || !snl.iter().all(|(y, t)| want_nl.get(y) == Some(t)) {
                return err(d, "body context is not the extended context");
            }
            verify(s)?;
        }
        (Rule::App(f, a), t @ (Term::App(..) | Term::UnboxApplied(_))) => {
            let (mf, ma) = match t {
                Term::App(mf, ma) => ((**mf).clone(), (**ma).clone()),
                Term::UnboxApplied(v) => (Term::Unbox, (**v).clone()),
                _ => unreachable!(),
            };
            if f.term != mf || a.term != ma || f.ty != TypeExpr::lolli(a.ty.clone(), d.ty.clone()) {
                return err(d, "application premises mismatch");
            }
            partition(d, &[f, a])?;
            verify(f)?;
            verify(a)?;
        }
        (Rule::Pair(l, r), Term::Pair(ml, mr)) => {
            if l.term != **ml || r.term != **mr || d.ty != TypeExpr::tensor(l.ty.clone(), r.ty.clone()) {
                return err(d, "pair premises mismatch");
            }
            partition(d, &[l, r])?;
            verify(l)?;
            verify(r)?;
        }
        (Rule::If(c, m, n), Term::If(tc, tm, tn)) => {
            if c.term != **tc || m.term != **tm || n.term != **tn || c.ty != TypeExpr::Bool || m.ty != d.ty || n.ty != d.ty {
                return err(d, "conditional premises mismatch");
            }
            if parts(m)?.0 != parts(n)?.0 {
                return err(d, "branches consume different linear variables");
            }
            partition(d, &[c, m])?;
            verify(c)?;
            verify(m)?;
            verify(n)?;
        }
        (Rule::LetPair(b, body), Term::LetPair(x, y, mb, mn)) => {
            let TypeExpr::Tensor(ta, tb) = &b.ty else { return err(d, "bound term is not a pair") };
            if b.term != **mb || body.term != **mn || body.ty != d.ty || x == y {
                return err(d, "let premises mismatch");
            }
            let (bl, bnl) = parts(body)?;
            for (v, t) in [(x, ta), (y, tb)] {
                let got = if nonlinear(t) { bnl.get(v) } else { bl.get(v) };
                if !nonlinear(t) && got != Some(t) {
                    return err(d, &format!("{v} is not consumed at {t}"));
                }
                if nonlinear(t) && got.is_some_and(|g| g != &**t) {
                    return err(d, &format!("{v} has the wrong type"));
                }
            }
            let mut rest = body.clone();
            rest.ctx.retain(|(v, _)| v != x && v != y);
            partition(d, &[b, &rest])?;
            verify(b)?;
            verify(body)?;
        }
        (Rule::QChan(leaves), Term::QChan(k)) => {
            no_linear(d)?;
            let TypeExpr::Bang(inner) = &d.ty else { return err(d, "constant type is not banged") };
            let TypeExpr::QChan(p, a) = &**inner else { return err(d, "not a channel type") };
            if *p != pattern_type_of(&k.pattern) {
                return err(d, "pattern does not match its type");
            }
            let outs = k.channel.validate(&k.pattern.var_set()).map_err(|e| e.to_string())?;
            let Some(pairs) = outs.zip(leaves) else { return err(d, "leaf shape mismatch") };
            let body_leaves = k.body.leaves();
            for (i, (wires, l)) in pairs.leaves().into_iter().enumerate() {
                if l.term != *body_leaves[i] || l.ty != **a {
                    return err(d, "leaf premise mismatch");
                }
                let (ll, _) = parts(l)?;
                let want: BTreeMap<_, _> = wires.iter().map(|w| (w.clone(), TypeExpr::Qubit)).collect();
                if ll != want {
                    return err(d, "leaf does not consume exactly its output wires");
                }
                verify(l)?;
            }
        }
        _ => return err(d, "rule does not match the term"),
    }
    Ok(())
}
