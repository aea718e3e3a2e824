use std::collections::BTreeSet;

use crate::bunch::Bunch;
use crate::qcalg::{Channel, OutputBunch};
use crate::syntax::{BranchingTerm, ChannelConst, PatternType, Term, TypeExpr, VarName, WireSet};

use super::{BranchingContext, ConfigDerivation, Context, Derivation, Rule, TypeError};

/// Upper bound on the candidate types kept while synthesizing.
const MAX_ALTS: usize = 6;

type Result<T> = std::result::Result<T, TypeError>;

#[derive(Clone)]
struct Entry {
    name: VarName,
    ty: TypeExpr,
    id: usize,
}

type Env = Vec<Entry>;

#[derive(Clone)]
struct Res {
    d: Derivation,
    used: BTreeSet<usize>,
}

#[derive(Default)]
struct Checker {
    next_id: usize,
}

fn mismatch(t: &Term, expected: &TypeExpr, found: impl ToString) -> TypeError {
    TypeError::TypeMismatch { term: t.to_string(), expected: expected.to_string(), found: found.to_string() }
}

fn visible(env: &Env, i: usize) -> bool {
    !env[i + 1..].iter().any(|e| e.name == env[i].name)
}

fn ctx_of(env: &Env, used: &BTreeSet<usize>) -> Vec<(VarName, TypeExpr)> {
    (0..env.len())
        .filter(|&i| visible(env, i) && (env[i].ty.is_nonlinear() || used.contains(&env[i].id)))
        .map(|i| (env[i].name.clone(), env[i].ty.clone()))
        .collect()
}

fn mk(env: &Env, t: &Term, ty: TypeExpr, rule: Rule, used: BTreeSet<usize>) -> Res {
    Res { d: Derivation { ctx: ctx_of(env, &used), term: t.clone(), ty, rule }, used }
}

fn name_of(env: &Env, id: usize) -> VarName {
    env.iter().find(|e| e.id == id).map(|e| e.name.clone()).unwrap_or_else(|| VarName::raw("?"))
}

fn disjoint(env: &Env, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    if let Some(&id) = a.intersection(b).next() {
        return Err(TypeError::LinearityError { var: name_of(env, id), uses: 2 });
    }
    Ok(a.union(b).copied().collect())
}

fn release(mut used: BTreeSet<usize>, e: &Entry) -> Result<BTreeSet<usize>> {
    if !e.ty.is_nonlinear() && !used.remove(&e.id) {
        return Err(TypeError::LinearityError { var: e.name.clone(), uses: 0 });
    }
    Ok(used)
}

fn derelict(r: Res) -> Res {
    let TypeExpr::Bang(inner) = &r.d.ty else { return r };
    let ty = (**inner).clone();
    let d = Derivation { ctx: r.d.ctx.clone(), term: r.d.term.clone(), ty, rule: Rule::Derelict(Box::new(r.d)) };
    Res { d, used: r.used }
}

fn peel(mut r: Res) -> Res {
    while matches!(r.d.ty, TypeExpr::Bang(_)) {
        r = derelict(r);
    }
    r
}

fn subsume(mut r: Res, a: &TypeExpr) -> Option<Res> {
    loop {
        if &r.d.ty == a {
            return Some(r);
        }
        if !matches!(r.d.ty, TypeExpr::Bang(_)) {
            return None;
        }
        r = derelict(r);
    }
}

fn dedup(alts: Vec<Res>) -> Vec<Res> {
    let mut seen = BTreeSet::new();
    alts.into_iter().filter(|r| seen.insert(r.d.ty.clone())).take(MAX_ALTS).collect()
}

fn collect(results: Vec<Result<Res>>) -> Result<Vec<Res>> {
    let mut out = Vec::new();
    let mut err = None;
    for r in results {
        match r {
            Ok(r) => out.push(r),
            Err(e) => {
                err.get_or_insert(e);
            }
        }
    }
    if out.is_empty() {
        Err(err.unwrap_or_else(|| TypeError::CannotInfer(String::new())))
    } else {
        Ok(dedup(out))
    }
}

fn unbox_type(p: &PatternType, b: &TypeExpr) -> TypeExpr {
    TypeExpr::lolli(TypeExpr::qchan(p.clone(), b.clone()), TypeExpr::lolli(p.to_type(), b.clone()))
}

impl Checker {
    fn push(&mut self, env: &mut Env, name: &VarName, ty: &TypeExpr) {
        self.next_id += 1;
        env.push(Entry { name: name.clone(), ty: ty.clone(), id: self.next_id });
    }

    fn env_of(&mut self, ctx: &[(VarName, TypeExpr)]) -> Env {
        let mut env = Vec::new();
        for (x, t) in ctx {
            self.push(&mut env, x, t);
        }
        env
    }

    fn check(&mut self, env: &mut Env, t: &Term, a: &TypeExpr) -> Result<Res> {
        if let Term::QChan(k) = t {
            let alts = self.qchan(env, t, k, Some(a))?;
            return self.pick(t, alts, a);
        }
        if let TypeExpr::Bang(inner) = a {
            if t.is_value() {
                if matches!(t, Term::Var(_)) {
                    if let Ok(r) = self.synth_sub(env, t, a) {
                        return Ok(r);
                    }
                }
                return self.promote(env, t, inner);
            }
        }
        match t {
            Term::Lambda(x, body) => {
                let TypeExpr::Lolli(dom, cod) = a else { return Err(mismatch(t, a, "a function")) };
                self.push(env, x, dom);
                let r = self.check(env, body, cod);
                let e = env.pop().expect("binder was pushed");
                let r = r?;
                let used = release(r.used, &e)?;
                Ok(mk(env, t, a.clone(), Rule::Lambda(Box::new(r.d)), used))
            }
            Term::Pair(l, r) => {
                let TypeExpr::Tensor(a1, a2) = a else { return Err(mismatch(t, a, "a pair")) };
                let rl = self.check(env, l, a1)?;
                let rr = self.check(env, r, a2)?;
                let used = disjoint(env, &rl.used, &rr.used)?;
                Ok(mk(env, t, a.clone(), Rule::Pair(Box::new(rl.d), Box::new(rr.d)), used))
            }
            Term::If(c, m, n) => {
                let alts = self.if_(env, t, c, m, n, Some(a))?;
                self.pick(t, alts, a)
            }
            Term::LetPair(x, y, m, n) => {
                let alts = self.let_pair(env, t, x, y, m, n, Some(a))?;
                self.pick(t, alts, a)
            }
            Term::App(f, x) => {
                let alts = self.app(env, t, f, x, Some(a))?;
                self.pick(t, alts, a)
            }
            Term::UnboxApplied(v) => {
                let TypeExpr::Lolli(p, b) = a else { return Err(mismatch(t, a, "a function")) };
                let Some(pt) = PatternType::from_type(p) else { return Err(mismatch(t, a, "a function on a pattern type")) };
                let rv = self.check(env, v, &TypeExpr::qchan(pt.clone(), (**b).clone()))?;
                let ud = mk(env, &Term::Unbox, unbox_type(&pt, b), Rule::Unbox, BTreeSet::new());
                Ok(mk(env, t, a.clone(), Rule::App(Box::new(ud.d), Box::new(rv.d)), rv.used))
            }
            Term::Box(p) => {
                let ok = match a {
                    TypeExpr::Lolli(arg, res) => match (&**arg, &**res) {
                        (TypeExpr::Bang(f), TypeExpr::Bang(c)) => match (&**f, &**c) {
                            (TypeExpr::Lolli(p1, a1), TypeExpr::QChan(p2, a2)) => {
                                **p1 == p.to_type() && p2 == p && a1 == a2
                            }
                            _ => false,
                        },
                        _ => false,
                    },
                    _ => false,
                };
                if !ok {
                    return Err(mismatch(t, a, format!("!({p} -o A) -o !QChan({p}, A)")));
                }
                Ok(mk(env, t, a.clone(), Rule::Box, BTreeSet::new()))
            }
            Term::Unbox => {
                let ok = match a {
                    TypeExpr::Lolli(arg, res) => match (&**arg, &**res) {
                        (TypeExpr::QChan(p, a1), TypeExpr::Lolli(p2, a2)) => p.to_type() == **p2 && a1 == a2,
                        _ => false,
                    },
                    _ => false,
                };
                if !ok {
                    return Err(mismatch(t, a, "QChan(P, A) -o P -o A"));
                }
                Ok(mk(env, t, a.clone(), Rule::Unbox, BTreeSet::new()))
            }
            _ => self.synth_sub(env, t, a),
        }
    }

    fn pick(&self, t: &Term, alts: Vec<Res>, a: &TypeExpr) -> Result<Res> {
        let found = alts.first().map(|r| r.d.ty.clone());
        for r in alts {
            if let Some(r) = subsume(r, a) {
                return Ok(r);
            }
        }
        let found = found.map(|f| f.to_string()).unwrap_or_else(|| "nothing".into());
        if matches!(a, TypeExpr::Bang(_)) && !t.is_value() {
            return Err(TypeError::NonValuePromotion(t.to_string()));
        }
        Err(mismatch(t, a, found))
    }

    fn synth_sub(&mut self, env: &mut Env, t: &Term, a: &TypeExpr) -> Result<Res> {
        let alts = self.synth(env, t)?;
        self.pick(t, alts, a)
    }

    fn promote(&mut self, env: &mut Env, t: &Term, inner: &TypeExpr) -> Result<Res> {
        let r = self.check(env, t, inner)?;
        if let Some(&id) = r.used.iter().next() {
            return Err(TypeError::LinearInPromotion { term: t.to_string(), var: name_of(env, id) });
        }
        Ok(mk(env, t, TypeExpr::bang(inner.clone()), Rule::Promote(Box::new(r.d)), BTreeSet::new()))
    }

    fn with_promoted(&self, env: &Env, t: &Term, alts: Vec<Res>) -> Vec<Res> {
        if !t.is_value() {
            return dedup(alts);
        }
        let mut out = alts.clone();
        for r in alts {
            if r.used.is_empty() && !matches!(r.d.ty, TypeExpr::Bang(_)) {
                let ty = TypeExpr::bang(r.d.ty.clone());
                out.push(mk(env, t, ty, Rule::Promote(Box::new(r.d)), BTreeSet::new()));
            }
        }
        dedup(out)
    }

    fn synth(&mut self, env: &mut Env, t: &Term) -> Result<Vec<Res>> {
        match t {
            Term::Var(x) => {
                let Some(e) = env.iter().rev().find(|e| &e.name == x) else {
                    return Err(TypeError::UnboundVariable(x.clone()));
                };
                let used = if e.ty.is_nonlinear() { BTreeSet::new() } else { BTreeSet::from([e.id]) };
                let ty = e.ty.clone();
                Ok(vec![mk(env, t, ty, Rule::Var, used)])
            }
            Term::Unit => Ok(self.with_promoted(env, t, vec![mk(env, t, TypeExpr::Unit, Rule::Unit, BTreeSet::new())])),
            Term::True => Ok(self.with_promoted(env, t, vec![mk(env, t, TypeExpr::Bool, Rule::True, BTreeSet::new())])),
            Term::False => Ok(self.with_promoted(env, t, vec![mk(env, t, TypeExpr::Bool, Rule::False, BTreeSet::new())])),
            Term::Pair(l, r) => {
                let alts_l = self.synth(env, l)?;
                let alts_r = self.synth(env, r)?;
                let mut results = Vec::new();
                for a in &alts_l {
                    for b in &alts_r {
                        results.push(disjoint(env, &a.used, &b.used).map(|used| {
                            let ty = TypeExpr::tensor(a.d.ty.clone(), b.d.ty.clone());
                            mk(env, t, ty, Rule::Pair(Box::new(a.d.clone()), Box::new(b.d.clone())), used)
                        }));
                    }
                }
                let alts = collect(results)?;
                Ok(self.with_promoted(env, t, alts))
            }
            Term::Lambda(..) | Term::Box(_) | Term::Unbox => Err(TypeError::CannotInfer(t.to_string())),
            Term::UnboxApplied(v) => {
                let alts_v = self.synth(env, v)?;
                let mut results = Vec::new();
                for r in alts_v {
                    let r = peel(r);
                    let TypeExpr::QChan(p, b) = &r.d.ty else {
                        results.push(Err(mismatch(v, &TypeExpr::qchan(PatternType::Unit, TypeExpr::Unit), &r.d.ty)));
                        continue;
                    };
                    let ud = mk(env, &Term::Unbox, unbox_type(p, b), Rule::Unbox, BTreeSet::new());
                    let ty = TypeExpr::lolli(p.to_type(), (**b).clone());
                    results.push(Ok(mk(env, t, ty, Rule::App(Box::new(ud.d), Box::new(r.d)), r.used)));
                }
                let alts = collect(results)?;
                Ok(self.with_promoted(env, t, alts))
            }
            Term::QChan(k) => self.qchan(env, t, k, None),
            Term::App(f, x) => self.app(env, t, f, x, None),
            Term::If(c, m, n) => self.if_(env, t, c, m, n, None),
            Term::LetPair(x, y, m, n) => self.let_pair(env, t, x, y, m, n, None),
        }
    }

    fn if_(&mut self, env: &mut Env, t: &Term, c: &Term, m: &Term, n: &Term, expected: Option<&TypeExpr>) -> Result<Vec<Res>> {
        let rc = self.check(env, c, &TypeExpr::Bool)?;
        let mut branches: Vec<Result<(Res, Res)>> = Vec::new();
        match expected {
            Some(a) => {
                let rm = self.check(env, m, a)?;
                let rn = self.check(env, n, a)?;
                branches.push(Ok((rm, rn)));
            }
            None => match self.synth(env, m) {
                Ok(alts) => {
                    for rm in alts {
                        let ty = rm.d.ty.clone();
                        branches.push(self.check(env, n, &ty).map(|rn| (rm, rn)));
                    }
                }
                Err(e) => {
                    let Ok(alts) = self.synth(env, n) else { return Err(e) };
                    for rn in alts {
                        let ty = rn.d.ty.clone();
                        branches.push(self.check(env, m, &ty).map(|rm| (rm, rn)));
                    }
                }
            },
        }
        let results = branches
            .into_iter()
            .map(|b| {
                let (rm, rn) = b?;
                if rm.used != rn.used {
                    let id = *rm.used.symmetric_difference(&rn.used).next().expect("sets differ");
                    return Err(TypeError::LinearityError { var: name_of(env, id), uses: 0 });
                }
                let used = disjoint(env, &rc.used, &rm.used)?;
                let ty = rm.d.ty.clone();
                Ok(mk(env, t, ty, Rule::If(Box::new(rc.d.clone()), Box::new(rm.d), Box::new(rn.d)), used))
            })
            .collect();
        collect(results)
    }

    #[allow(clippy::too_many_arguments)]
    fn let_pair(
        &mut self,
        env: &mut Env,
        t: &Term,
        x: &VarName,
        y: &VarName,
        m: &Term,
        n: &Term,
        expected: Option<&TypeExpr>,
    ) -> Result<Vec<Res>> {
        if x == y {
            return Err(TypeError::DuplicatePatternVariable(x.clone()));
        }
        let alts_m = self.synth(env, m)?;
        let mut results = Vec::new();
        for rm in alts_m {
            let rm = peel(rm);
            let TypeExpr::Tensor(a1, a2) = rm.d.ty.clone() else {
                results.push(Err(mismatch(m, &TypeExpr::tensor(TypeExpr::Unit, TypeExpr::Unit), &rm.d.ty)));
                continue;
            };
            self.push(env, x, &a1);
            self.push(env, y, &a2);
            let body = match expected {
                Some(a) => self.check(env, n, a).map(|r| vec![r]),
                None => self.synth(env, n),
            };
            let ey = env.pop().expect("binder was pushed");
            let ex = env.pop().expect("binder was pushed");
            let body = match body {
                Ok(b) => b,
                Err(e) => {
                    results.push(Err(e));
                    continue;
                }
            };
            for rn in body {
                let r = release(rn.used.clone(), &ey)
                    .and_then(|u| release(u, &ex))
                    .and_then(|u| disjoint(env, &rm.used, &u))
                    .map(|used| {
                        let ty = rn.d.ty.clone();
                        mk(env, t, ty, Rule::LetPair(Box::new(rm.d.clone()), Box::new(rn.d)), used)
                    });
                results.push(r);
            }
        }
        collect(results)
    }

    fn app(&mut self, env: &mut Env, t: &Term, f: &Term, x: &Term, expected: Option<&TypeExpr>) -> Result<Vec<Res>> {
        match f {
            Term::Box(p) => return self.app_box(env, t, p, x, expected),
            Term::Unbox => {
                if let Some(TypeExpr::Lolli(p, b)) = expected {
                    if let Some(pt) = PatternType::from_type(p) {
                        if let Ok(rx) = self.check(env, x, &TypeExpr::qchan(pt.clone(), (**b).clone())) {
                            let ud = mk(env, f, unbox_type(&pt, b), Rule::Unbox, BTreeSet::new());
                            let a = expected.unwrap().clone();
                            return Ok(vec![mk(env, t, a, Rule::App(Box::new(ud.d), Box::new(rx.d)), rx.used)]);
                        }
                    }
                }
                let alts_x = self.synth(env, x)?;
                let mut results = Vec::new();
                for r in alts_x {
                    let r = peel(r);
                    let TypeExpr::QChan(p, b) = &r.d.ty else {
                        results.push(Err(mismatch(x, &TypeExpr::qchan(PatternType::Unit, TypeExpr::Unit), &r.d.ty)));
                        continue;
                    };
                    let ud = mk(env, f, unbox_type(p, b), Rule::Unbox, BTreeSet::new());
                    let ty = TypeExpr::lolli(p.to_type(), (**b).clone());
                    results.push(Ok(mk(env, t, ty, Rule::App(Box::new(ud.d), Box::new(r.d)), r.used)));
                }
                return collect(results);
            }
            _ => {}
        }
        match self.synth(env, f) {
            Ok(alts_f) => {
                let mut results = Vec::new();
                for rf in alts_f {
                    let rf = peel(rf);
                    let TypeExpr::Lolli(a1, b) = rf.d.ty.clone() else {
                        results.push(Err(mismatch(f, &TypeExpr::lolli(TypeExpr::Unit, TypeExpr::Unit), &rf.d.ty)));
                        continue;
                    };
                    let r = self.check(env, x, &a1).and_then(|rx| {
                        let used = disjoint(env, &rf.used, &rx.used)?;
                        Ok(mk(env, t, (*b).clone(), Rule::App(Box::new(rf.d.clone()), Box::new(rx.d)), used))
                    });
                    let ok = r.is_ok();
                    results.push(r);
                    if ok && expected.is_some() {
                        break;
                    }
                }
                if let Some(a) = expected {
                    if !results.iter().any(|r| r.as_ref().is_ok_and(|r| subsume(r.clone(), a).is_some())) {
                        if let Ok(r) = self.app_arg_first(env, t, f, x, a) {
                            return Ok(vec![r]);
                        }
                    }
                }
                collect(results)
            }
            Err(TypeError::CannotInfer(_)) if matches!(f, Term::Lambda(..)) => {
                let Term::Lambda(z, body) = f else { unreachable!() };
                let alts_x = self.synth(env, x)?;
                let mut results = Vec::new();
                for rx in alts_x {
                    let dom = rx.d.ty.clone();
                    match expected {
                        Some(a) => {
                            let r = self.check(env, f, &TypeExpr::lolli(dom, a.clone())).and_then(|rf| {
                                let used = disjoint(env, &rf.used, &rx.used)?;
                                Ok(mk(env, t, a.clone(), Rule::App(Box::new(rf.d), Box::new(rx.d.clone())), used))
                            });
                            let ok = r.is_ok();
                            results.push(r);
                            if ok {
                                break;
                            }
                        }
                        None => {
                            self.push(env, z, &dom);
                            let body_alts = self.synth(env, body);
                            let e = env.pop().expect("binder was pushed");
                            let body_alts = match body_alts {
                                Ok(b) => b,
                                Err(err) => {
                                    results.push(Err(err));
                                    continue;
                                }
                            };
                            for rb in body_alts {
                                let r = release(rb.used.clone(), &e).and_then(|lam_used| {
                                    let lty = TypeExpr::lolli(dom.clone(), rb.d.ty.clone());
                                    let rf = mk(env, f, lty, Rule::Lambda(Box::new(rb.d.clone())), lam_used);
                                    let used = disjoint(env, &rf.used, &rx.used)?;
                                    Ok(mk(env, t, rb.d.ty.clone(), Rule::App(Box::new(rf.d), Box::new(rx.d.clone())), used))
                                });
                                results.push(r);
                            }
                        }
                    }
                }
                collect(results)
            }
            Err(e) => Err(e),
        }
    }

    /// `f x` against `a`, with the function checked at each synthesized
    /// argument type. Used when the function's own synthesized result type
    /// is too weak, as for constants whose leaves need promoting.
    fn app_arg_first(&mut self, env: &mut Env, t: &Term, f: &Term, x: &Term, a: &TypeExpr) -> Result<Res> {
        let mut last = Err(TypeError::CannotInfer(t.to_string()));
        for rx in self.synth(env, x)? {
            let r = self.check(env, f, &TypeExpr::lolli(rx.d.ty.clone(), a.clone())).and_then(|rf| {
                let used = disjoint(env, &rf.used, &rx.used)?;
                Ok(mk(env, t, a.clone(), Rule::App(Box::new(rf.d), Box::new(rx.d.clone())), used))
            });
            if r.is_ok() {
                return r;
            }
            last = r;
        }
        last
    }

    fn app_box(&mut self, env: &mut Env, t: &Term, p: &PatternType, x: &Term, expected: Option<&TypeExpr>) -> Result<Vec<Res>> {
        let target = match expected.map(|a| a.peel()) {
            Some(TypeExpr::QChan(p2, b)) => {
                if p2 != p {
                    return Err(mismatch(t, expected.unwrap(), format!("!QChan({p}, _)")));
                }
                Some((**b).clone())
            }
            _ => None,
        };
        let mut args: Vec<Result<Res>> = Vec::new();
        match (x, &target) {
            (Term::Lambda(..), Some(b)) => {
                args.push(self.check(env, x, &TypeExpr::bang(TypeExpr::lolli(p.to_type(), b.clone()))));
            }
            (Term::Lambda(z, body), None) => {
                self.push(env, z, &p.to_type());
                let body_alts = self.synth(env, body);
                let e = env.pop().expect("binder was pushed");
                for rb in body_alts? {
                    args.push(release(rb.used.clone(), &e).and_then(|used| {
                        if let Some(&id) = used.iter().next() {
                            return Err(TypeError::LinearInPromotion { term: x.to_string(), var: name_of(env, id) });
                        }
                        let lty = TypeExpr::lolli(p.to_type(), rb.d.ty.clone());
                        let rl = mk(env, x, lty.clone(), Rule::Lambda(Box::new(rb.d.clone())), used);
                        Ok(mk(env, x, TypeExpr::bang(lty), Rule::Promote(Box::new(rl.d)), BTreeSet::new()))
                    }));
                }
            }
            _ => {
                for mut r in self.synth(env, x)? {
                    while matches!(&r.d.ty, TypeExpr::Bang(inner) if matches!(**inner, TypeExpr::Bang(_))) {
                        r = derelict(r);
                    }
                    let fits = |ty: &TypeExpr| matches!(ty, TypeExpr::Lolli(a, _) if **a == p.to_type());
                    match &r.d.ty {
                        TypeExpr::Bang(inner) if fits(inner) => args.push(Ok(r)),
                        ty if fits(ty) && x.is_value() && r.used.is_empty() => {
                            let bty = TypeExpr::bang(ty.clone());
                            args.push(Ok(mk(env, x, bty, Rule::Promote(Box::new(r.d)), BTreeSet::new())));
                        }
                        ty => args.push(Err(mismatch(x, &TypeExpr::bang(TypeExpr::lolli(p.to_type(), TypeExpr::Unit)), ty))),
                    }
                }
            }
        }
        let results = args
            .into_iter()
            .map(|r| {
                let r = r?;
                let TypeExpr::Bang(inner) = &r.d.ty else { unreachable!("box argument is banged") };
                let TypeExpr::Lolli(_, b) = &**inner else { unreachable!("box argument is a function") };
                let cty = TypeExpr::bang(TypeExpr::qchan(p.clone(), (**b).clone()));
                let bd = mk(env, &Term::Box(p.clone()), TypeExpr::lolli(r.d.ty.clone(), cty.clone()), Rule::Box, BTreeSet::new());
                Ok(mk(env, t, cty, Rule::App(Box::new(bd.d), Box::new(r.d)), r.used))
            })
            .collect();
        collect(results)
    }

    fn qchan(&mut self, env: &mut Env, t: &Term, k: &ChannelConst, expected: Option<&TypeExpr>) -> Result<Vec<Res>> {
        if let Some(x) = k.pattern.has_duplicates() {
            return Err(TypeError::DuplicatePatternVariable(x));
        }
        let p = k.pattern.qubit_type();
        let out = k.channel.validate(&k.pattern.var_set())?;
        let Some(pairs) = out.zip(&k.body) else {
            return Err(TypeError::ShapeMismatch(format!(
                "channel has {} outputs but the body has {} leaves",
                out.leaf_count(),
                k.body.leaf_count()
            )));
        };
        let target = match expected.map(|a| a.peel()) {
            Some(TypeExpr::QChan(p2, b)) => {
                if *p2 != p {
                    return Err(TypeError::ShapeMismatch(format!("pattern {} has type {p}, expected {p2}", k.pattern)));
                }
                Some((**b).clone())
            }
            Some(other) if expected.is_some_and(|a| matches!(a, TypeExpr::Bang(_)) || !matches!(other, TypeExpr::QChan(..))) => {
                return Err(mismatch(t, expected.unwrap(), format!("!QChan({p}, _)")));
            }
            _ => None,
        };
        let nl: Env = (0..env.len()).filter(|&i| visible(env, i) && env[i].ty.is_nonlinear()).map(|i| env[i].clone()).collect();
        let leaves = pairs.into_leaves();
        let derivs = match target {
            Some(b) => leaves.iter().map(|(w, m)| self.leaf(&nl, w, m, Some(&b))).collect::<Result<Vec<_>>>()?,
            None => {
                let (w0, m0) = leaves[0];
                let first = self.leaf_alts(&nl, w0, m0)?;
                let mut found = Err(TypeError::CannotInfer(t.to_string()));
                for r0 in first {
                    let b = r0.d.ty.clone();
                    let rest: Result<Vec<Res>> = leaves[1..].iter().map(|(w, m)| self.leaf(&nl, w, m, Some(&b))).collect();
                    match rest {
                        Ok(mut rest) => {
                            rest.insert(0, r0);
                            found = Ok(rest);
                            break;
                        }
                        Err(e) => {
                            if found.is_err() {
                                found = Err(e);
                            }
                        }
                    }
                }
                found?
            }
        };
        let b = derivs[0].d.ty.clone();
        let mut it = derivs.into_iter().map(|r| r.d);
        let tree = k.body.map(&mut |_| it.next().expect("one derivation per leaf"));
        let ty = TypeExpr::bang(TypeExpr::qchan(p, b));
        let r = mk(env, t, ty, Rule::QChan(Box::new(tree)), BTreeSet::new());
        Ok(vec![r.clone(), derelict(r)])
    }

    fn leaf_env(&mut self, nl: &Env, wires: &WireSet) -> Env {
        let mut lenv: Env = nl.iter().filter(|e| !wires.contains(&e.name)).cloned().collect();
        for w in wires {
            self.push(&mut lenv, w, &TypeExpr::Qubit);
        }
        lenv
    }

    fn close_leaf(&self, lenv: &Env, wires: &WireSet, r: Res) -> Result<Res> {
        let mut used = r.used.clone();
        for e in lenv.iter().rev().take(wires.len()) {
            used = release(used, e)?;
        }
        if let Some(&id) = used.iter().next() {
            return Err(TypeError::LinearityError { var: name_of(lenv, id), uses: 0 });
        }
        Ok(Res { d: r.d, used })
    }

    fn leaf(&mut self, nl: &Env, wires: &WireSet, m: &Term, b: Option<&TypeExpr>) -> Result<Res> {
        let mut lenv = self.leaf_env(nl, wires);
        let r = match b {
            Some(b) => self.check(&mut lenv, m, b)?,
            None => unreachable!("leaf without a target type"),
        };
        self.close_leaf(&lenv, wires, r)
    }

    fn leaf_alts(&mut self, nl: &Env, wires: &WireSet, m: &Term) -> Result<Vec<Res>> {
        let mut lenv = self.leaf_env(nl, wires);
        let alts = self.synth(&mut lenv, m)?;
        collect(alts.into_iter().map(|r| self.close_leaf(&lenv, wires, r)).collect())
    }

    fn close_top(&self, env: &Env, r: Res) -> Result<Derivation> {
        for e in env {
            if !e.ty.is_nonlinear() && !r.used.contains(&e.id) {
                return Err(TypeError::LinearityError { var: e.name.clone(), uses: 0 });
            }
        }
        Ok(r.d)
    }
}

/// Checks `t` against `ty`; every linear binding of `ctx` must be used exactly once.
pub fn check_term(ctx: &Context, t: &Term, ty: &TypeExpr) -> Result<Derivation> {
    let mut c = Checker::default();
    let mut env = c.env_of(&ctx.bindings);
    let r = c.check(&mut env, t, ty)?;
    c.close_top(&env, r)
}

/// All candidate types found for `t`, most specific first.
pub fn infer_types(ctx: &Context, t: &Term) -> Result<Vec<Derivation>> {
    let mut c = Checker::default();
    let mut env = c.env_of(&ctx.bindings);
    let alts = c.synth(&mut env, t)?;
    let mut err = None;
    let mut out = Vec::new();
    for r in alts {
        match c.close_top(&env, r) {
            Ok(d) => out.push(d),
            Err(e) => {
                err.get_or_insert(e);
            }
        }
    }
    if out.is_empty() {
        return Err(err.unwrap_or_else(|| TypeError::CannotInfer(t.to_string())));
    }
    Ok(out)
}

pub fn infer_term(ctx: &Context, t: &Term) -> Result<Derivation> {
    Ok(infer_types(ctx, t)?.remove(0))
}

/// Types each leaf of `m` under `nonlinear` plus the wires of the matching output.
pub fn check_vbind(nonlinear: &Context, outputs: &OutputBunch, m: &BranchingTerm, ty: &TypeExpr) -> Result<Bunch<Derivation>> {
    let Some(pairs) = outputs.zip(m) else {
        return Err(TypeError::ShapeMismatch("branching term does not match the channel outputs".into()));
    };
    pairs.try_map(&mut |(wires, leaf)| {
        let mut ctx = Context::from_pairs(nonlinear.bindings.iter().filter(|(x, _)| !wires.contains(x)).cloned());
        ctx.bindings.extend(wires.iter().map(|w| (w.clone(), TypeExpr::Qubit)));
        check_term(&ctx, leaf, ty)
    })
}

pub fn check_branching(ctxs: &BranchingContext, m: &BranchingTerm, ty: &TypeExpr) -> Result<Bunch<Derivation>> {
    let Some(pairs) = ctxs.zip(m) else {
        return Err(TypeError::ShapeMismatch("branching term does not match its contexts".into()));
    };
    pairs.try_map(&mut |(ctx, leaf)| check_term(ctx, leaf, ty))
}

/// Checks a configuration `(Q, m)` at type `ty`.
pub fn check_configuration(q: &Channel, m: &BranchingTerm, ty: &TypeExpr) -> Result<ConfigDerivation> {
    let inputs = q.in_wires()?;
    let outputs = q.validate(&inputs)?;
    let leaves = check_vbind(&Context::new(), &outputs, m, ty)?;
    Ok(ConfigDerivation { channel: q.clone(), inputs, outputs, ty: ty.clone(), leaves })
}
