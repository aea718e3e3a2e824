//! Observable comparison of denotations and the soundness checker.

use std::collections::BTreeMap;

use super::monad::Branching;
use super::object::Index;
use super::terms::Denoter;
use super::DenotError;
use crate::eval::{step_config, Configuration, StepOutcome, Stepper};
use crate::scalar::Real;
use crate::syntax::TypeExpr;
use crate::typecheck::{check_configuration, Derivation, Rule};

/// `I`, `bool`, `qubit` and tensors of them.
pub fn is_observable_type(t: &TypeExpr) -> bool {
    match t {
        TypeExpr::Unit | TypeExpr::Bool | TypeExpr::Qubit => true,
        TypeExpr::Tensor(a, b) => is_observable_type(a) && is_observable_type(b),
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    /// Largest entry-wise difference between matched branch maps; infinite
    /// when the outcome multisets cannot be aligned.
    pub deviation: f64,
}

/// Compares two branchings as multisets of (index, map) pairs, ignoring
/// branches whose maps vanish within `tol`.
pub fn equal_observable<T: Real>(a: &Branching<T>, b: &Branching<T>, tol: T) -> Result<Comparison, DenotError> {
    if a.dom() != b.dom() {
        return Ok(Comparison { equal: false, deviation: f64::INFINITY });
    }
    let (a, b) = (a.drop_negligible(tol), b.drop_negligible(tol));
    let group = |r: &Branching<T>| -> Result<BTreeMap<String, Vec<usize>>, DenotError> {
        let mut g: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (j, x) in r.outcomes.iter().enumerate() {
            if !x.is_observable() {
                return Err(DenotError::NotObservableType(x.to_string()));
            }
            g.entry(x.to_string()).or_default().push(j);
        }
        Ok(g)
    };
    let (ga, gb) = (group(&a)?, group(&b)?);
    if ga.keys().ne(gb.keys()) || ga.values().zip(gb.values()).any(|(x, y)| x.len() != y.len()) {
        return Ok(Comparison { equal: false, deviation: f64::INFINITY });
    }
    let mut worst = 0.0f64;
    let mut equal = true;
    for (xs, ys) in ga.values().zip(gb.values()) {
        let dist: Vec<Vec<f64>> = xs
            .iter()
            .map(|&i| ys.iter().map(|&j| a.component(i).max_abs_diff(&b.component(j)).to_f64_lossy()).collect())
            .collect();
        let (ok, dev) = bottleneck_matching(&dist, tol.to_f64_lossy());
        equal &= ok;
        worst = worst.max(dev);
    }
    Ok(Comparison { equal, deviation: worst })
}

/// Finds a perfect matching minimizing the largest matched distance.
/// Returns whether it stays within `tol`, and that distance.
fn bottleneck_matching(dist: &[Vec<f64>], tol: f64) -> (bool, f64) {
    let n = dist.len();
    let mut cands: Vec<f64> = dist.iter().flatten().copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    for &c in &cands {
        if has_matching(dist, c) {
            return (c <= tol, c);
        }
    }
    (n == 0, if n == 0 { 0.0 } else { f64::INFINITY })
}

fn has_matching(dist: &[Vec<f64>], bound: f64) -> bool {
    fn augment(i: usize, dist: &[Vec<f64>], bound: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..dist[i].len() {
            if dist[i][j] <= bound && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, dist, bound, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let n = dist.len();
    let mut owner = vec![None; n];
    (0..n).all(|i| augment(i, dist, bound, &mut vec![false; n], &mut owner))
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub index: usize,
    pub rule: String,
    pub deviation: f64,
    pub equal: bool,
}

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub initial_outcomes: Vec<String>,
    pub steps: Vec<StepReport>,
    pub final_config: Configuration,
    pub max_deviation: f64,
    pub passed: bool,
}

impl SoundnessReport {
    pub fn first_violation(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| !s.equal)
    }
}

/// Steps `c` to a value, denoting each configuration under the checker's
/// derivation and comparing consecutive denotations.
pub fn soundness_trace<T: Real>(
    den: &Denoter<T>,
    c: &Configuration,
    ty: &TypeExpr,
    fuel: usize,
    st: &mut Stepper,
    tol: T,
) -> Result<SoundnessReport, DenotError> {
    if !is_observable_type(ty) {
        return Err(DenotError::NotObservableType(ty.to_string()));
    }
    let d0 = check_configuration(&c.channel, &c.term, ty)?;
    let mut prev = den.denote_configuration(&d0)?;
    let initial_outcomes = prev.outcomes.iter().map(|x| x.to_string()).collect();
    let mut cur = c.clone();
    let mut steps = vec![];
    let mut max_deviation = 0.0f64;
    for index in 1..=fuel + 1 {
        let (next, rule) = match step_config(&cur, st)? {
            StepOutcome::Value => break,
            StepOutcome::Step(next, _) if index > fuel => {
                let _ = next;
                return Err(DenotError::Eval(crate::eval::EvalError::OutOfFuel(fuel)));
            }
            StepOutcome::Step(next, rule) => (next, rule),
        };
        let d = check_configuration(&next.channel, &next.term, ty)?;
        let den_next = den.denote_configuration(&d)?;
        let cmp = equal_observable(&prev, &den_next, tol)?;
        max_deviation = max_deviation.max(cmp.deviation);
        steps.push(StepReport { index, rule: rule.to_string(), deviation: cmp.deviation, equal: cmp.equal });
        prev = den_next;
        cur = next;
    }
    let passed = steps.iter().all(|s| s.equal);
    Ok(SoundnessReport { initial_outcomes, steps, final_config: cur, max_deviation, passed })
}

/// Replaces every value node typed in a nonlinear context at a non-`!`
/// type by a promotion immediately derelicted.
pub fn insert_detours(d: &Derivation) -> Derivation {
    let rule = match &d.rule {
        Rule::Derelict(a) => Rule::Derelict(Box::new(insert_detours(a))),
        Rule::Promote(a) => Rule::Promote(Box::new(insert_detours(a))),
        Rule::Lambda(a) => Rule::Lambda(Box::new(insert_detours(a))),
        Rule::App(a, b) => Rule::App(Box::new(insert_detours(a)), Box::new(insert_detours(b))),
        Rule::If(a, b, c) => Rule::If(Box::new(insert_detours(a)), Box::new(insert_detours(b)), Box::new(insert_detours(c))),
        Rule::LetPair(a, b) => Rule::LetPair(Box::new(insert_detours(a)), Box::new(insert_detours(b))),
        Rule::Pair(a, b) => Rule::Pair(Box::new(insert_detours(a)), Box::new(insert_detours(b))),
        Rule::QChan(ls) => Rule::QChan(Box::new(ls.map(&mut |l| insert_detours(l)))),
        r => r.clone(),
    };
    let inner = Derivation { ctx: d.ctx.clone(), term: d.term.clone(), ty: d.ty.clone(), rule };
    let eligible = d.term.is_value()
        && !matches!(d.ty, TypeExpr::Bang(_))
        && !matches!(d.rule, Rule::Derelict(_) | Rule::Promote(_))
        && d.ctx.iter().all(|(_, t)| t.is_nonlinear());
    if !eligible {
        return inner;
    }
    let promoted = Derivation { ctx: d.ctx.clone(), term: d.term.clone(), ty: TypeExpr::bang(d.ty.clone()), rule: Rule::Promote(Box::new(inner)) };
    Derivation { ctx: d.ctx.clone(), term: d.term.clone(), ty: d.ty.clone(), rule: Rule::Derelict(Box::new(promoted)) }
}

/// Denotations of `d` and of `d` with detours, compared observably.
pub fn detour_comparison<T: Real>(den: &Denoter<T>, d: &Derivation, tol: T) -> Result<Comparison, DenotError> {
    let with = insert_detours(d);
    equal_observable(&den.denote_closed(d)?, &den.denote_closed(&with)?, tol)
}

/// Describes a branching's outcomes.
pub fn describe<T: Real>(r: &Branching<T>) -> Vec<String> {
    r.outcomes.iter().map(Index::to_string).collect()
}
