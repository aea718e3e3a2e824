use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bunch::Bunch;
use crate::qcalg::Channel;
use crate::syntax::{is_branching_value, BranchingTerm, Term, VarName, WireSet};

use super::{bind_pattern, fresh_pattern, substitute, Configuration, EvalError, FreshNameGen, Substitution};

/// Which branches of a measurement advance when both can step.
#[derive(Clone, Debug)]
pub enum Schedule {
    /// Both branches step together (rule d.1).
    Parallel,
    /// Only the leftmost non-value branch steps.
    Leftmost,
    /// A seeded coin picks the branch.
    Random(Box<ChaCha8Rng>),
}

impl Schedule {
    pub fn random(seed: u64) -> Self {
        Schedule::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }
}

/// Reduction state: fresh names and the branch schedule.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub gen: FreshNameGen,
    pub schedule: Schedule,
}

impl Stepper {
    pub fn new(gen: FreshNameGen) -> Self {
        Stepper { gen, schedule: Schedule::Parallel }
    }

    pub fn with_schedule(gen: FreshNameGen, schedule: Schedule) -> Self {
        Stepper { gen, schedule }
    }
}

impl Default for Stepper {
    fn default() -> Self {
        Self::new(FreshNameGen::default())
    }
}

/// The rules used by one step, outermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepRule {
    Redex(&'static str),
    Context(Box<StepRule>),
    StructQchan(Box<StepRule>),
    Prefix(Box<StepRule>),
    MeasLeft(Box<StepRule>),
    MeasRight(Box<StepRule>),
    MeasBoth(Box<StepRule>, Box<StepRule>),
    /// Left-only or right-only step with both branches unfinished.
    MeasOne(bool, Box<StepRule>),
}

impl StepRule {
    /// Rule labels in the order they appear in the printed form.
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        self.collect(&mut v);
        v
    }

    fn collect(&self, v: &mut Vec<&'static str>) {
        match self {
            StepRule::Redex(n) => v.push(n),
            StepRule::Context(r) => {
                v.push("c");
                r.collect(v);
            }
            StepRule::StructQchan(r) => {
                v.push("struct-qchan");
                r.collect(v);
            }
            StepRule::Prefix(r) => {
                v.push("d.4");
                r.collect(v);
            }
            StepRule::MeasLeft(r) => {
                v.push("d.2");
                r.collect(v);
            }
            StepRule::MeasRight(r) => {
                v.push("d.3");
                r.collect(v);
            }
            StepRule::MeasOne(left, r) => {
                v.push(if *left { "d.L" } else { "d.R" });
                r.collect(v);
            }
            StepRule::MeasBoth(a, b) => {
                v.push("d.1");
                a.collect(v);
                b.collect(v);
            }
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Redex(n) => write!(f, "{n}"),
            StepRule::Context(r) => write!(f, "c > {r}"),
            StepRule::StructQchan(r) => write!(f, "struct-qchan > {r}"),
            StepRule::Prefix(r) => write!(f, "d.4 > {r}"),
            StepRule::MeasLeft(r) => write!(f, "d.2 > {r}"),
            StepRule::MeasRight(r) => write!(f, "d.3 > {r}"),
            StepRule::MeasOne(true, r) => write!(f, "d.L > {r}"),
            StepRule::MeasOne(false, r) => write!(f, "d.R > {r}"),
            StepRule::MeasBoth(a, b) => write!(f, "d.1 [{a} | {b}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Value,
    Step(Configuration, StepRule),
}

/// One reduction step of a configuration.
pub fn step_config(c: &Configuration, st: &mut Stepper) -> Result<StepOutcome, EvalError> {
    if c.is_value() {
        return Ok(StepOutcome::Value);
    }
    st.gen.reserve(c.all_names());
    let (q, m, r) = step(&c.channel, &c.term, st)?;
    Ok(StepOutcome::Step(Configuration::new(q, m), r))
}

type Stepped = (Channel, BranchingTerm, StepRule);

fn step(q: &Channel, m: &BranchingTerm, st: &mut Stepper) -> Result<Stepped, EvalError> {
    match q {
        Channel::Eps(w) => match m {
            Bunch::Leaf(t) => step_term(w, t, st),
            Bunch::Node(..) => Err(EvalError::ShapeMismatch("branching term under a leaf channel".into())),
        },
        Channel::Gate(u, ws, rest) => {
            let (r2, m2, rule) = step(rest, m, st)?;
            Ok((Channel::Gate(u.clone(), ws.clone(), Box::new(r2)), m2, StepRule::Prefix(Box::new(rule))))
        }
        Channel::Init(b, w, rest) => {
            let (r2, m2, rule) = step(rest, m, st)?;
            Ok((Channel::Init(*b, w.clone(), Box::new(r2)), m2, StepRule::Prefix(Box::new(rule))))
        }
        Channel::Free(w, rest) => {
            let (r2, m2, rule) = step(rest, m, st)?;
            Ok((Channel::Free(w.clone(), Box::new(r2)), m2, StepRule::Prefix(Box::new(rule))))
        }
        Channel::Meas(w, q1, q2) => {
            let Bunch::Node(ma, mb) = m else {
                return Err(EvalError::ShapeMismatch("measurement channel with a single-leaf term".into()));
            };
            let (va, vb) = (is_branching_value(ma), is_branching_value(mb));
            let meas = |a: Channel, b: Channel| Channel::Meas(w.clone(), Box::new(a), Box::new(b));
            let left = match (va, vb) {
                (false, true) => {
                    let (q3, mc, r) = step(q1, ma, st)?;
                    return Ok((meas(q3, (**q2).clone()), Bunch::node(mc, (**mb).clone()), StepRule::MeasLeft(Box::new(r))));
                }
                (true, false) => {
                    let (q4, md, r) = step(q2, mb, st)?;
                    return Ok((meas((**q1).clone(), q4), Bunch::node((**ma).clone(), md), StepRule::MeasRight(Box::new(r))));
                }
                (true, true) => return Err(EvalError::StuckTerm("stepping a value".into())),
                (false, false) => match &mut st.schedule {
                    Schedule::Parallel => {
                        let (q3, mc, ra) = step(q1, ma, st)?;
                        let (q4, md, rb) = step(q2, mb, st)?;
                        return Ok((meas(q3, q4), Bunch::node(mc, md), StepRule::MeasBoth(Box::new(ra), Box::new(rb))));
                    }
                    Schedule::Leftmost => true,
                    Schedule::Random(rng) => rng.gen_bool(0.5),
                },
            };
            if left {
                let (q3, mc, r) = step(q1, ma, st)?;
                Ok((meas(q3, (**q2).clone()), Bunch::node(mc, (**mb).clone()), StepRule::MeasOne(true, Box::new(r))))
            } else {
                let (q4, md, r) = step(q2, mb, st)?;
                Ok((meas((**q1).clone(), q4), Bunch::node((**ma).clone(), md), StepRule::MeasOne(false, Box::new(r))))
            }
        }
    }
}

/// One-hole evaluation contexts.
enum Frame {
    AppFun(Term),
    AppArg(Term),
    PairLeft(Term),
    PairRight(Term),
    IfCond(Term, Term),
    LetBound(VarName, VarName, Term),
}

impl Frame {
    fn plug(&self, t: Term) -> Term {
        match self {
            Frame::AppFun(a) => Term::app(t, a.clone()),
            Frame::AppArg(f) => Term::app(f.clone(), t),
            Frame::PairLeft(b) => Term::pair(t, b.clone()),
            Frame::PairRight(a) => Term::pair(a.clone(), t),
            Frame::IfCond(a, b) => Term::if_(t, a.clone(), b.clone()),
            Frame::LetBound(x, y, n) => Term::LetPair(x.clone(), y.clone(), Box::new(t), Box::new(n.clone())),
        }
    }
}

fn leaf(w: &WireSet, t: Term) -> Stepped {
    (Channel::Eps(w.clone()), Bunch::Leaf(t), StepRule::Redex(""))
}

fn redex(name: &'static str, (q, m, _): Stepped) -> Result<Stepped, EvalError> {
    Ok((q, m, StepRule::Redex(name)))
}

fn step_term(w: &WireSet, t: &Term, st: &mut Stepper) -> Result<Stepped, EvalError> {
    match t {
        Term::App(f, a) => {
            if !f.is_value() {
                return in_context(w, f, Frame::AppFun((**a).clone()), st);
            }
            if !a.is_value() {
                return in_context(w, a, Frame::AppArg((**f).clone()), st);
            }
            match &**f {
                Term::Lambda(x, body) => {
                    let s = Substitution::from([(x.clone(), (**a).clone())]);
                    redex("a.1", leaf(w, substitute(body, &s)))
                }
                Term::Box(p) => {
                    if !w.is_empty() {
                        return Err(EvalError::StuckTerm(format!("boxing with live wires {w:?}")));
                    }
                    let pat = fresh_pattern(p, &mut st.gen);
                    let body = Term::app((**a).clone(), pat.to_term());
                    let q = Channel::Eps(pat.var_set());
                    redex("b.1", leaf(w, Term::qchan(pat, q, Bunch::Leaf(body))))
                }
                Term::UnboxApplied(k) => match &**k {
                    Term::QChan(k) => unbox_apply(w, k, a, st),
                    other => Err(EvalError::StuckTerm(format!("unbox of non-constant {other}"))),
                },
                other => Err(EvalError::StuckTerm(format!("application of {other}"))),
            }
        }
        Term::Pair(a, b) => {
            if !a.is_value() {
                in_context(w, a, Frame::PairLeft((**b).clone()), st)
            } else if !b.is_value() {
                in_context(w, b, Frame::PairRight((**a).clone()), st)
            } else {
                Err(EvalError::StuckTerm("stepping a value".into()))
            }
        }
        Term::If(c, a, b) => match &**c {
            Term::True => redex("a.3", leaf(w, (**a).clone())),
            Term::False => redex("a.3", leaf(w, (**b).clone())),
            c if !c.is_value() => in_context(w, c, Frame::IfCond((**a).clone(), (**b).clone()), st),
            c => Err(EvalError::StuckTerm(format!("condition {c} is not a boolean"))),
        },
        Term::LetPair(x, y, m, n) => match &**m {
            Term::Pair(v, u) if m.is_value() => {
                let s = Substitution::from([(x.clone(), (**v).clone()), (y.clone(), (**u).clone())]);
                redex("a.2", leaf(w, substitute(n, &s)))
            }
            m if !m.is_value() => in_context(w, m, Frame::LetBound(x.clone(), y.clone(), (**n).clone()), st),
            m => Err(EvalError::StuckTerm(format!("let-pair on non-pair {m}"))),
        },
        Term::QChan(k) if !is_branching_value(&k.body) => {
            let (q2, m2, r) = step(&k.channel, &k.body, st)?;
            let t2 = Term::qchan(k.pattern.clone(), q2, m2);
            Ok((Channel::Eps(w.clone()), Bunch::Leaf(t2), StepRule::StructQchan(Box::new(r))))
        }
        t => Err(EvalError::StuckTerm(format!("no rule applies to {t}"))),
    }
}

fn in_context(w: &WireSet, hole: &Term, frame: Frame, st: &mut Stepper) -> Result<Stepped, EvalError> {
    let fv = hole.free_vars();
    let inner: WireSet = w.iter().filter(|x| fv.contains(*x)).cloned().collect();
    let outer: WireSet = w.difference(&inner).cloned().collect();
    let (q, m, r) = step_term(&inner, hole, st)?;
    let q = q.extend(&outer).map_err(|e| match e {
        crate::qcalg::QcalgError::WireClash(ws) => EvalError::WireClash(ws),
        e => EvalError::Channel(e),
    })?;
    let m = m.map(&mut |t| frame.plug(t.clone()));
    Ok((q, m, StepRule::Context(Box::new(r))))
}

fn unbox_apply(w: &WireSet, k: &crate::syntax::ChannelConst, v: &Term, st: &mut Stepper) -> Result<Stepped, EvalError> {
    let fv = v.free_vars();
    if *w != fv {
        return Err(EvalError::StuckTerm(format!("unbox applied with wires {w:?} to an argument over {fv:?}")));
    }
    let sigma = bind_pattern(&k.pattern, v)?;
    let mut ren: BTreeMap<VarName, VarName> = BTreeMap::new();
    let mut targets = BTreeSet::new();
    for x in k.pattern.vars() {
        match &sigma[&x] {
            Term::Var(y) => {
                if !targets.insert(y.clone()) {
                    return Err(EvalError::StuckTerm(format!("wire {y} passed twice")));
                }
                ren.insert(x, y.clone());
            }
            other => return Err(EvalError::StuckTerm(format!("pattern variable {x} bound to non-wire {other}"))),
        }
    }
    let inputs = k.pattern.var_set();
    for internal in k.channel.all_wires().difference(&inputs) {
        ren.insert(internal.clone(), st.gen.fresh());
    }
    let q = k.channel.rename(&ren);
    let s: Substitution = ren.iter().map(|(a, b)| (a.clone(), Term::Var(b.clone()))).collect();
    let m = k.body.map(&mut |t| substitute(t, &s));
    Ok((q, m, StepRule::Redex("b.2")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub index: usize,
    pub rule: StepRule,
    pub config: Configuration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }

    pub fn labels(&self) -> BTreeSet<&'static str> {
        self.steps.iter().flat_map(|s| s.rule.labels()).collect()
    }
}

/// Reduces until a value, recording every step.
pub fn trace(c: &Configuration, fuel: usize, st: &mut Stepper) -> Result<Trace, EvalError> {
    let mut steps = Vec::new();
    let mut cur = c.clone();
    loop {
        match step_config(&cur, st)? {
            StepOutcome::Value => return Ok(Trace { initial: c.clone(), steps }),
            StepOutcome::Step(next, rule) => {
                if steps.len() == fuel {
                    return Err(EvalError::OutOfFuel(fuel));
                }
                steps.push(TraceStep { index: steps.len() + 1, rule, config: next.clone() });
                cur = next;
            }
        }
    }
}

/// Reduces until a value; returns the value configuration and the step count.
pub fn run_to_value(c: &Configuration, fuel: usize, st: &mut Stepper) -> Result<(Configuration, usize), EvalError> {
    let mut cur = c.clone();
    let mut n = 0;
    loop {
        match step_config(&cur, st)? {
            StepOutcome::Value => return Ok((cur, n)),
            StepOutcome::Step(next, _) => {
                if n == fuel {
                    return Err(EvalError::OutOfFuel(fuel));
                }
                n += 1;
                cur = next;
            }
        }
    }
}
