//! Interpretation of typing derivations and configurations.
//!
//! A context is interpreted pointwise: every variable carries its index and
//! the number of qubits in its fiber, and the qubits of the context are laid
//! out in binding order.

use std::sync::Arc;

use super::channel::{channel_branching, leaf_of};
use super::cpmap::{MMorphism, Superop};
use super::monad::Branching;
use super::object::{ChanPoint, Closure, Index, Object, fresh_id};
use super::DenotError;
use crate::bunch::Bunch;
use crate::qcalg::{Channel, GateTable, OutputBunch};
use crate::scalar::Real;
use crate::syntax::{PatternType, Term, TypeExpr, VarName};
use crate::typecheck::{ConfigDerivation, Derivation, Rule};

/// One variable of an interpreted context.
#[derive(Clone, Debug)]
pub struct Slot<T: Real> {
    pub name: VarName,
    pub value: Index<T>,
    pub qubits: usize,
}

pub type Env<T> = Vec<Slot<T>>;

/// Number of qubits over `x` in the object of `ty`.
pub fn qubits_of<T: Real>(ty: &TypeExpr, x: &Index<T>) -> Result<usize, DenotError> {
    match Object::of_type(ty).fiber(x)?.as_slice() {
        [n] => Ok(*n),
        s => Err(DenotError::Shape(format!("term-level fiber {s:?} is not a single register"))),
    }
}

/// The single point of the object of a pattern type.
pub fn pattern_point<T: Real>(p: &PatternType) -> Index<T> {
    match p {
        PatternType::Unit | PatternType::Qubit => Index::Unit,
        PatternType::Tensor(a, b) => Index::pair(pattern_point(a), pattern_point(b)),
    }
}

/// Selects `names` out of `from` (the last binding of a name wins) and
/// returns the rearranged context with the qubit permutation realizing it.
/// Qubit-free bindings may be dropped or shared; the others must be used once.
pub fn route<T: Real>(from: &[Slot<T>], names: &[VarName]) -> Result<(Env<T>, MMorphism<T>), DenotError> {
    let mut starts = Vec::with_capacity(from.len());
    let mut acc = 0;
    for s in from {
        starts.push(acc);
        acc += s.qubits;
    }
    let mut used = vec![false; from.len()];
    let mut out = vec![];
    let mut perm = vec![];
    for x in names {
        let i = from.iter().rposition(|s| &s.name == x).ok_or_else(|| DenotError::Shape(format!("variable {x} is not in the context")))?;
        if from[i].qubits > 0 {
            if used[i] {
                return Err(DenotError::Shape(format!("qubits of {x} used twice")));
            }
            used[i] = true;
            perm.extend(starts[i]..starts[i] + from[i].qubits);
        }
        out.push(from[i].clone());
    }
    if let Some(s) = from.iter().zip(&used).find(|(s, u)| s.qubits > 0 && !**u) {
        return Err(DenotError::Shape(format!("qubits of {} are discarded", s.0.name)));
    }
    Ok((out, MMorphism::single(Superop::permutation(&perm))))
}

fn names(ctx: &[(VarName, TypeExpr)]) -> Vec<VarName> {
    ctx.iter().map(|(x, _)| x.clone()).collect()
}

fn total(env: &[Slot<impl Real>]) -> usize {
    env.iter().map(|s| s.qubits).sum()
}

fn tuple<T: Real>(env: &[Slot<T>]) -> Branching<T> {
    Branching::pure(Index::Tuple(env.iter().map(|s| s.value.clone()).collect()), vec![total(env)])
}

fn untuple<T: Real>(x: &Index<T>, like: &[Slot<T>]) -> Result<Env<T>, DenotError> {
    let Index::Tuple(xs) = x else { return Err(DenotError::Shape(format!("{x} is not a context point"))) };
    Ok(like.iter().zip(xs).map(|(s, v)| Slot { name: s.name.clone(), value: v.clone(), qubits: s.qubits }).collect())
}

/// Interprets derivations; gate semantics come from `gates`.
#[derive(Clone)]
pub struct Denoter<T: Real> {
    pub gates: Arc<GateTable<T>>,
}

impl<T: Real> Denoter<T> {
    pub fn new(gates: GateTable<T>) -> Self {
        Denoter { gates: Arc::new(gates) }
    }

    /// `⟦d⟧` at the point `env` of its context, which must list `d.ctx` in order.
    pub fn denote(&self, d: &Derivation, env: &[Slot<T>]) -> Result<Branching<T>, DenotError> {
        if env.len() != d.ctx.len() || env.iter().zip(&d.ctx).any(|(s, (x, _))| &s.name != x) {
            return Err(DenotError::Shape(format!("context point does not match the judgment at {}", d.term)));
        }
        let n = total(env);
        match &d.rule {
            Rule::Var => {
                let Term::Var(x) = &d.term else { return Err(bad_rule(d)) };
                let (env1, perm) = route(env, std::slice::from_ref(x))?;
                Ok(Branching::pure(env1[0].value.clone(), vec![env1[0].qubits]).after(&perm))
            }
            Rule::Unit => Ok(Branching::pure(Index::Unit, vec![n])),
            Rule::True => Ok(Branching::pure(Index::Bool(true), vec![n])),
            Rule::False => Ok(Branching::pure(Index::Bool(false), vec![n])),
            Rule::Derelict(sub) => self.denote(sub, env)?.bind(|x, _| match x {
                Index::Banged(v, g) => Ok(Branching::single((**v).clone(), (**g).clone())),
                _ => Err(DenotError::Shape(format!("dereliction of {x}"))),
            }),
            Rule::Promote(sub) => {
                let r = self.denote(sub, env)?;
                if n != 0 || r.outcomes.len() != 1 {
                    return Err(DenotError::Shape(format!("promotion of {} is not a global element", d.term)));
                }
                Ok(Branching::pure(Index::Banged(Box::new(r.outcomes[0].clone()), Arc::new(r.map)), vec![0]))
            }
            Rule::Lambda(body) => {
                let Term::Lambda(x, _) = &d.term else { return Err(bad_rule(d)) };
                let TypeExpr::Lolli(a, _) = &d.ty else { return Err(bad_rule(d)) };
                let (me, body, env0, x, a) = (self.clone(), Arc::new((**body).clone()), env.to_vec(), x.clone(), (**a).clone());
                let clo = Closure::new(n, move |arg| {
                    let mut layout = env0.clone();
                    layout.push(Slot { name: x.clone(), value: arg.clone(), qubits: qubits_of(&a, arg)? });
                    let (benv, perm) = route(&layout, &names(&body.ctx))?;
                    Ok(me.denote(&body, &benv)?.after(&perm))
                });
                Ok(Branching::pure(Index::Closure(Arc::new(clo)), vec![n]))
            }
            Rule::App(f, a) => {
                let mut want = names(&f.ctx);
                want.extend(names(&a.ctx));
                let (env1, perm) = route(env, &want)?;
                let (ef, ea) = env1.split_at(f.ctx.len());
                let rf = self.denote(f, ef)?;
                let ra = self.denote(a, ea)?;
                rf.tensor(&ra)
                    .bind(|p, _| {
                        let Index::Pair(g, x) = p else { unreachable!("tensor yields pairs") };
                        match &**g {
                            Index::Closure(c) => (c.apply)(x),
                            other => Err(DenotError::Shape(format!("applying {other}"))),
                        }
                    })
                    .map(|r| r.after(&perm))
            }
            Rule::Pair(l, r) => {
                let mut want = names(&l.ctx);
                want.extend(names(&r.ctx));
                let (env1, perm) = route(env, &want)?;
                let (el, er) = env1.split_at(l.ctx.len());
                Ok(self.denote(l, el)?.tensor(&self.denote(r, er)?).after(&perm))
            }
            Rule::If(c, m, e) => {
                let branch_names: Vec<VarName> = env
                    .iter()
                    .filter(|s| m.ctx.iter().chain(&e.ctx).any(|(x, _)| x == &s.name))
                    .map(|s| s.name.clone())
                    .collect();
                let mut want = names(&c.ctx);
                want.extend(branch_names.iter().cloned());
                let (env1, perm) = route(env, &want)?;
                let (ec, rest) = env1.split_at(c.ctx.len());
                let rest = rest.to_vec();
                let rc = self.denote(c, ec)?;
                rc.tensor(&tuple(&rest))
                    .bind(|p, _| {
                        let Index::Pair(b, g) = p else { unreachable!("tensor yields pairs") };
                        let layout = untuple(g, &rest)?;
                        let arm = match &**b {
                            Index::Bool(true) => m,
                            Index::Bool(false) => e,
                            other => return Err(DenotError::Shape(format!("branching on {other}"))),
                        };
                        let (aenv, p2) = route(&layout, &names(&arm.ctx))?;
                        Ok(self.denote(arm, &aenv)?.after(&p2))
                    })
                    .map(|r| r.after(&perm))
            }
            Rule::LetPair(bound, body) => {
                let Term::LetPair(x, y, _, _) = &d.term else { return Err(bad_rule(d)) };
                let TypeExpr::Tensor(ta, tb) = &bound.ty else { return Err(bad_rule(d)) };
                let rest_names: Vec<VarName> = names(&body.ctx).into_iter().filter(|v| v != x && v != y).collect();
                let mut want = names(&bound.ctx);
                want.extend(rest_names);
                let (env1, perm) = route(env, &want)?;
                let (eb, rest) = env1.split_at(bound.ctx.len());
                let rest = rest.to_vec();
                self.denote(bound, eb)?
                    .tensor(&tuple(&rest))
                    .bind(|p, _| {
                        let Index::Pair(v, g) = p else { unreachable!("tensor yields pairs") };
                        let Index::Pair(va, vb) = &**v else { return Err(DenotError::Shape(format!("{v} is not a pair"))) };
                        let mut layout = vec![
                            Slot { name: x.clone(), value: (**va).clone(), qubits: qubits_of(ta, va)? },
                            Slot { name: y.clone(), value: (**vb).clone(), qubits: qubits_of(tb, vb)? },
                        ];
                        layout.extend(untuple(g, &rest)?);
                        let (benv, p2) = route(&layout, &names(&body.ctx))?;
                        Ok(self.denote(body, &benv)?.after(&p2))
                    })
                    .map(|r| r.after(&perm))
            }
            Rule::Box => {
                let Term::Box(p) = &d.term else { return Err(bad_rule(d)) };
                let p = p.clone();
                let clo = Closure::new(0, move |arg| {
                    let Index::Banged(f, g) = arg else { return Err(DenotError::Shape(format!("boxing {arg}"))) };
                    let Index::Closure(c) = &**f else { return Err(DenotError::Shape(format!("boxing {f}"))) };
                    let np = p.qubit_count();
                    let run = (c.apply)(&pattern_point(&p))?.after(&g.tensor(&MMorphism::identity(&[np])));
                    let k = Index::Chan(Arc::new(ChanPoint { id: fresh_id(), inputs: np, run }));
                    Ok(Branching::pure(Index::Banged(Box::new(k), Arc::new(MMorphism::identity(&[0]))), vec![0]))
                });
                Ok(Branching::pure(Index::Closure(Arc::new(clo)), vec![n]))
            }
            Rule::Unbox => {
                let clo = Closure::new(0, move |arg| {
                    let Index::Chan(k) = arg else { return Err(DenotError::Shape(format!("unboxing {arg}"))) };
                    Ok(Branching::pure(unbox_iso(k), vec![0]))
                });
                Ok(Branching::pure(Index::Closure(Arc::new(clo)), vec![n]))
            }
            Rule::QChan(leaves) => {
                let Term::QChan(k) = &d.term else { return Err(bad_rule(d)) };
                let inputs = k.pattern.vars();
                let outputs = k.channel.validate(&k.pattern.var_set())?;
                let nonlinear: Env<T> = env.iter().filter(|s| s.qubits == 0).cloned().collect();
                let run = self.close_channel(&k.channel, &inputs, &outputs, leaves, &nonlinear)?;
                let chan = Index::Chan(Arc::new(ChanPoint { id: fresh_id(), inputs: inputs.len(), run }));
                Ok(Branching::pure(Index::Banged(Box::new(chan), Arc::new(MMorphism::identity(&[0]))), vec![n]))
            }
        }
    }

    /// Runs `q` on qubits laid out as `inputs`, then each leaf derivation
    /// under `outer` plus the leaf's wires.
    fn close_channel(
        &self,
        q: &Channel,
        inputs: &[VarName],
        outputs: &OutputBunch,
        leaves: &Bunch<Derivation>,
        outer: &[Slot<T>],
    ) -> Result<Branching<T>, DenotError> {
        let leaf_wires = outputs.leaves();
        let leaf_derivs = leaves.leaves();
        if leaf_wires.len() != leaf_derivs.len() {
            return Err(DenotError::Shape("leaf derivations do not match the channel outputs".into()));
        }
        channel_branching(q, inputs, &self.gates)?.bind(|x, _| {
            let j = leaf_of(outputs, x)?;
            let mut layout: Env<T> = outer.iter().filter(|s| !leaf_wires[j].contains(&s.name)).cloned().collect();
            layout.extend(leaf_wires[j].iter().map(|w| Slot { name: w.clone(), value: Index::Unit, qubits: 1 }));
            let (lenv, perm) = route(&layout, &names(&leaf_derivs[j].ctx))?;
            Ok(self.denote(leaf_derivs[j], &lenv)?.after(&perm))
        })
    }

    /// `⟦(Q, m)⟧` at the single point of the input wires, taken in sorted order.
    pub fn denote_configuration(&self, cd: &ConfigDerivation) -> Result<Branching<T>, DenotError> {
        let inputs: Vec<VarName> = cd.inputs.iter().cloned().collect();
        self.close_channel(&cd.channel, &inputs, &cd.outputs, &cd.leaves, &[])
    }

    /// `⟦d⟧` for a judgment whose context holds only qubits and data, at the
    /// point assigning `*` to every qubit variable.
    pub fn denote_closed(&self, d: &Derivation) -> Result<Branching<T>, DenotError> {
        let env = d
            .ctx
            .iter()
            .map(|(x, t)| {
                let value = Object::of_type(t).points::<T>().and_then(|p| p.into_iter().next()).ok_or_else(|| {
                    DenotError::Shape(format!("variable {x} : {t} has no canonical point"))
                })?;
                Ok(Slot { name: x.clone(), qubits: qubits_of(t, &value)?, value })
            })
            .collect::<Result<Vec<_>, DenotError>>()?;
        self.denote(d, &env)
    }
}

fn bad_rule(d: &Derivation) -> DenotError {
    DenotError::Shape(format!("rule {} does not fit term {}", d.rule.name(), d.term))
}

/// The closure standing for a channel: applied to the pattern point it runs the channel.
pub fn unbox_iso<T: Real>(k: &Arc<ChanPoint<T>>) -> Index<T> {
    let k = k.clone();
    Index::Closure(Arc::new(Closure::new(0, move |_| Ok(k.run.clone()))))
}

/// Packs a Kleisli morphism out of the single point of a register as a channel point.
pub fn box_iso<T: Real>(k: &super::monad::Kleisli<T>) -> Result<Index<T>, DenotError> {
    let Object::State(shape) = &k.dom else { return Err(DenotError::NotStateObject) };
    let [n] = shape.as_slice() else { return Err(DenotError::NotStateObject) };
    let run = k.apply(&Index::Unit)?;
    Ok(Index::Chan(Arc::new(ChanPoint { id: fresh_id(), inputs: *n, run })))
}

/// Reads a channel point back as a Kleisli morphism from `n` qubits into `cod`.
pub fn chan_to_kleisli<T: Real>(x: &Index<T>, cod: Object) -> Result<super::monad::Kleisli<T>, DenotError> {
    let Index::Chan(k) = x else { return Err(DenotError::NotStateObject) };
    let k = k.clone();
    Ok(super::monad::Kleisli::new(Object::State(vec![k.inputs]), cod, move |_| Ok(k.run.clone())))
}
