//! Interpretation of branching quantum channels as Kleisli morphisms from
//! the input register to the object of output leaves.

use std::sync::Arc;

use super::cpmap::{MMorphism, Superop};
use super::monad::{bif, merge, mu, fmap, BbMorphism, Branching, Kleisli};
use super::object::{Index, Object};
use super::DenotError;
use crate::bunch::Bunch;
use crate::qcalg::{branch_basis, Channel, GateTable};
use crate::scalar::Real;
use crate::syntax::{VarName, WireSet};

/// The object of output leaves of a channel.
pub fn output_object(out: &Bunch<WireSet>) -> Object {
    match out {
        Bunch::Leaf(v) => Object::State(vec![v.len()]),
        Bunch::Node(a, b) => Object::coproduct(output_object(a), output_object(b)),
    }
}

/// The output leaf selected by an index of [`output_object`], counted left to right.
pub fn leaf_of<T: Real>(out: &Bunch<WireSet>, x: &Index<T>) -> Result<usize, DenotError> {
    match (out, x) {
        (Bunch::Leaf(_), Index::Unit) => Ok(0),
        (Bunch::Node(a, _), Index::Inj(false, y)) => leaf_of(a, y),
        (Bunch::Node(a, b), Index::Inj(true, y)) => Ok(a.leaf_count() + leaf_of(b, y)?),
        _ => Err(DenotError::Shape(format!("{x} does not select a leaf"))),
    }
}

fn pure<T: Real>(n_in: usize, s: Superop<T>) -> BbMorphism<T> {
    let n_out = s.qubits_out;
    let m = Arc::new(MMorphism::single(s));
    BbMorphism::new(Object::State(vec![n_in]), Object::State(vec![n_out]), move |_| Ok((Index::Unit, (*m).clone())))
}

fn position(order: &[VarName], w: &VarName) -> Result<usize, DenotError> {
    order.iter().position(|v| v == w).ok_or_else(|| DenotError::Shape(format!("wire {w} is not available")))
}

/// `⟦Q⟧` for qubits laid out in `order`. Each output leaf holds its wires
/// in sorted order.
pub fn denote_channel<T: Real>(q: &Channel, order: &[VarName], gates: &GateTable<T>) -> Result<Kleisli<T>, DenotError> {
    let n = order.len();
    let here = Object::State(vec![n]);
    match q {
        Channel::Eps(v) => {
            if v.len() != n || v.iter().any(|w| !order.contains(w)) {
                return Err(DenotError::Shape(format!("leaf {v:?} does not match wires {order:?}")));
            }
            let perm: Vec<usize> = v.iter().map(|w| position(order, w)).collect::<Result<_, _>>()?;
            let m = Arc::new(MMorphism::single(Superop::permutation(&perm)));
            Ok(Kleisli::new(here, Object::State(vec![n]), move |_| Ok(Branching::single(Index::Unit, (*m).clone()))))
        }
        Channel::Gate(u, ws, rest) => {
            let pos: Vec<usize> = ws.iter().map(|w| position(order, w)).collect::<Result<_, _>>()?;
            let mat = gates.unitary(u).map_err(DenotError::Gate)?;
            let k = denote_channel(rest, order, gates)?;
            Ok(k.after_pure(&pure(n, Superop::gate(mat, &pos, n))))
        }
        Channel::Init(b, w, rest) => {
            let mut next = order.to_vec();
            next.push(w.clone());
            let k = denote_channel(rest, &next, gates)?;
            Ok(k.after_pure(&pure(n, Superop::append_basis(n, usize::from(*b)))))
        }
        Channel::Free(w, rest) => {
            let p = position(order, w)?;
            let mut next = order.to_vec();
            next.remove(p);
            let k = denote_channel(rest, &next, gates)?;
            Ok(k.after_pure(&pure(n, Superop::discard(n, p))))
        }
        Channel::Meas(w, q1, q2) => {
            let p = position(order, w)?;
            let k1 = denote_channel(q1, order, gates)?.after_pure(&pure(n, Superop::project(n, p, branch_basis(true))));
            let k2 = denote_channel(q2, order, gates)?.after_pure(&pure(n, Superop::project(n, p, branch_basis(false))));
            let (o1, o2) = (k1.cod.clone(), k2.cod.clone());
            let sum = Object::coproduct(o1.clone(), o2.clone());
            let both = k1.into_bb().coproduct(&k2.into_bb());
            let composite = bif(&here).then(&fmap(&both.then(&merge(&o1, &o2)))).then(&mu(&sum));
            composite.into_kleisli()
        }
    }
}

/// Evaluates `⟦Q⟧` at the single point of its input register.
pub fn channel_branching<T: Real>(q: &Channel, order: &[VarName], gates: &GateTable<T>) -> Result<Branching<T>, DenotError> {
    denote_channel(q, order, gates)?.apply(&Index::Unit)
}
