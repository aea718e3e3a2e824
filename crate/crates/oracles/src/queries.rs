//! Typing queries for comparing the checker with derivation search.

use pql_core::arbitrary::{random_program, random_term, random_type, ProgramLimits, Rng8};
use pql_core::syntax::{Term, TypeExpr, VarName};
use rand::Rng;

pub type Query = (Vec<(VarName, TypeExpr)>, Term, TypeExpr);

/// Generator limits for queries; terms stay within size 12.
pub const LIMITS: ProgramLimits = ProgramLimits { max_size: 12, max_inputs: 2, max_qubits: 2 };

pub fn random_ctx(r: &mut Rng8) -> Vec<(VarName, TypeExpr)> {
    let mut out = vec![];
    for n in ["a", "b", "c"] {
        if r.gen_bool(0.6) {
            out.push((VarName::raw(n), random_type(r, 2)));
        }
    }
    out
}

/// Untyped terms, generated programs at their own type, and generated
/// programs with the type or context disturbed, in equal parts.
pub fn query(r: &mut Rng8, i: usize) -> Query {
    if i.is_multiple_of(3) {
        return (random_ctx(r), random_term(r, LIMITS.max_size), random_type(r, 2));
    }
    let p = random_program(r, LIMITS);
    let mut g: Vec<_> = p.inputs.iter().map(|v| (v.clone(), TypeExpr::Qubit)).collect();
    let mut a = p.ty;
    if i % 3 == 2 {
        if r.gen_bool(0.5) {
            a = random_type(r, 2);
        } else if g.is_empty() {
            g.push((VarName::raw("v0"), TypeExpr::Qubit));
        } else {
            g.pop();
        }
    }
    (g, p.term, a)
}
