//! Surface macros and their expansions into channel constants.

use crate::bunch::Bunch;
use crate::qcalg::{Channel, GateName};
use crate::syntax::{Pattern, Term, VarName};

fn pv(x: &str) -> Pattern {
    Pattern::Var(VarName::raw(x))
}

/// `meas`: measures a qubit, returning the outcome and the collapsed qubit.
pub fn meas() -> Term {
    let q = Channel::meas("x", Channel::eps(["x"]), Channel::eps(["x"]));
    let body = Bunch::node(
        Bunch::Leaf(Term::pair(Term::True, Term::var("x"))),
        Bunch::Leaf(Term::pair(Term::False, Term::var("x"))),
    );
    Term::unbox(Term::qchan(pv("x"), q, body))
}

/// `free`: discards a qubit.
pub fn free() -> Term {
    Term::unbox(Term::qchan(pv("x"), Channel::free("x", Channel::eps([])), Bunch::Leaf(Term::Unit)))
}

/// `init_tt` / `init_ff`: a function from `I` producing a fresh qubit; apply it to `*`.
pub fn init(b: bool) -> Term {
    Term::unbox(Term::qchan(Pattern::Unit, Channel::init(b, "x", Channel::eps(["x"])), Bunch::Leaf(Term::var("x"))))
}

/// `gate U` for a gate of the given arity; two-qubit gates take a pair.
pub fn gate(u: &GateName, arity: usize) -> Term {
    let names: Vec<String> = (0..arity).map(|i| if i == 0 { "x".to_string() } else { format!("x{i}") }).collect();
    let ws: Vec<VarName> = names.iter().map(|n| VarName::raw(n)).collect();
    let pattern = tuple_pattern(&ws);
    let body = pattern.to_term();
    let q = Channel::Gate(u.clone(), ws.clone(), Box::new(Channel::Eps(ws.iter().cloned().collect())));
    Term::unbox(Term::qchan(pattern, q, Bunch::Leaf(body)))
}

/// Right-nested pair pattern over the given names.
pub fn tuple_pattern(ws: &[VarName]) -> Pattern {
    match ws {
        [] => Pattern::Unit,
        [x] => Pattern::Var(x.clone()),
        [x, rest @ ..] => Pattern::pair(Pattern::Var(x.clone()), tuple_pattern(rest)),
    }
}
