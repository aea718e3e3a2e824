//! The algorithmic checker against exhaustive derivation search.

use pql_core::arbitrary::rng;
use pql_core::syntax::{pretty_term, Term, TypeExpr, VarName};
use pql_core::typecheck::{check_term, Context};
use pql_oracles::queries::query;
use pql_oracles::{declarative, verify};

#[test]
fn checker_agrees_with_search() {
    let mut r = rng(4);
    let mut accepted = 0;
    for i in 0..1500 {
        let (g, t, a) = query(&mut r, i);
        let alg = check_term(&Context::from_pairs(g.clone()), &t, &a);
        let dec = declarative::derivable(&g, &t, &a);
        assert_eq!(alg.is_ok(), dec, "{g:?} |- {} : {a} (checker: {:?})", pretty_term(&t), alg.err());
        accepted += dec as usize;
    }
    assert!(accepted > 400, "only {accepted} accepted queries");
}

#[test]
fn checker_derivations_follow_the_rules() {
    let mut r = rng(5);
    for i in 0..600 {
        let (g, t, a) = query(&mut r, i);
        if let Ok(d) = check_term(&Context::from_pairs(g.clone()), &t, &a) {
            verify::verify(&d).unwrap_or_else(|e| panic!("{}: {e}", pretty_term(&t)));
        }
    }
}

#[test]
fn search_handles_promotion_towers() {
    assert!(declarative::derivable(&[], &Term::True, &TypeExpr::bang(TypeExpr::bang(TypeExpr::Bool))));
    let x = VarName::raw("x");
    let q = [(x.clone(), TypeExpr::Qubit)];
    assert!(!declarative::derivable(&q, &Term::Var(x.clone()), &TypeExpr::bang(TypeExpr::Qubit)));
    let dup = Term::pair(Term::Var(x.clone()), Term::Var(x));
    assert!(!declarative::derivable(&q, &dup, &TypeExpr::tensor(TypeExpr::Qubit, TypeExpr::Qubit)));
}
