//! Monad laws, strength, naturality of bif and merge, the box/unbox
//! isomorphism and the lifting-map round trip, checked numerically.

use pql_oracles::laws;

const TOL: f64 = 1e-9;

fn holds(r: laws::LawResult) {
    let n = r.unwrap_or_else(|e| panic!("{e}"));
    assert!(n > 0);
}

#[test]
fn monad_unit_laws() {
    holds(laws::monad_unit(1, TOL));
}

#[test]
fn monad_associativity() {
    holds(laws::monad_associativity(2, TOL));
}

#[test]
fn kleisli_category_laws() {
    holds(laws::kleisli_category(3, TOL));
}

#[test]
fn strength_agrees_with_unit() {
    holds(laws::strength_coherence(4, TOL));
}

#[test]
fn bif_is_natural() {
    holds(laws::bif_naturality(5, TOL));
}

#[test]
fn merge_is_natural() {
    holds(laws::merge_naturality(6, TOL));
}

#[test]
fn box_and_unbox_are_inverse() {
    holds(laws::box_unbox_round_trip(7, TOL));
}

#[test]
fn lifting_map_undoes_the_injection() {
    holds(laws::lifting_round_trip(TOL));
}
