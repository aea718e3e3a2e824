//! Monad laws, strength, naturality of bif and merge, the box/unbox
//! isomorphism and the lifting-map round trip, checked pointwise on sampled
//! objects and morphisms. Each check returns the number of comparisons made.

use pql_core::arbitrary::{random_kleisli, random_pure, rng, Rng8};
use pql_core::denot::{
    agree_at, bif, box_iso, chan_to_kleisli, equal_observable, eta, fmap, left_unitor, merge, mu, strength, unbox_iso,
    BbMorphism, Branching, Index, Kleisli, MMorphism, Object, Superop,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub type LawResult = Result<usize, String>;

fn objects() -> Vec<Object> {
    vec![Object::Bool, Object::qubit(), Object::tensor(Object::Bool, Object::qubit())]
}

fn sample_mset(r: &mut Rng8, a: &Object) -> Index<f64> {
    let ps = a.points::<f64>().unwrap();
    let k = r.gen_range(0..=3);
    Index::MSet((0..k).map(|_| ps.choose(r).unwrap().clone()).collect())
}

fn nest(r: &mut Rng8, depth: usize, a: &Object) -> Index<f64> {
    if depth == 0 {
        return sample_mset(r, a);
    }
    let k = r.gen_range(0..=2);
    Index::MSet((0..k).map(|_| nest(r, depth - 1, a)).collect())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn same_kleisli(f: &Kleisli<f64>, g: &Kleisli<f64>, tol: f64) -> LawResult {
    let mut n = 0;
    for x in f.dom.points::<f64>().ok_or("object without finite points")? {
        let (a, b) = (f.apply(&x).map_err(err)?, g.apply(&x).map_err(err)?);
        let c = equal_observable(&a, &b, tol).map_err(err)?;
        if !c.equal {
            return Err(format!("Kleisli maps differ at {x}: deviation {}", c.deviation));
        }
        n += 1;
    }
    Ok(n)
}

fn same_at(f: &BbMorphism<f64>, g: &BbMorphism<f64>, x: &Index<f64>, tol: f64) -> LawResult {
    if agree_at(f, g, x, tol).map_err(err)? {
        Ok(1)
    } else {
        Err(format!("morphisms differ at {x}"))
    }
}

pub fn monad_unit(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let mut n = 0;
    for a in objects() {
        let fa = Object::free(a.clone());
        let id = BbMorphism::identity(fa.clone());
        let left = eta(&fa).then(&mu(&a));
        let right = fmap(&eta(&a)).then(&mu(&a));
        for _ in 0..20 {
            let x = sample_mset(&mut r, &a);
            n += same_at(&left, &id, &x, tol)? + same_at(&right, &id, &x, tol)?;
        }
    }
    Ok(n)
}

pub fn monad_associativity(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let mut n = 0;
    for a in objects() {
        let fa = Object::free(a.clone());
        let outer = mu(&fa).then(&mu(&a));
        let inner = fmap(&mu(&a)).then(&mu(&a));
        for _ in 0..20 {
            let x = nest(&mut r, 2, &a);
            n += same_at(&outer, &inner, &x, tol)?;
        }
    }
    Ok(n)
}

pub fn kleisli_category(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let objs = objects();
    let mut n = 0;
    for _ in 0..15 {
        let [a, b, c, d] = std::array::from_fn(|_| objs.choose(&mut r).unwrap().clone());
        let f = random_kleisli(&mut r, &a, &b);
        let g = random_kleisli(&mut r, &b, &c);
        let h = random_kleisli(&mut r, &c, &d);
        n += same_kleisli(&eta(&a).into_kleisli().map_err(err)?.then(&f), &f, tol)?;
        n += same_kleisli(&f.then(&eta(&b).into_kleisli().map_err(err)?), &f, tol)?;
        n += same_kleisli(&f.then(&g).then(&h), &f.then(&g.then(&h)), tol)?;
    }
    Ok(n)
}

pub fn strength_coherence(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let mut n = 0;
    for a in objects() {
        for b in objects() {
            let ab = Object::tensor(a.clone(), b.clone());
            let via_strength = BbMorphism::identity(a.clone()).tensor(&eta(&b)).then(&strength(&a, &b));
            for x in ab.points::<f64>().ok_or("object without finite points")? {
                n += same_at(&eta(&ab), &via_strength, &x, tol)?;
            }
            let unitor = left_unitor(&Object::free(b.clone()));
            let through = strength(&Object::unit(), &b).then(&fmap(&left_unitor(&b)));
            for _ in 0..5 {
                let x = Index::pair(Index::Unit, sample_mset(&mut r, &b));
                n += same_at(&unitor, &through, &x, tol)?;
            }
        }
    }
    Ok(n)
}

pub fn bif_naturality(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let mut n = 0;
    for a in objects() {
        for b in objects() {
            for _ in 0..4 {
                let f = random_pure(&mut r, &a, &b);
                let lhs = f.then(&bif(&b));
                let rhs = bif(&a).then(&fmap(&f.coproduct(&f)));
                for x in a.points::<f64>().ok_or("object without finite points")? {
                    n += same_at(&lhs, &rhs, &x, tol)?;
                }
            }
        }
    }
    Ok(n)
}

pub fn merge_naturality(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let objs = objects();
    let mut n = 0;
    for _ in 0..20 {
        let [a, b, a2, b2] = std::array::from_fn(|_| objs.choose(&mut r).unwrap().clone());
        let f = random_pure(&mut r, &a, &b);
        let g = random_pure(&mut r, &a2, &b2);
        let lhs = fmap(&f).coproduct(&fmap(&g)).then(&merge(&b, &b2));
        let rhs = merge(&a, &a2).then(&fmap(&f.coproduct(&g)));
        for right in [false, true] {
            let x = Index::inj(right, sample_mset(&mut r, if right { &a2 } else { &a }));
            n += same_at(&lhs, &rhs, &x, tol)?;
        }
    }
    Ok(n)
}

pub fn box_unbox_round_trip(seed: u64, tol: f64) -> LawResult {
    let mut r = rng(seed);
    let mut n = 0;
    for qubits in 0..=2 {
        for b in objects() {
            let k = random_kleisli(&mut r, &Object::State(vec![qubits]), &b);
            let chan = box_iso(&k).map_err(err)?;
            let back = chan_to_kleisli(&chan, b.clone()).map_err(err)?;
            n += same_kleisli(&back, &k, tol)?;
            let again = box_iso(&back).map_err(err)?;
            let (Index::Chan(c1), Index::Chan(c2)) = (&chan, &again) else {
                return Err("box did not produce channel points".into());
            };
            if !equal_observable(&c1.run, &c2.run, tol).map_err(err)?.equal {
                return Err("box after unbox changed the channel".into());
            }
            let Index::Closure(f) = unbox_iso(c1) else {
                return Err("unbox did not produce a closure".into());
            };
            let ran = (f.apply)(&Index::Unit).map_err(err)?;
            if !equal_observable(&ran, &k.apply(&Index::Unit).map_err(err)?, tol).map_err(err)?.equal {
                return Err("unboxed closure differs from the original map".into());
            }
            n += 2;
        }
    }
    Ok(n)
}

/// `b_s` is one point over `I ⊞ I`, `b_p` two points over `I`. The injection
/// `b_p -> b_s` followed by the lifting map `b_s -> F(b_p)` is the unit.
pub fn lifting_round_trip(tol: f64) -> LawResult {
    let bs = Object::State(vec![0, 0]);
    let bp = Object::Bool;
    let inj = BbMorphism::new(bp.clone(), bs.clone(), |x: &Index<f64>| {
        let Index::Bool(b) = x else { unreachable!() };
        let mut m = MMorphism::zero(vec![0], vec![0, 0]);
        m.comps[0][if *b { 0 } else { 1 }] = Some(Superop::identity(0));
        Ok((Index::Unit, m))
    });
    let lb = Kleisli::new(bs, bp.clone(), |_| {
        Ok(Branching { outcomes: vec![Index::Bool(true), Index::Bool(false)], blocks: vec![vec![0], vec![0]], map: MMorphism::identity(&[0, 0]) })
    });
    same_kleisli(&lb.after_pure(&inj), &eta(&bp).into_kleisli().map_err(err)?, tol)
}

/// Every law with its default seed, by name.
pub fn all(tol: f64) -> Vec<(&'static str, LawResult)> {
    vec![
        ("monad unit", monad_unit(1, tol)),
        ("monad associativity", monad_associativity(2, tol)),
        ("Kleisli category", kleisli_category(3, tol)),
        ("strength", strength_coherence(4, tol)),
        ("bif naturality", bif_naturality(5, tol)),
        ("merge naturality", merge_naturality(6, tol)),
        ("box/unbox", box_unbox_round_trip(7, tol)),
        ("lifting map", lifting_round_trip(tol)),
    ]
}
