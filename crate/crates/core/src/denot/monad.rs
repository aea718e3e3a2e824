//! The multiset monad on the coproduct completion, its structure maps, and
//! Kleisli morphisms evaluated pointwise.

use std::sync::Arc;

use super::cpmap::{BranchShape, MMorphism};
use super::object::{product, Index, Object};
use super::DenotError;
use crate::scalar::Real;

/// The image of one point under a Kleisli morphism: the multiset of result
/// points, with the map from the source fiber into the sum of their fibers.
/// `blocks[j]` is the fiber of `outcomes[j]`.
#[derive(Clone, Debug)]
pub struct Branching<T: Real> {
    pub outcomes: Vec<Index<T>>,
    pub blocks: Vec<BranchShape>,
    pub map: MMorphism<T>,
}

/// Target positions for reordering `product(concat A, concat B)` into
/// `concat_{i,j} product(A_i, B_j)`, where `a` and `b` list block sizes.
pub(crate) fn regroup(a: &[usize], b: &[usize]) -> Vec<usize> {
    let nb: usize = b.iter().sum();
    let na: usize = a.iter().sum();
    let mut a_block = vec![];
    for (i, &s) in a.iter().enumerate() {
        a_block.extend((0..s).map(|k| (i, k)));
    }
    let mut b_block = vec![];
    for (j, &s) in b.iter().enumerate() {
        b_block.extend((0..s).map(|k| (j, k)));
    }
    let mut offset = vec![vec![0; b.len()]; a.len()];
    let mut acc = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            offset[i][j] = acc;
            acc += a[i] * b[j];
        }
    }
    let mut target = Vec::with_capacity(na * nb);
    for &(i, ka) in &a_block {
        for &(j, kb) in &b_block {
            target.push(offset[i][j] + ka * b[j] + kb);
        }
    }
    target
}

impl<T: Real> Branching<T> {
    /// The unit of the monad at a point with the given fiber.
    pub fn pure(x: Index<T>, fiber: BranchShape) -> Self {
        Branching { outcomes: vec![x], map: MMorphism::identity(&fiber), blocks: vec![fiber] }
    }

    /// A single outcome reached through `map`.
    pub fn single(x: Index<T>, map: MMorphism<T>) -> Self {
        Branching { outcomes: vec![x], blocks: vec![map.cod.clone()], map }
    }

    pub fn dom(&self) -> &BranchShape {
        &self.map.dom
    }

    /// Precomposes a map into the source fiber.
    pub fn after(&self, f: &MMorphism<T>) -> Self {
        Branching { outcomes: self.outcomes.clone(), blocks: self.blocks.clone(), map: self.map.after(f) }
    }

    /// Kleisli extension: continue every outcome with `k`.
    pub fn bind(
        &self,
        mut k: impl FnMut(&Index<T>, &BranchShape) -> Result<Branching<T>, DenotError>,
    ) -> Result<Branching<T>, DenotError> {
        let mut outcomes = vec![];
        let mut blocks = vec![];
        let mut parts = vec![];
        for (x, b) in self.outcomes.iter().zip(&self.blocks) {
            let r = k(x, b)?;
            if &r.map.dom != b {
                return Err(DenotError::Shape(format!("continuation at {x} expects {:?}, fiber is {b:?}", r.map.dom)));
            }
            outcomes.extend(r.outcomes);
            blocks.extend(r.blocks);
            parts.push(r.map);
        }
        let map = if parts.is_empty() {
            MMorphism::zero(self.map.cod.clone(), vec![]).after(&self.map)
        } else {
            MMorphism::block_diag(&parts).after(&self.map)
        };
        Ok(Branching { outcomes, blocks, map })
    }

    /// Runs both sides on the tensor of their sources, left first; outcomes
    /// are pairs, left major.
    pub fn tensor(&self, other: &Branching<T>) -> Branching<T> {
        let raw = self.map.tensor(&other.map);
        let sa: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        let sb: Vec<usize> = other.blocks.iter().map(Vec::len).collect();
        let perm = MMorphism::leaf_permutation(&raw.cod, &regroup(&sa, &sb));
        let mut outcomes = vec![];
        let mut blocks = vec![];
        for (x, bx) in self.outcomes.iter().zip(&self.blocks) {
            for (y, by) in other.outcomes.iter().zip(&other.blocks) {
                outcomes.push(Index::pair(x.clone(), y.clone()));
                blocks.push(product(bx, by));
            }
        }
        Branching { outcomes, blocks, map: perm.after(&raw) }
    }

    /// Offset of outcome `j`'s block among the codomain summands.
    fn block_start(&self, j: usize) -> usize {
        self.blocks[..j].iter().map(Vec::len).sum()
    }

    /// Restricts the branching to the outcomes satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Branching<T> {
        let mut outcomes = vec![];
        let mut blocks = vec![];
        let mut cols = vec![];
        for j in 0..self.outcomes.len() {
            if keep(j) {
                let s = self.block_start(j);
                cols.extend(s..s + self.blocks[j].len());
                outcomes.push(self.outcomes[j].clone());
                blocks.push(self.blocks[j].clone());
            }
        }
        let mut map = MMorphism::zero(self.map.dom.clone(), cols.iter().map(|&c| self.map.cod[c]).collect());
        for i in 0..self.map.dom.len() {
            for (k, &c) in cols.iter().enumerate() {
                map.comps[i][k] = self.map.comps[i][c].clone();
            }
        }
        Branching { outcomes, blocks, map }
    }

    /// Drops outcomes whose maps vanish within `tol`.
    pub fn drop_negligible(&self, tol: T) -> Branching<T> {
        let live: Vec<bool> = (0..self.outcomes.len())
            .map(|j| {
                let s = self.block_start(j);
                (0..self.map.dom.len()).any(|i| {
                    (s..s + self.blocks[j].len()).any(|c| self.map.comps[i][c].as_ref().is_some_and(|m| !m.is_negligible(tol)))
                })
            })
            .collect();
        self.filter(|j| live[j])
    }

    /// The map into outcome `j` restricted to block-local summands.
    pub fn component(&self, j: usize) -> MMorphism<T> {
        let s = self.block_start(j);
        let n = self.blocks[j].len();
        let mut m = MMorphism::zero(self.map.dom.clone(), self.blocks[j].clone());
        for i in 0..self.map.dom.len() {
            for k in 0..n {
                m.comps[i][k] = self.map.comps[i][s + k].clone();
            }
        }
        m
    }
}

type PointFn<T> = dyn Fn(&Index<T>) -> Result<(Index<T>, MMorphism<T>), DenotError> + Send + Sync;
type KleisliFn<T> = dyn Fn(&Index<T>) -> Result<Branching<T>, DenotError> + Send + Sync;

/// A morphism of the coproduct completion: a function on points together
/// with a map between the fibers.
#[derive(Clone)]
pub struct BbMorphism<T: Real> {
    pub dom: Object,
    pub cod: Object,
    f: Arc<PointFn<T>>,
}

impl<T: Real> BbMorphism<T> {
    pub fn new(
        dom: Object,
        cod: Object,
        f: impl Fn(&Index<T>) -> Result<(Index<T>, MMorphism<T>), DenotError> + Send + Sync + 'static,
    ) -> Self {
        BbMorphism { dom, cod, f: Arc::new(f) }
    }

    pub fn apply(&self, x: &Index<T>) -> Result<(Index<T>, MMorphism<T>), DenotError> {
        let fx = self.dom.fiber(x)?;
        let (y, m) = (self.f)(x)?;
        let fy = self.cod.fiber(&y)?;
        if m.dom != fx || m.cod != fy {
            return Err(DenotError::Shape(format!("component at {x} has shape {:?} -> {:?}, expected {fx:?} -> {fy:?}", m.dom, m.cod)));
        }
        Ok((y, m))
    }

    pub fn identity(a: Object) -> Self {
        let o = a.clone();
        BbMorphism::new(a.clone(), a, move |x| Ok((x.clone(), MMorphism::identity(&o.fiber(x)?))))
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &BbMorphism<T>) -> Self {
        let (f, g2) = (self.clone(), g.clone());
        BbMorphism::new(self.dom.clone(), g.cod.clone(), move |x| {
            let (y, m) = f.apply(x)?;
            let (z, n) = g2.apply(&y)?;
            Ok((z, n.after(&m)))
        })
    }

    pub fn tensor(&self, g: &BbMorphism<T>) -> Self {
        let (f, g2) = (self.clone(), g.clone());
        BbMorphism::new(
            Object::tensor(self.dom.clone(), g.dom.clone()),
            Object::tensor(self.cod.clone(), g.cod.clone()),
            move |x| match x {
                Index::Pair(a, b) => {
                    let (ya, ma) = f.apply(a)?;
                    let (yb, mb) = g2.apply(b)?;
                    Ok((Index::pair(ya, yb), ma.tensor(&mb)))
                }
                _ => Err(DenotError::Shape(format!("{x} is not a pair"))),
            },
        )
    }

    /// `f + g` between coproducts.
    pub fn coproduct(&self, g: &BbMorphism<T>) -> Self {
        let (f, g2) = (self.clone(), g.clone());
        BbMorphism::new(
            Object::coproduct(self.dom.clone(), g.dom.clone()),
            Object::coproduct(self.cod.clone(), g.cod.clone()),
            move |x| match x {
                Index::Inj(false, a) => f.apply(a).map(|(y, m)| (Index::inj(false, y), m)),
                Index::Inj(true, b) => g2.apply(b).map(|(y, m)| (Index::inj(true, y), m)),
                _ => Err(DenotError::Shape(format!("{x} is not an injection"))),
            },
        )
    }

    /// `[f, g] : A + B -> C`.
    pub fn copair(&self, g: &BbMorphism<T>) -> Self {
        assert_eq!(self.cod, g.cod, "copairing morphisms with different codomains");
        let (f, g2) = (self.clone(), g.clone());
        BbMorphism::new(Object::coproduct(self.dom.clone(), g.dom.clone()), self.cod.clone(), move |x| match x {
            Index::Inj(false, a) => f.apply(a),
            Index::Inj(true, b) => g2.apply(b),
            _ => Err(DenotError::Shape(format!("{x} is not an injection"))),
        })
    }

    /// A morphism `A -> F(B)` viewed as a Kleisli morphism `A -> B`.
    pub fn into_kleisli(&self) -> Result<Kleisli<T>, DenotError> {
        let Object::Free(b) = &self.cod else {
            return Err(DenotError::Shape("not a morphism into the free object".into()));
        };
        let (f, b) = (self.clone(), (**b).clone());
        let cod = b.clone();
        Ok(Kleisli::new(self.dom.clone(), cod, move |x| {
            let (y, m) = f.apply(x)?;
            let Index::MSet(outcomes) = y else { unreachable!("checked by apply") };
            let blocks = outcomes.iter().map(|o| b.fiber(o)).collect::<Result<Vec<_>, _>>()?;
            Ok(Branching { outcomes, blocks, map: m })
        }))
    }
}

/// A Kleisli morphism `A -> F(B)` given pointwise.
#[derive(Clone)]
pub struct Kleisli<T: Real> {
    pub dom: Object,
    pub cod: Object,
    f: Arc<KleisliFn<T>>,
}

impl<T: Real> Kleisli<T> {
    pub fn new(dom: Object, cod: Object, f: impl Fn(&Index<T>) -> Result<Branching<T>, DenotError> + Send + Sync + 'static) -> Self {
        Kleisli { dom, cod, f: Arc::new(f) }
    }

    pub fn apply(&self, x: &Index<T>) -> Result<Branching<T>, DenotError> {
        let fx = self.dom.fiber(x)?;
        let r = (self.f)(x)?;
        if r.map.dom != fx {
            return Err(DenotError::Shape(format!("Kleisli component at {x} has domain {:?}, fiber is {fx:?}", r.map.dom)));
        }
        for (o, b) in r.outcomes.iter().zip(&r.blocks) {
            if &self.cod.fiber(o)? != b {
                return Err(DenotError::Shape(format!("outcome {o} has the wrong fiber")));
            }
        }
        Ok(r)
    }

    /// Precomposition with a pure morphism.
    pub fn after_pure(&self, f: &BbMorphism<T>) -> Self {
        let (k, f) = (self.clone(), f.clone());
        Kleisli::new(f.dom.clone(), self.cod.clone(), move |x| {
            let (y, m) = f.apply(x)?;
            Ok(k.apply(&y)?.after(&m))
        })
    }

    /// Kleisli composition `g ∘ self`.
    pub fn then(&self, g: &Kleisli<T>) -> Self {
        let (f, g) = (self.clone(), g.clone());
        Kleisli::new(self.dom.clone(), g.cod.clone(), move |x| f.apply(x)?.bind(|y, _| g.apply(y)))
    }

    pub fn into_bb(&self) -> BbMorphism<T> {
        let k = self.clone();
        BbMorphism::new(self.dom.clone(), Object::free(self.cod.clone()), move |x| {
            let r = k.apply(x)?;
            Ok((Index::MSet(r.outcomes), r.map))
        })
    }
}

fn expect_mset<T: Real>(x: &Index<T>) -> Result<&[Index<T>], DenotError> {
    match x {
        Index::MSet(xs) => Ok(xs),
        _ => Err(DenotError::Shape(format!("{x} is not a multiset"))),
    }
}

/// `η_A : A -> F(A)`.
pub fn eta<T: Real>(a: &Object) -> BbMorphism<T> {
    let o = a.clone();
    BbMorphism::new(a.clone(), Object::free(a.clone()), move |x| Ok((Index::MSet(vec![x.clone()]), MMorphism::identity(&o.fiber(x)?))))
}

/// `μ_A : F(F(A)) -> F(A)`.
pub fn mu<T: Real>(a: &Object) -> BbMorphism<T> {
    let ffa = Object::free(Object::free(a.clone()));
    let o = ffa.clone();
    BbMorphism::new(ffa, Object::free(a.clone()), move |x| {
        let mut flat = vec![];
        for inner in expect_mset(x)? {
            flat.extend(expect_mset(inner)?.iter().cloned());
        }
        Ok((Index::MSet(flat), MMorphism::identity(&o.fiber(x)?)))
    })
}

/// `F(f)`.
pub fn fmap<T: Real>(f: &BbMorphism<T>) -> BbMorphism<T> {
    let f2 = f.clone();
    BbMorphism::new(Object::free(f.dom.clone()), Object::free(f.cod.clone()), move |x| {
        let mut ys = vec![];
        let mut parts = vec![];
        for e in expect_mset(x)? {
            let (y, m) = f2.apply(e)?;
            ys.push(y);
            parts.push(m);
        }
        Ok((Index::MSet(ys), MMorphism::block_diag(&parts)))
    })
}

/// Strength `t_{A,B} : A ⊗ F(B) -> F(A ⊗ B)`.
pub fn strength<T: Real>(a: &Object, b: &Object) -> BbMorphism<T> {
    let (oa, ob) = (a.clone(), b.clone());
    BbMorphism::new(
        Object::tensor(a.clone(), Object::free(b.clone())),
        Object::free(Object::tensor(a.clone(), b.clone())),
        move |x| {
            let Index::Pair(xa, ys) = x else { return Err(DenotError::Shape(format!("{x} is not a pair"))) };
            let fa = oa.fiber(xa)?;
            let ys = expect_mset(ys)?;
            let fbs = ys.iter().map(|y| ob.fiber(y)).collect::<Result<Vec<_>, _>>()?;
            let dom = product(&fa, &fbs.concat());
            let sizes: Vec<usize> = fbs.iter().map(Vec::len).collect();
            let perm = MMorphism::leaf_permutation(&dom, &regroup(&[fa.len()], &sizes));
            let out = ys.iter().map(|y| Index::pair((**xa).clone(), y.clone())).collect();
            Ok((Index::MSet(out), perm))
        },
    )
}

/// `bif_A : A -> F(A + A)`, both injections over the same fiber.
pub fn bif<T: Real>(a: &Object) -> BbMorphism<T> {
    let o = a.clone();
    BbMorphism::new(a.clone(), Object::free(Object::coproduct(a.clone(), a.clone())), move |x| {
        let f = o.fiber(x)?;
        let n = f.len();
        let double: Vec<usize> = f.iter().chain(f.iter()).copied().collect();
        let mut m = MMorphism::zero(f.clone(), double);
        for (i, &k) in f.iter().enumerate() {
            m.comps[i][i] = Some(super::cpmap::Superop::identity(k));
            m.comps[i][n + i] = Some(super::cpmap::Superop::identity(k));
        }
        Ok((Index::MSet(vec![Index::inj(false, x.clone()), Index::inj(true, x.clone())]), m))
    })
}

/// `merge_{A,B} : F(A) + F(B) -> F(A + B)`.
pub fn merge<T: Real>(a: &Object, b: &Object) -> BbMorphism<T> {
    let dom = Object::coproduct(Object::free(a.clone()), Object::free(b.clone()));
    let o = dom.clone();
    BbMorphism::new(dom, Object::free(Object::coproduct(a.clone(), b.clone())), move |x| {
        let (right, inner) = match x {
            Index::Inj(r, inner) => (*r, inner),
            _ => return Err(DenotError::Shape(format!("{x} is not an injection"))),
        };
        let ys = expect_mset(inner)?.iter().map(|y| Index::inj(right, y.clone())).collect();
        Ok((Index::MSet(ys), MMorphism::identity(&o.fiber(x)?)))
    })
}

/// Left unitor `I ⊗ A -> A`.
pub fn left_unitor<T: Real>(a: &Object) -> BbMorphism<T> {
    let o = a.clone();
    BbMorphism::new(Object::tensor(Object::unit(), a.clone()), a.clone(), move |x| match x {
        Index::Pair(u, y) if matches!(**u, Index::Unit) => Ok(((**y).clone(), MMorphism::identity(&o.fiber(y)?))),
        _ => Err(DenotError::Shape(format!("{x} is not a point of I ⊗ A"))),
    })
}

/// Associator `(A ⊗ B) ⊗ C -> A ⊗ (B ⊗ C)`.
pub fn associator<T: Real>(a: &Object, b: &Object, c: &Object) -> BbMorphism<T> {
    let dom = Object::tensor(Object::tensor(a.clone(), b.clone()), c.clone());
    let o = dom.clone();
    BbMorphism::new(dom, Object::tensor(a.clone(), Object::tensor(b.clone(), c.clone())), move |x| match x {
        Index::Pair(ab, z) => match &**ab {
            Index::Pair(p, q) => Ok((
                Index::pair((**p).clone(), Index::pair((**q).clone(), (**z).clone())),
                MMorphism::identity(&o.fiber(x)?),
            )),
            _ => Err(DenotError::Shape(format!("{x} is not nested"))),
        },
        _ => Err(DenotError::Shape(format!("{x} is not a pair"))),
    })
}

/// Compares two morphisms at a point: equal images and maps within `tol`.
pub fn agree_at<T: Real>(f: &BbMorphism<T>, g: &BbMorphism<T>, x: &Index<T>, tol: T) -> Result<bool, DenotError> {
    let (y1, m1) = f.apply(x)?;
    let (y2, m2) = g.apply(x)?;
    Ok(y1 == y2 && m1.approx_eq(&m2, tol))
}
