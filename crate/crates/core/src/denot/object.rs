//! Objects of the coproduct completion and their indices.
//!
//! An object is a family of sums of registers indexed by a set; a point of
//! that set is an [`Index`], and [`Object::fiber`] gives the register shape
//! sitting over it.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::cpmap::{BranchShape, MMorphism};
use super::monad::Branching;
use super::DenotError;
use crate::scalar::Real;
use crate::syntax::{PatternType, TypeExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    /// A single point over the given sum of registers. `State(vec![0])` is
    /// the unit, `State(vec![1])` a qubit, `State(vec![])` the empty object.
    State(BranchShape),
    /// Two points over the unit.
    Bool,
    Tensor(Box<Object>, Box<Object>),
    /// Iterated tensor, indexed by [`Index::Tuple`].
    Product(Vec<Object>),
    Coproduct(Box<Object>, Box<Object>),
    Hom(Box<Object>, Box<Object>),
    Bang(Box<Object>),
    Chan(Box<Object>, Box<Object>),
    /// Finite multisets of points, the carrier of the monad.
    Free(Box<Object>),
}

impl Object {
    pub fn unit() -> Self {
        Object::State(vec![0])
    }

    pub fn qubit() -> Self {
        Object::State(vec![1])
    }

    pub fn tensor(a: Object, b: Object) -> Self {
        Object::Tensor(Box::new(a), Box::new(b))
    }

    pub fn coproduct(a: Object, b: Object) -> Self {
        Object::Coproduct(Box::new(a), Box::new(b))
    }

    pub fn free(a: Object) -> Self {
        Object::Free(Box::new(a))
    }

    pub fn of_type(t: &TypeExpr) -> Object {
        match t {
            TypeExpr::Unit => Object::unit(),
            TypeExpr::Bool => Object::Bool,
            TypeExpr::Qubit => Object::qubit(),
            TypeExpr::Tensor(a, b) => Object::tensor(Object::of_type(a), Object::of_type(b)),
            TypeExpr::Lolli(a, b) => Object::Hom(Box::new(Object::of_type(a)), Box::new(Object::of_type(b))),
            TypeExpr::Bang(a) => Object::Bang(Box::new(Object::of_type(a))),
            TypeExpr::QChan(p, b) => Object::Chan(Box::new(Object::of_pattern_type(p)), Box::new(Object::of_type(b))),
        }
    }

    pub fn of_pattern_type(p: &PatternType) -> Object {
        Object::of_type(&p.to_type())
    }

    /// The register shape over `x`, or an error if `x` is not a point of `self`.
    pub fn fiber<T: Real>(&self, x: &Index<T>) -> Result<BranchShape, DenotError> {
        let bad = || DenotError::Shape(format!("{x} is not a point of {self:?}"));
        Ok(match (self, x) {
            (Object::State(s), Index::Unit) => s.clone(),
            (Object::Bool, Index::Bool(_)) => vec![0],
            (Object::Tensor(a, b), Index::Pair(x, y)) => product(&a.fiber(x)?, &b.fiber(y)?),
            (Object::Product(os), Index::Tuple(xs)) if os.len() == xs.len() => {
                let mut acc = vec![0];
                for (o, x) in os.iter().zip(xs) {
                    acc = product(&acc, &o.fiber(x)?);
                }
                acc
            }
            (Object::Coproduct(a, _), Index::Inj(false, x)) => a.fiber(x)?,
            (Object::Coproduct(_, b), Index::Inj(true, x)) => b.fiber(x)?,
            (Object::Hom(..), Index::Closure(c)) => vec![c.captured],
            (Object::Bang(_), Index::Banged(..)) => vec![0],
            (Object::Chan(..), Index::Chan(_)) => vec![0],
            (Object::Free(a), Index::MSet(xs)) => {
                let mut acc = vec![];
                for x in xs {
                    acc.extend(a.fiber(x)?);
                }
                acc
            }
            _ => return Err(bad()),
        })
    }

    /// Every point, when the index set is finite and small.
    pub fn points<T: Real>(&self) -> Option<Vec<Index<T>>> {
        Some(match self {
            Object::State(_) => vec![Index::Unit],
            Object::Bool => vec![Index::Bool(true), Index::Bool(false)],
            Object::Tensor(a, b) => {
                let (pa, pb) = (a.points()?, b.points()?);
                pa.iter().flat_map(|x| pb.iter().map(move |y| Index::pair(x.clone(), y.clone()))).collect()
            }
            Object::Product(os) => {
                let mut acc = vec![vec![]];
                for o in os {
                    let ps = o.points::<T>()?;
                    acc = acc.into_iter().flat_map(|pre: Vec<Index<T>>| ps.iter().map(move |p| {
                        let mut v = pre.clone();
                        v.push(p.clone());
                        v
                    })).collect();
                }
                acc.into_iter().map(Index::Tuple).collect()
            }
            Object::Coproduct(a, b) => {
                let mut v: Vec<Index<T>> = a.points::<T>()?.into_iter().map(|x| Index::inj(false, x)).collect();
                v.extend(b.points::<T>()?.into_iter().map(|x| Index::inj(true, x)));
                v
            }
            _ => return None,
        })
    }
}

pub(crate) fn product(a: &[usize], b: &[usize]) -> BranchShape {
    a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect()
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

pub type ApplyFn<T> = dyn Fn(&Index<T>) -> Result<Branching<T>, DenotError> + Send + Sync;

/// A point of a function object: a closure over `captured` qubits. Applied
/// to an argument it yields a branching whose domain is the captured qubits
/// followed by the argument's.
pub struct Closure<T: Real> {
    pub id: u64,
    pub captured: usize,
    pub apply: Box<ApplyFn<T>>,
}

impl<T: Real> Closure<T> {
    pub fn new(captured: usize, apply: impl Fn(&Index<T>) -> Result<Branching<T>, DenotError> + Send + Sync + 'static) -> Self {
        Closure { id: fresh_id(), captured, apply: Box::new(apply) }
    }
}

/// A point of a channel object: the Kleisli morphism it stands for,
/// evaluated at the single point of its input object.
#[derive(Clone, Debug)]
pub struct ChanPoint<T: Real> {
    pub id: u64,
    pub inputs: usize,
    pub run: Branching<T>,
}

#[derive(Clone)]
pub enum Index<T: Real> {
    Unit,
    Bool(bool),
    Pair(Box<Index<T>>, Box<Index<T>>),
    Tuple(Vec<Index<T>>),
    /// `false` is the left injection.
    Inj(bool, Box<Index<T>>),
    MSet(Vec<Index<T>>),
    Closure(Arc<Closure<T>>),
    /// A promoted value: the index it evaluates to and the map from the unit
    /// producing its qubits.
    Banged(Box<Index<T>>, Arc<MMorphism<T>>),
    Chan(Arc<ChanPoint<T>>),
}

impl<T: Real> Index<T> {
    pub fn pair(a: Index<T>, b: Index<T>) -> Self {
        Index::Pair(Box::new(a), Box::new(b))
    }

    pub fn inj(right: bool, x: Index<T>) -> Self {
        Index::Inj(right, Box::new(x))
    }

    /// Whether the index only involves data (no closures or channels).
    pub fn is_observable(&self) -> bool {
        match self {
            Index::Unit | Index::Bool(_) => true,
            Index::Pair(a, b) => a.is_observable() && b.is_observable(),
            Index::Tuple(xs) | Index::MSet(xs) => xs.iter().all(Index::is_observable),
            Index::Inj(_, x) => x.is_observable(),
            Index::Closure(_) | Index::Banged(..) | Index::Chan(_) => false,
        }
    }
}

impl<T: Real> PartialEq for Index<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Index::Unit, Index::Unit) => true,
            (Index::Bool(a), Index::Bool(b)) => a == b,
            (Index::Pair(a, b), Index::Pair(c, d)) => a == c && b == d,
            (Index::Tuple(a), Index::Tuple(b)) | (Index::MSet(a), Index::MSet(b)) => a == b,
            (Index::Inj(s, a), Index::Inj(t, b)) => s == t && a == b,
            (Index::Closure(a), Index::Closure(b)) => a.id == b.id,
            (Index::Banged(a, f), Index::Banged(b, g)) => a == b && (Arc::ptr_eq(f, g) || f == g),
            (Index::Chan(a), Index::Chan(b)) => a.id == b.id,
            _ => false,
        }
    }
}

impl<T: Real> fmt::Display for Index<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, xs: &[Index<T>]| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        };
        match self {
            Index::Unit => write!(f, "*"),
            Index::Bool(true) => write!(f, "tt"),
            Index::Bool(false) => write!(f, "ff"),
            Index::Pair(a, b) => write!(f, "<{a}, {b}>"),
            Index::Tuple(xs) => {
                write!(f, "(")?;
                list(f, xs)?;
                write!(f, ")")
            }
            Index::Inj(false, x) => write!(f, "inl {x}"),
            Index::Inj(true, x) => write!(f, "inr {x}"),
            Index::MSet(xs) => {
                write!(f, "{{")?;
                list(f, xs)?;
                write!(f, "}}")
            }
            Index::Closure(c) => write!(f, "closure#{}", c.id),
            Index::Banged(x, _) => write!(f, "!{x}"),
            Index::Chan(c) => write!(f, "chan#{}", c.id),
        }
    }
}

impl<T: Real> fmt::Debug for Index<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
