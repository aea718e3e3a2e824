//! Binary trees with data at the leaves.
//!
//! The same shape is used for channel outputs, branching terms and
//! branching contexts; the leaf order is always left to right.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bunch<T> {
    Leaf(T),
    Node(Box<Bunch<T>>, Box<Bunch<T>>),
}

impl<T> Bunch<T> {
    pub fn node(a: Bunch<T>, b: Bunch<T>) -> Self {
        Bunch::Node(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a T>) {
        match self {
            Bunch::Leaf(x) => out.push(x),
            Bunch::Node(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn into_leaves(self) -> Vec<T> {
        let mut out = Vec::new();
        fn go<T>(b: Bunch<T>, out: &mut Vec<T>) {
            match b {
                Bunch::Leaf(x) => out.push(x),
                Bunch::Node(a, c) => {
                    go(*a, out);
                    go(*c, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Bunch::Leaf(_) => 1,
            Bunch::Node(a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    pub fn map<U>(&self, f: &mut impl FnMut(&T) -> U) -> Bunch<U> {
        match self {
            Bunch::Leaf(x) => Bunch::Leaf(f(x)),
            Bunch::Node(a, b) => {
                let a = a.map(f);
                Bunch::node(a, b.map(f))
            }
        }
    }

    pub fn try_map<U, E>(&self, f: &mut impl FnMut(&T) -> Result<U, E>) -> Result<Bunch<U>, E> {
        Ok(match self {
            Bunch::Leaf(x) => Bunch::Leaf(f(x)?),
            Bunch::Node(a, b) => {
                let a = a.try_map(f)?;
                Bunch::node(a, b.try_map(f)?)
            }
        })
    }

    pub fn same_shape<U>(&self, other: &Bunch<U>) -> bool {
        match (self, other) {
            (Bunch::Leaf(_), Bunch::Leaf(_)) => true,
            (Bunch::Node(a, b), Bunch::Node(c, d)) => a.same_shape(c) && b.same_shape(d),
            _ => false,
        }
    }

    /// Pairs up the leaves of two trees of the same shape.
    pub fn zip<'a, U>(&'a self, other: &'a Bunch<U>) -> Option<Bunch<(&'a T, &'a U)>> {
        match (self, other) {
            (Bunch::Leaf(x), Bunch::Leaf(y)) => Some(Bunch::Leaf((x, y))),
            (Bunch::Node(a, b), Bunch::Node(c, d)) => Some(Bunch::node(a.zip(c)?, b.zip(d)?)),
            _ => None,
        }
    }

    pub fn shape(&self) -> Bunch<()> {
        self.map(&mut |_| ())
    }

    pub fn all(&self, f: &mut impl FnMut(&T) -> bool) -> bool {
        match self {
            Bunch::Leaf(x) => f(x),
            Bunch::Node(a, b) => a.all(f) && b.all(f),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Bunch<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bunch::Leaf(x) => write!(f, "{x}"),
            Bunch::Node(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}
