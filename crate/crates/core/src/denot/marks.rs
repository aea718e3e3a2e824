//! Marks: the generating objects of the diagram category, and their
//! normal forms.

use std::fmt;

use super::cpmap::BranchShape;
use super::object::product;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mark {
    Q,
    Tensor(Box<Mark>, Box<Mark>),
    /// `Boxplus(vec![])` is the unit `I`.
    Boxplus(Vec<Mark>),
    Dual(Box<Mark>),
}

impl Mark {
    pub fn unit() -> Self {
        Mark::Boxplus(vec![])
    }

    pub fn tensor(a: Mark, b: Mark) -> Self {
        Mark::Tensor(Box::new(a), Box::new(b))
    }

    pub fn dual(m: Mark) -> Self {
        Mark::Dual(Box::new(m))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Mark::Boxplus(v) if v.is_empty())
    }

    /// Pushes duals down to `Q` and flattens nested non-empty sums.
    pub fn normalize(&self) -> Mark {
        self.norm(false)
    }

    fn norm(&self, dual: bool) -> Mark {
        match self {
            Mark::Q if dual => Mark::dual(Mark::Q),
            Mark::Q => Mark::Q,
            Mark::Dual(m) => m.norm(!dual),
            Mark::Tensor(a, b) => Mark::tensor(a.norm(dual), b.norm(dual)),
            Mark::Boxplus(ms) => {
                let mut out = vec![];
                for m in ms {
                    match m.norm(dual) {
                        Mark::Boxplus(inner) if !inner.is_empty() => out.extend(inner),
                        n => out.push(n),
                    }
                }
                if out.len() == 1 {
                    out.pop().expect("one summand")
                } else {
                    Mark::Boxplus(out)
                }
            }
        }
    }

    /// Qubit counts of the summands after distributing `⊗` over `⊞`;
    /// `None` if a dual remains after normalizing.
    pub fn shape(&self) -> Option<BranchShape> {
        self.normalize().normal_shape()
    }

    fn normal_shape(&self) -> Option<BranchShape> {
        match self {
            Mark::Q => Some(vec![1]),
            Mark::Dual(_) => None,
            Mark::Tensor(a, b) => Some(product(&a.normal_shape()?, &b.normal_shape()?)),
            Mark::Boxplus(ms) if ms.is_empty() => Some(vec![0]),
            Mark::Boxplus(ms) => {
                let mut out = vec![];
                for m in ms {
                    out.extend(m.normal_shape()?);
                }
                Some(out)
            }
        }
    }

    /// The mark `⊞_i q^{⊗ n_i}`.
    pub fn of_shape(shape: &[usize]) -> Mark {
        let reg = |n: usize| (1..n).fold(if n == 0 { Mark::unit() } else { Mark::Q }, |acc, _| Mark::tensor(acc, Mark::Q));
        match shape {
            [n] => reg(*n),
            s => Mark::Boxplus(s.iter().map(|&n| reg(n)).collect()),
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mark::Q => write!(f, "q"),
            Mark::Tensor(a, b) => write!(f, "({a} ⊗ {b})"),
            Mark::Boxplus(ms) if ms.is_empty() => write!(f, "I"),
            Mark::Boxplus(ms) => {
                write!(f, "(")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊞ ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
            Mark::Dual(m) => write!(f, "{m}^⊥"),
        }
    }
}

/// A list of marks, read as their tensor.
#[derive(Clone, Debug)]
pub struct MObject {
    pub marks: Vec<Mark>,
}

impl MObject {
    pub fn new(marks: Vec<Mark>) -> Self {
        MObject { marks }
    }

    pub fn normal_form(&self) -> Vec<Mark> {
        self.marks.iter().map(Mark::normalize).filter(|m| !m.is_unit()).collect()
    }

    pub fn shape(&self) -> Option<BranchShape> {
        self.marks.iter().try_fold(vec![0], |acc, m| Some(product(&acc, &m.shape()?)))
    }
}

impl PartialEq for MObject {
    fn eq(&self, other: &Self) -> bool {
        self.normal_form() == other.normal_form()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duals_are_pushed_to_leaves() {
        let m = Mark::dual(Mark::tensor(Mark::Q, Mark::Boxplus(vec![Mark::Q, Mark::dual(Mark::Q)])));
        assert_eq!(
            m.normalize(),
            Mark::tensor(Mark::dual(Mark::Q), Mark::Boxplus(vec![Mark::dual(Mark::Q), Mark::Q]))
        );
        assert_eq!(Mark::dual(Mark::dual(Mark::Q)).normalize(), Mark::Q);
    }

    #[test]
    fn nested_sums_flatten_but_units_stay() {
        let m = Mark::Boxplus(vec![Mark::Boxplus(vec![Mark::Q, Mark::unit()]), Mark::unit()]);
        assert_eq!(m.normalize(), Mark::Boxplus(vec![Mark::Q, Mark::unit(), Mark::unit()]));
        assert_eq!(m.shape(), Some(vec![1, 0, 0]));
    }

    #[test]
    fn tensor_distributes_over_sum() {
        let m = Mark::tensor(Mark::Boxplus(vec![Mark::Q, Mark::unit()]), Mark::Boxplus(vec![Mark::Q, Mark::Q]));
        assert_eq!(m.shape(), Some(vec![2, 2, 1, 1]));
        assert_eq!(Mark::of_shape(&[2, 0]).shape(), Some(vec![2, 0]));
    }

    #[test]
    fn object_equality_is_on_normal_forms() {
        let a = MObject::new(vec![Mark::Q, Mark::unit(), Mark::dual(Mark::dual(Mark::Q))]);
        let b = MObject::new(vec![Mark::Q, Mark::Q]);
        assert_eq!(a, b);
        assert_eq!(a.shape(), Some(vec![2]));
    }
}
