//! The quantum channel calculus: channel syntax, validity and wire bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::bunch::Bunch;
use crate::linalg::{c, CMatrix};
use crate::scalar::Real;
use crate::syntax::{VarName, WireSet};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GateName(pub String);

impl GateName {
    pub fn new(s: &str) -> Self {
        GateName(s.to_string())
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Eps(WireSet),
    Gate(GateName, Vec<VarName>, Box<Channel>),
    Init(bool, VarName, Box<Channel>),
    Meas(VarName, Box<Channel>, Box<Channel>),
    Free(VarName, Box<Channel>),
}

/// Output wire sets, one per branch.
pub type OutputBunch = Bunch<WireSet>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QcalgError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("wire clash on {0:?}")]
    WireClash(Vec<VarName>),
}

impl Channel {
    pub fn eps<'a>(names: impl IntoIterator<Item = &'a str>) -> Channel {
        Channel::Eps(crate::syntax::wires(names))
    }

    pub fn gate(u: &str, ws: &[&str], rest: Channel) -> Channel {
        Channel::Gate(GateName::new(u), ws.iter().map(|w| VarName::raw(w)).collect(), Box::new(rest))
    }

    pub fn init(b: bool, w: &str, rest: Channel) -> Channel {
        Channel::Init(b, VarName::raw(w), Box::new(rest))
    }

    pub fn meas(w: &str, a: Channel, b: Channel) -> Channel {
        Channel::Meas(VarName::raw(w), Box::new(a), Box::new(b))
    }

    pub fn free(w: &str, rest: Channel) -> Channel {
        Channel::Free(VarName::raw(w), Box::new(rest))
    }

    /// Every wire name occurring in the channel.
    pub fn all_wires(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_wires(&mut out);
        out
    }

    fn collect_wires(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Channel::Eps(w) => out.extend(w.iter().cloned()),
            Channel::Gate(_, ws, r) => {
                out.extend(ws.iter().cloned());
                r.collect_wires(out);
            }
            Channel::Init(_, w, r) | Channel::Free(w, r) => {
                out.insert(w.clone());
                r.collect_wires(out);
            }
            Channel::Meas(w, a, b) => {
                out.insert(w.clone());
                a.collect_wires(out);
                b.collect_wires(out);
            }
        }
    }

    /// Checks the channel against an input wire set and returns its outputs.
    pub fn validate(&self, inputs: &WireSet) -> Result<OutputBunch, QcalgError> {
        self.validate_with(inputs, &|g| standard_arity(g))
    }

    pub fn validate_with(
        &self,
        inputs: &WireSet,
        arity: &dyn Fn(&GateName) -> Option<usize>,
    ) -> Result<OutputBunch, QcalgError> {
        let bad = |m: String| Err(QcalgError::InvalidChannel(m));
        match self {
            Channel::Eps(w) => {
                if w == inputs {
                    Ok(Bunch::Leaf(w.clone()))
                } else {
                    bad(format!("leaf {{{}}} does not match available wires {{{}}}", join(w), join(inputs)))
                }
            }
            Channel::Gate(u, ws, rest) => {
                let Some(n) = arity(u) else { return bad(format!("unknown gate {u}")) };
                if ws.len() != n {
                    return bad(format!("gate {u} expects {n} wires, got {}", ws.len()));
                }
                let distinct: BTreeSet<_> = ws.iter().collect();
                if distinct.len() != ws.len() {
                    return bad(format!("gate {u} applied to repeated wires"));
                }
                if let Some(w) = ws.iter().find(|w| !inputs.contains(*w)) {
                    return bad(format!("gate {u} on unavailable wire {w}"));
                }
                rest.validate_with(inputs, arity)
            }
            Channel::Init(_, w, rest) => {
                if inputs.contains(w) {
                    return bad(format!("init on live wire {w}"));
                }
                let mut next = inputs.clone();
                next.insert(w.clone());
                rest.validate_with(&next, arity)
            }
            Channel::Meas(w, a, b) => {
                if !inputs.contains(w) {
                    return bad(format!("meas on unavailable wire {w}"));
                }
                Ok(Bunch::node(a.validate_with(inputs, arity)?, b.validate_with(inputs, arity)?))
            }
            Channel::Free(w, rest) => {
                if !inputs.contains(w) {
                    return bad(format!("free on unavailable wire {w}"));
                }
                let mut next = inputs.clone();
                next.remove(w);
                rest.validate_with(&next, arity)
            }
        }
    }

    /// The unique input wire set for which the channel is valid.
    pub fn in_wires(&self) -> Result<WireSet, QcalgError> {
        let w = self.in_wires_structural()?;
        self.validate(&w)?;
        Ok(w)
    }

    fn in_wires_structural(&self) -> Result<WireSet, QcalgError> {
        Ok(match self {
            Channel::Eps(w) => w.clone(),
            Channel::Gate(_, ws, rest) => {
                let mut s = rest.in_wires_structural()?;
                s.extend(ws.iter().cloned());
                s
            }
            Channel::Init(_, w, rest) => {
                let mut s = rest.in_wires_structural()?;
                s.remove(w);
                s
            }
            Channel::Meas(w, a, b) => {
                let sa = a.in_wires_structural()?;
                let sb = b.in_wires_structural()?;
                if sa != sb {
                    return Err(QcalgError::InvalidChannel(format!(
                        "measurement branches on {w} need inputs {{{}}} and {{{}}}",
                        join(&sa),
                        join(&sb)
                    )));
                }
                let mut s = sa;
                s.insert(w.clone());
                s
            }
            Channel::Free(w, rest) => {
                let mut s = rest.in_wires_structural()?;
                s.insert(w.clone());
                s
            }
        })
    }

    /// Adds `extra` to every leaf; the wires must be unused by the channel.
    pub fn extend(&self, extra: &WireSet) -> Result<Channel, QcalgError> {
        let all = self.all_wires();
        let clash: Vec<VarName> = extra.intersection(&all).cloned().collect();
        if !clash.is_empty() {
            return Err(QcalgError::WireClash(clash));
        }
        Ok(self.extend_unchecked(extra))
    }

    fn extend_unchecked(&self, extra: &WireSet) -> Channel {
        match self {
            Channel::Eps(w) => Channel::Eps(w.union(extra).cloned().collect()),
            Channel::Gate(u, ws, r) => Channel::Gate(u.clone(), ws.clone(), Box::new(r.extend_unchecked(extra))),
            Channel::Init(b, w, r) => Channel::Init(*b, w.clone(), Box::new(r.extend_unchecked(extra))),
            Channel::Meas(w, a, b) => {
                Channel::Meas(w.clone(), Box::new(a.extend_unchecked(extra)), Box::new(b.extend_unchecked(extra)))
            }
            Channel::Free(w, r) => Channel::Free(w.clone(), Box::new(r.extend_unchecked(extra))),
        }
    }

    /// Renames wires everywhere; names missing from the map are kept.
    pub fn rename(&self, map: &BTreeMap<VarName, VarName>) -> Channel {
        let r = |w: &VarName| map.get(w).cloned().unwrap_or_else(|| w.clone());
        match self {
            Channel::Eps(ws) => Channel::Eps(ws.iter().map(r).collect()),
            Channel::Gate(u, ws, rest) => Channel::Gate(u.clone(), ws.iter().map(r).collect(), Box::new(rest.rename(map))),
            Channel::Init(b, w, rest) => Channel::Init(*b, r(w), Box::new(rest.rename(map))),
            Channel::Meas(w, a, b) => Channel::Meas(r(w), Box::new(a.rename(map)), Box::new(b.rename(map))),
            Channel::Free(w, rest) => Channel::Free(r(w), Box::new(rest.rename(map))),
        }
    }

    /// Number of constructors on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Channel::Eps(_) => 0,
            Channel::Gate(_, _, r) | Channel::Init(_, _, r) | Channel::Free(_, r) => 1 + r.depth(),
            Channel::Meas(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Channel::Eps(_) => 1,
            Channel::Gate(_, _, r) | Channel::Init(_, _, r) | Channel::Free(_, r) => r.leaf_count(),
            Channel::Meas(_, a, b) => a.leaf_count() + b.leaf_count(),
        }
    }
}

fn join(w: &WireSet) -> String {
    w.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(",")
}

pub const STANDARD_GATES: &[(&str, usize)] =
    &[("X", 1), ("Y", 1), ("Z", 1), ("H", 1), ("S", 1), ("T", 1), ("CNOT", 2), ("CZ", 2)];

pub fn standard_arity(g: &GateName) -> Option<usize> {
    STANDARD_GATES.iter().find(|(n, _)| *n == g.0).map(|&(_, a)| a)
}

pub const UNITARITY_TOL: f64 = 1e-12;

/// Computational basis state selected by the first (`tt`) branch of a
/// measurement; the second branch selects the other one.
pub const TRUE_BRANCH_BASIS: usize = 1;

/// Basis state selected by a measurement branch.
pub fn branch_basis(first_branch: bool) -> usize {
    if first_branch {
        TRUE_BRANCH_BASIS
    } else {
        1 - TRUE_BRANCH_BASIS
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate {0}")]
    UnknownGate(GateName),
    #[error("matrix for gate {0} is not a unitary on a whole number of qubits")]
    NotUnitary(GateName),
}

/// Gate interpretations as unitaries; the first listed wire is the most
/// significant qubit of the matrix.
#[derive(Clone, Debug)]
pub struct GateTable<T: Real> {
    gates: BTreeMap<GateName, (usize, CMatrix<T>)>,
}

impl<T: Real> GateTable<T> {
    pub fn empty() -> Self {
        GateTable { gates: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let z = (0.0, 0.0);
        let o = (1.0, 0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut t = Self::empty();
        let mut add = |n: &str, k: usize, m: &[(f64, f64)]| {
            let d = 1 << k;
            t.register(n, CMatrix::from_f64(d, d, m)).expect("standard gates are unitary");
        };
        add("X", 1, &[z, o, o, z]);
        add("Y", 1, &[z, (0.0, -1.0), (0.0, 1.0), z]);
        add("Z", 1, &[o, z, z, (-1.0, 0.0)]);
        add("H", 1, &[(r, 0.0), (r, 0.0), (r, 0.0), (-r, 0.0)]);
        add("S", 1, &[o, z, z, (0.0, 1.0)]);
        add("T", 1, &[o, z, z, (r, r)]);
        #[rustfmt::skip]
        add("CNOT", 2, &[o, z, z, z,  z, o, z, z,  z, z, z, o,  z, z, o, z]);
        #[rustfmt::skip]
        add("CZ", 2, &[o, z, z, z,  z, o, z, z,  z, z, o, z,  z, z, z, (-1.0, 0.0)]);
        t
    }

    /// Adds or replaces a gate; the matrix must be unitary.
    pub fn register(&mut self, name: &str, u: CMatrix<T>) -> Result<(), GateError> {
        let g = GateName::new(name);
        let Some(k) = crate::linalg::qubits_of_dim(u.rows()) else {
            return Err(GateError::NotUnitary(g));
        };
        if k == 0 || !u.is_unitary(T::lit(UNITARITY_TOL).max(T::epsilon() * T::lit(16.0))) {
            return Err(GateError::NotUnitary(g));
        }
        self.gates.insert(g, (k, u));
        Ok(())
    }

    pub fn arity(&self, g: &GateName) -> Option<usize> {
        self.gates.get(g).map(|(k, _)| *k)
    }

    pub fn unitary(&self, g: &GateName) -> Result<&CMatrix<T>, GateError> {
        self.gates.get(g).map(|(_, u)| u).ok_or_else(|| GateError::UnknownGate(g.clone()))
    }

    pub fn names(&self) -> impl Iterator<Item = (&GateName, usize)> {
        self.gates.iter().map(|(g, (k, _))| (g, *k))
    }
}

/// The phase gate matrix `diag(1, e^{iθ})`, handy for registering extra gates.
pub fn phase_gate<T: Real>(theta: f64) -> CMatrix<T> {
    let mut m = CMatrix::identity(2);
    m[(1, 1)] = c(theta.cos(), theta.sin());
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::wires;

    #[test]
    fn measurement_splits_outputs() {
        let q = Channel::meas("v_c", Channel::init(true, "v_d", Channel::free("v_c", Channel::eps(["v_d"]))), Channel::eps(["v_c"]));
        let out = q.validate(&wires(["v_c"])).unwrap();
        assert_eq!(out, Bunch::node(Bunch::Leaf(wires(["v_d"])), Bunch::Leaf(wires(["v_c"]))));
        assert_eq!(q.in_wires().unwrap(), wires(["v_c"]));
    }

    #[test]
    fn init_on_live_wire_is_rejected() {
        let q = Channel::init(true, "x", Channel::eps(["x"]));
        assert!(q.validate(&wires(["x"])).is_err());
        assert!(q.validate(&wires([])).is_ok());
    }

    #[test]
    fn meas_on_missing_wire_is_rejected() {
        let q = Channel::meas("y", Channel::eps(["x"]), Channel::eps(["x"]));
        assert!(matches!(q.validate(&wires(["x"])), Err(QcalgError::InvalidChannel(_))));
    }

    #[test]
    fn extend_rejects_clashes() {
        let q = Channel::free("x", Channel::eps([]));
        assert_eq!(q.extend(&wires(["x"])), Err(QcalgError::WireClash(vec![VarName::raw("x")])));
        assert_eq!(q.extend(&wires(["y"])).unwrap(), Channel::free("x", Channel::eps(["y"])));
    }

    #[test]
    fn gate_arity_checked() {
        let q = Channel::gate("CNOT", &["a"], Channel::eps(["a"]));
        assert!(q.validate(&wires(["a"])).is_err());
        let q = Channel::gate("CNOT", &["a", "a"], Channel::eps(["a"]));
        assert!(q.validate(&wires(["a"])).is_err());
    }

    #[test]
    fn registered_gate_must_be_unitary() {
        let mut t = GateTable::<f64>::standard();
        assert!(t.register("P", phase_gate(0.3)).is_ok());
        assert!(t.register("Bad", CMatrix::from_f64(2, 2, &[(1., 0.), (1., 0.), (0., 0.), (1., 0.)])).is_err());
    }
}
