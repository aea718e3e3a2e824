//! Density-matrix simulation of channels and programs.

use thiserror::Error;

use crate::eval::{run_to_value, Configuration, EvalError, Stepper};
use crate::linalg::{c, CMatrix, C};
use crate::qcalg::{branch_basis, Channel, GateError, GateTable, QcalgError};
use crate::scalar::Real;
use crate::syntax::{Term, VarName, WireSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("state wires {found:?} do not match channel inputs {expected:?}")]
    WireMismatch { expected: Vec<VarName>, found: Vec<VarName> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Channel(#[from] QcalgError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A (possibly unnormalized) density matrix; `wires[0]` is the most
/// significant qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    pub wires: Vec<VarName>,
    pub rho: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(wires: Vec<VarName>, rho: CMatrix<T>) -> Result<Self, SimError> {
        let d = 1usize << wires.len();
        if rho.rows() != d || rho.cols() != d {
            return Err(SimError::DimensionMismatch(format!("{} wires need a {d}x{d} matrix", wires.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        if !wires.iter().all(|w| seen.insert(w.clone())) {
            return Err(SimError::NotAState("repeated wire".into()));
        }
        Ok(DensityMatrix { wires, rho })
    }

    pub fn scalar(p: T) -> Self {
        let mut rho = CMatrix::identity(1);
        rho[(0, 0)] = C::new(p, T::zero());
        DensityMatrix { wires: vec![], rho }
    }

    pub fn basis(w: &str, b: usize) -> Self {
        DensityMatrix { wires: vec![VarName::raw(w)], rho: ket_bra(b) }
    }

    /// Single-qubit state `|+>` (`plus = true`) or `|->`.
    pub fn hadamard_basis(w: &str, plus: bool) -> Self {
        let s = if plus { 0.5 } else { -0.5 };
        let rho = CMatrix::from_f64(2, 2, &[(0.5, 0.0), (s, 0.0), (s, 0.0), (0.5, 0.0)]);
        DensityMatrix { wires: vec![VarName::raw(w)], rho }
    }

    pub fn qubits(&self) -> usize {
        self.wires.len()
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        if t == T::zero() {
            return self.clone();
        }
        DensityMatrix { wires: self.wires.clone(), rho: self.rho.scale(C::new(T::one() / t, T::zero())) }
    }

    fn pos(&self, w: &VarName) -> Result<usize, SimError> {
        self.wires.iter().position(|x| x == w).ok_or_else(|| SimError::DimensionMismatch(format!("no wire {w} in the state")))
    }

    /// `self ⊗ other`, with the wires of `other` after those of `self`.
    pub fn tensor(&self, other: &Self) -> Result<Self, SimError> {
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().cloned());
        Self::new(wires, self.rho.kron(&other.rho))
    }

    pub fn apply_unitary(&self, u: &CMatrix<T>, targets: &[VarName]) -> Result<Self, SimError> {
        let pos: Vec<usize> = targets.iter().map(|w| self.pos(w)).collect::<Result<_, _>>()?;
        if u.rows() != 1 << pos.len() {
            return Err(SimError::DimensionMismatch(format!("gate on {} wires has dimension {}", pos.len(), u.rows())));
        }
        let full = embed(u, &pos, self.qubits());
        Ok(DensityMatrix { wires: self.wires.clone(), rho: full.mul(&self.rho).mul(&full.adjoint()) })
    }

    /// Appends a fresh wire in basis state `b`.
    pub fn append(&self, w: &VarName, b: usize) -> Result<Self, SimError> {
        if self.wires.contains(w) {
            return Err(SimError::DimensionMismatch(format!("wire {w} already present")));
        }
        self.tensor(&DensityMatrix { wires: vec![w.clone()], rho: ket_bra(b) })
    }

    /// `P ρ P` for the projector onto basis state `b` of wire `w`.
    pub fn project(&self, w: &VarName, b: usize) -> Result<Self, SimError> {
        let k = self.pos(w)?;
        let n = self.qubits();
        let bit = |i: usize| (i >> (n - 1 - k)) & 1;
        let rho = CMatrix::from_fn(self.rho.rows(), self.rho.cols(), |r, col| {
            if bit(r) == b && bit(col) == b {
                self.rho[(r, col)]
            } else {
                C::new(T::zero(), T::zero())
            }
        });
        Ok(DensityMatrix { wires: self.wires.clone(), rho })
    }

    pub fn partial_trace(&self, w: &VarName) -> Result<Self, SimError> {
        let k = self.pos(w)?;
        let n = self.qubits();
        let d = 1usize << (n - 1);
        let insert = |i: usize, bit: usize| {
            let low = n - 1 - k;
            let hi = i >> low;
            let lo = i & ((1 << low) - 1);
            (hi << (low + 1)) | (bit << low) | lo
        };
        let rho = CMatrix::from_fn(d, d, |r, col| self.rho[(insert(r, 0), insert(col, 0))] + self.rho[(insert(r, 1), insert(col, 1))]);
        let mut wires = self.wires.clone();
        wires.remove(k);
        Ok(DensityMatrix { wires, rho })
    }

    /// The same state with wires listed in `order`.
    pub fn reorder(&self, order: &[VarName]) -> Result<Self, SimError> {
        if order.len() != self.qubits() {
            return Err(SimError::DimensionMismatch("reorder needs every wire".into()));
        }
        let pos: Vec<usize> = order.iter().map(|w| self.pos(w)).collect::<Result<_, _>>()?;
        let n = self.qubits();
        let map = |i: usize| {
            let mut j = 0;
            for (new_k, &old_k) in pos.iter().enumerate() {
                let b = (i >> (n - 1 - new_k)) & 1;
                j |= b << (n - 1 - old_k);
            }
            j
        };
        let d = 1 << n;
        let rho = CMatrix::from_fn(d, d, |r, col| self.rho[(map(r), map(col))]);
        Ok(DensityMatrix { wires: order.to_vec(), rho })
    }

    pub fn sorted(&self) -> Self {
        let mut order = self.wires.clone();
        order.sort();
        self.reorder(&order).expect("sorting keeps the wire set")
    }

    pub fn is_psd(&self, tol: T) -> bool {
        self.rho.is_psd(tol)
    }
}

pub fn ket_bra<T: Real>(b: usize) -> CMatrix<T> {
    let mut m = CMatrix::zeros(2, 2);
    m[(b, b)] = c(1.0, 0.0);
    m
}

/// Lifts a gate on the qubits at `pos` to the full `n`-qubit space.
pub fn embed<T: Real>(u: &CMatrix<T>, pos: &[usize], n: usize) -> CMatrix<T> {
    let d = 1usize << n;
    let sub = |i: usize| pos.iter().fold(0, |acc, &p| (acc << 1) | ((i >> (n - 1 - p)) & 1));
    let mask: usize = pos.iter().map(|&p| 1usize << (n - 1 - p)).sum();
    CMatrix::from_fn(d, d, |r, col| {
        if r & !mask != col & !mask {
            return C::new(T::zero(), T::zero());
        }
        u[(sub(r), sub(col))]
    })
}

/// One leaf of a simulated channel with its unnormalized output state.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafOutcome<T: Real> {
    /// Measurement branches taken, `true` for the first branch.
    pub path: Vec<bool>,
    pub state: DensityMatrix<T>,
}

impl<T: Real> LeafOutcome<T> {
    pub fn probability(&self) -> T {
        self.state.trace()
    }
}

/// Runs a channel on a state over exactly its input wires.
pub fn apply_channel<T: Real>(q: &Channel, input: &DensityMatrix<T>, gates: &GateTable<T>) -> Result<Vec<LeafOutcome<T>>, SimError> {
    let expected = q.in_wires()?;
    let found: WireSet = input.wires.iter().cloned().collect();
    if found != expected || found.len() != input.wires.len() {
        return Err(SimError::WireMismatch { expected: expected.into_iter().collect(), found: input.wires.clone() });
    }
    q.validate_with(&expected, &|g| gates.arity(g))?;
    let mut out = Vec::new();
    run(q, input.clone(), &mut Vec::new(), gates, &mut out)?;
    Ok(out)
}

fn run<T: Real>(
    q: &Channel,
    rho: DensityMatrix<T>,
    path: &mut Vec<bool>,
    gates: &GateTable<T>,
    out: &mut Vec<LeafOutcome<T>>,
) -> Result<(), SimError> {
    match q {
        Channel::Eps(_) => {
            out.push(LeafOutcome { path: path.clone(), state: rho });
            Ok(())
        }
        Channel::Gate(u, ws, rest) => run(rest, rho.apply_unitary(gates.unitary(u)?, ws)?, path, gates, out),
        Channel::Init(b, w, rest) => run(rest, rho.append(w, *b as usize)?, path, gates, out),
        Channel::Free(w, rest) => run(rest, rho.partial_trace(w)?, path, gates, out),
        Channel::Meas(w, a, b) => {
            path.push(true);
            run(a, rho.project(w, branch_basis(true))?, path, gates, out)?;
            path.pop();
            path.push(false);
            run(b, rho.project(w, branch_basis(false))?, path, gates, out)?;
            path.pop();
            Ok(())
        }
    }
}

/// Final value of one branch of a program run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramOutcome<T: Real> {
    pub value: Term,
    pub path: Vec<bool>,
    pub state: DensityMatrix<T>,
}

impl<T: Real> ProgramOutcome<T> {
    pub fn probability(&self) -> T {
        self.state.trace()
    }
}

/// Reduces a program over the wires of `input` and simulates the resulting channel.
pub fn run_program<T: Real>(
    t: &Term,
    input: &DensityMatrix<T>,
    fuel: usize,
    st: &mut Stepper,
    gates: &GateTable<T>,
) -> Result<(Configuration, Vec<ProgramOutcome<T>>), SimError> {
    let c = Configuration::initial(input.wires.iter().cloned().collect(), t.clone());
    let (fin, _) = run_to_value(&c, fuel, st)?;
    let leaves = apply_channel(&fin.channel, input, gates)?;
    let values = fin.term.leaves();
    if values.len() != leaves.len() {
        return Err(SimError::DimensionMismatch("channel leaves do not match the branching value".into()));
    }
    let outcomes = leaves
        .into_iter()
        .zip(values)
        .map(|(l, v)| ProgramOutcome { value: v.clone(), path: l.path, state: l.state })
        .collect();
    Ok((fin, outcomes))
}
