//! Small-step reduction of configurations `(Q, m)`.

mod step;
mod subst;

pub use step::{run_to_value, step_config, trace, Schedule, StepOutcome, StepRule, Stepper, Trace, TraceStep};
pub use subst::{bind_pattern, fresh_pattern, rename_free, substitute, Substitution};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bunch::Bunch;
use crate::qcalg::{Channel, QcalgError};
use crate::syntax::{BranchingTerm, Term, VarName, WireSet};

/// A channel paired with a branching term whose leaves match its outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub channel: Channel,
    pub term: BranchingTerm,
}

impl Configuration {
    pub fn new(channel: Channel, term: BranchingTerm) -> Self {
        Configuration { channel, term }
    }

    /// `(ε(W), M)` for a program term over the wires `W`.
    pub fn initial(inputs: WireSet, term: Term) -> Self {
        Configuration { channel: Channel::Eps(inputs), term: Bunch::Leaf(term) }
    }

    pub fn is_value(&self) -> bool {
        crate::syntax::is_branching_value(&self.term)
    }

    /// Renames every wire introduced by `init` to a name fixed by its depth
    /// on the path, so configurations that differ only in the choice of
    /// fresh wires become equal.
    pub fn canonical(&self) -> Configuration {
        fn go(q: &Channel, m: &BranchingTerm, ren: &BTreeMap<VarName, VarName>, depth: usize) -> (Channel, BranchingTerm) {
            let r = |w: &VarName| ren.get(w).cloned().unwrap_or_else(|| w.clone());
            match (q, m) {
                (Channel::Eps(ws), Bunch::Leaf(t)) => (Channel::Eps(ws.iter().map(r).collect()), Bunch::Leaf(rename_free(t, ren))),
                (Channel::Gate(g, ws, rest), _) => {
                    let (q2, m2) = go(rest, m, ren, depth);
                    (Channel::Gate(g.clone(), ws.iter().map(r).collect(), Box::new(q2)), m2)
                }
                (Channel::Free(w, rest), _) => {
                    let (q2, m2) = go(rest, m, ren, depth);
                    (Channel::Free(r(w), Box::new(q2)), m2)
                }
                (Channel::Init(b, w, rest), _) => {
                    let fresh = VarName::raw(&format!("%{depth}"));
                    let mut ren2 = ren.clone();
                    ren2.insert(w.clone(), fresh.clone());
                    let (q2, m2) = go(rest, m, &ren2, depth + 1);
                    (Channel::Init(*b, fresh, Box::new(q2)), m2)
                }
                (Channel::Meas(w, a, b), Bunch::Node(ma, mb)) => {
                    let (qa, na) = go(a, ma, ren, depth);
                    let (qb, nb) = go(b, mb, ren, depth);
                    (Channel::Meas(r(w), Box::new(qa), Box::new(qb)), Bunch::node(na, nb))
                }
                _ => (q.clone(), m.clone()),
            }
        }
        let (channel, term) = go(&self.channel, &self.term, &BTreeMap::new(), 0);
        Configuration { channel, term }
    }

    /// Equality up to the names of wires introduced by `init`.
    pub fn alpha_eq(&self, other: &Configuration) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn all_names(&self) -> BTreeSet<VarName> {
        let mut out = self.channel.all_wires();
        for t in self.term.leaves() {
            t.all_names(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("stuck: {0}")]
    StuckTerm(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("wire clash on {0:?}")]
    WireClash(Vec<VarName>),
    #[error("no value reached within {0} steps")]
    OutOfFuel(usize),
    #[error(transparent)]
    Channel(#[from] QcalgError),
}

/// Generates wire and variable names that do not occur in a set of taken names.
#[derive(Clone, Debug)]
pub struct FreshNameGen {
    prefix: String,
    counter: u64,
    taken: BTreeSet<VarName>,
}

impl FreshNameGen {
    pub fn new(prefix: &str) -> Self {
        Self::with_counter(prefix, 0)
    }

    pub fn with_counter(prefix: &str, counter: u64) -> Self {
        FreshNameGen { prefix: prefix.to_string(), counter, taken: BTreeSet::new() }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn reserve(&mut self, names: impl IntoIterator<Item = VarName>) {
        self.taken.extend(names);
    }

    pub fn fresh(&mut self) -> VarName {
        loop {
            let v = VarName::raw(&format!("{}{}", self.prefix, self.counter));
            self.counter += 1;
            if self.taken.insert(v.clone()) {
                return v;
            }
        }
    }
}

impl Default for FreshNameGen {
    fn default() -> Self {
        Self::new("w")
    }
}
