//! Linear type checking with explicit derivation trees.
//!
//! The checker is bidirectional: types are pushed into lambdas, pairs,
//! conditionals and constants, and synthesized for variables,
//! applications and channel constants. Dereliction is inserted where a
//! `!A` is used at `A`, and promotion where a closed-over-linear value is
//! expected at `!A`. Linearity is checked by tracking which bindings each
//! subterm consumes.

mod algorithm;
mod derivation;

pub use algorithm::{check_branching, check_configuration, check_term, check_vbind, infer_term, infer_types};
pub use derivation::{ConfigDerivation, Derivation, Rule};

use thiserror::Error;

use crate::bunch::Bunch;
use crate::qcalg::QcalgError;
use crate::syntax::{TypeExpr, VarName};

/// A typing context as an ordered list of bindings; variables whose type is
/// `!A` or `QChan(P, A)` are the nonlinear part.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    pub bindings: Vec<(VarName, TypeExpr)>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(bindings: impl IntoIterator<Item = (VarName, TypeExpr)>) -> Self {
        Context { bindings: bindings.into_iter().collect() }
    }

    pub fn qubits<'a>(names: impl IntoIterator<Item = &'a VarName>) -> Self {
        Self::from_pairs(names.into_iter().map(|n| (n.clone(), TypeExpr::Qubit)))
    }

    pub fn with(mut self, x: &str, t: TypeExpr) -> Self {
        self.bindings.push((VarName::raw(x), t));
        self
    }

    pub fn nonlinear(&self) -> impl Iterator<Item = &(VarName, TypeExpr)> {
        self.bindings.iter().filter(|(_, t)| t.is_nonlinear())
    }

    pub fn linear(&self) -> impl Iterator<Item = &(VarName, TypeExpr)> {
        self.bindings.iter().filter(|(_, t)| !t.is_nonlinear())
    }
}

/// Contexts for the leaves of a branching term.
pub type BranchingContext = Bunch<Context>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("linear variable `{var}` used {uses} times")]
    LinearityError { var: VarName, uses: usize },
    #[error("type mismatch in `{term}`: expected {expected}, found {found}")]
    TypeMismatch { term: String, expected: String, found: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(VarName),
    #[error("`{0}` is not a value and cannot be promoted")]
    NonValuePromotion(String),
    #[error("promoted value `{term}` uses linear variable `{var}`")]
    LinearInPromotion { term: String, var: VarName },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pattern variable `{0}` occurs twice")]
    DuplicatePatternVariable(VarName),
    #[error("cannot infer a type for `{0}`; add a type annotation or a surrounding box")]
    CannotInfer(String),
    #[error(transparent)]
    InvalidChannel(#[from] QcalgError),
}
