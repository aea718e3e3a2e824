//! Categorical semantics: CP maps, the coproduct completion, the branching
//! monad, and the interpretation of channels, derivations and configurations.

mod channel;
mod cpmap;
mod marks;
mod monad;
mod object;
mod observe;
mod terms;

use thiserror::Error;

pub use channel::{channel_branching, denote_channel, leaf_of, output_object};
pub use cpmap::{BranchShape, MMorphism, Superop};
pub use marks::{MObject, Mark};
pub use monad::{agree_at, associator, bif, eta, fmap, left_unitor, merge, mu, strength, BbMorphism, Branching, Kleisli};
pub use object::{ChanPoint, Closure, Index, Object};
pub use observe::{
    describe, detour_comparison, equal_observable, insert_detours, is_observable_type, soundness_trace, Comparison, SoundnessReport,
    StepReport,
};
pub use terms::{box_iso, chan_to_kleisli, pattern_point, qubits_of, route, unbox_iso, Denoter, Env, Slot};

use crate::eval::EvalError;
use crate::qcalg::{GateError, QcalgError};
use crate::typecheck::TypeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DenotError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a state object")]
    NotStateObject,
    #[error("not observable: {0}")]
    NotObservableType(String),
    #[error("soundness violation at step {step}: deviation {deviation:e}")]
    SoundnessViolation { step: usize, deviation: f64 },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Channel(#[from] QcalgError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
