//! Proto-Quipper-L: a circuit-description language with dynamic lifting.
//!
//! The crate covers the whole pipeline: parsing, linear type checking,
//! small-step reduction to branching quantum channels, density-matrix
//! simulation and the categorical (Kleisli) semantics used to check
//! soundness of the reduction.

pub mod arbitrary;
pub mod bunch;
pub mod denot;
pub mod eval;
pub mod interchange;
pub mod linalg;
pub mod qcalg;
pub mod scalar;
pub mod sim;
pub mod syntax;
pub mod typecheck;

pub use bunch::Bunch;
pub use scalar::Real;

// Double-precision instances of the scalar-generic types.
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type DensityMatrix64 = sim::DensityMatrix<f64>;
pub type GateTable64 = qcalg::GateTable<f64>;
pub type Superop64 = denot::Superop<f64>;
pub type MMorphism64 = denot::MMorphism<f64>;
pub type Branching64 = denot::Branching<f64>;
pub type Index64 = denot::Index<f64>;
pub type Denoter64 = denot::Denoter<f64>;
