//! Independent reference implementations used to check the main crate.
//!
//! Nothing here shares code paths with the implementation under test beyond
//! the data types and the simulator, which serves as the reference for the
//! categorical semantics.

pub mod declarative;
pub mod hand;
pub mod laws;
pub mod queries;
pub mod tomography;
pub mod verify;
