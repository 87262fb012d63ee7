//! Simulation of a three-stage entanglement-swapping repeater: two optomechanical
//! stages acting on atoms (2,3) and (6,7), followed by an optical-cavity stage on
//! atoms (4,5) that leaves the outer pair (1,8) entangled.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod models;
pub mod protocol;

pub use error::{Error, Result};
pub use hilbert::{
    AtomLevel, BasisState, Mode, OperatorMatrix, SpaceDescriptor, StateVector, Subsystem, C64,
};
pub use models::{AtomMap, ModelParams};
