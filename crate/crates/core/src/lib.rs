//! Simulation of cavity-assisted, Faraday-rotation based controlled
//! teleportation of single-atom and two-atom states.
//!
//! * [`cavity`]: reflection coefficients of a single-atom cavity and the
//!   phases they imprint on a photon.
//! * [`qreg`]: labelled multi-subsystem state vectors, gates and projective
//!   measurement.
//! * [`optics`]: wave plates and the atomic Hadamard.
//! * [`notation`]: parser for ket expressions in a small LaTeX subset.
//! * [`protocol`]: protocol builders, execution, correction synthesis and
//!   table/equation verification.
//! * [`resources`]: loss budget and Monte Carlo event rates.

pub mod cavity;
pub mod notation;
pub mod optics;
pub mod protocol;
pub mod qreg;
pub mod resources;

pub use cavity::{CavityParams, FaradayPhases, PhasePolicy};
pub use optics::WavePlateKind;
pub use qreg::{
    Outcome, Pauli, PauliOp, QuantumRegister, SingleState, SubsystemKind, SubsystemLabel,
};
