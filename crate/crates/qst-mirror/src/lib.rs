//! Globally controlled quantum mirror architecture.
//!
//! Programs of global Hadamard and controlled-phase layers on impurity
//! chains, plus local pulses on addressable registers, are simulated exactly
//! with a stabilizer tableau. A dense state-vector simulator (up to
//! [`dense::DENSE_CAP`] qubits) serves as an independent oracle.

pub mod dense;
pub mod error;
pub mod lattice;
pub mod mirror;
pub mod program;
pub mod tableau;

pub use error::{MirrorError, Result};
pub use lattice::{directed_swap_programs, route, LatticeMap, RoutePlan};
pub use mirror::{mirror_program, propagated_swap};
pub use program::{clifford_apply, Layer, LocalGate, PulseProgram};
pub use tableau::{Pauli, PauliString, Tableau};
