//! Numerical core for eigenmode-mediated quantum state transfer.
//!
//! The crate is organised around the single-particle picture of a
//! register–chain–register bus:
//!
//! - [`chain`] builds coupling patterns, disorder realizations, the
//!   single-particle hopping matrix `K` and the BdG matrix `A` of the
//!   transverse-field Ising chain.
//! - [`dynamics`] diagonalizes those matrices, forms propagators
//!   `M = exp(-iKt)`, picks the resonant transfer mode and checks the
//!   three-mode reduction of the Ising chain.
//! - [`fidelity`] turns matrix elements of `M` into closed-form channel
//!   fidelities, the off-resonant/decoherence error budget and weak-coupling
//!   perturbative estimates.
//! - [`ed`] is an exact many-body engine (magnetization-blocked XX
//!   Hamiltonians with arbitrary-range couplings) that evaluates channel
//!   fidelities by brute force. It is both a benchmark for long-range models
//!   and the oracle for every analytic formula.
//!
//! Energies are in units of the bare chain coupling `κ` and times in units of
//! `1/κ` throughout; physical units only appear in [`chain::Units`].
//!
//! Spin conventions: `|↑⟩` is the occupied (excited) state, `σ⁺ = |↑⟩⟨↓|`,
//! and the Jordan–Wigner string attached to site `l` is `e^{iπ n_l} = -σᶻ_l`.

pub mod chain;
pub mod dynamics;
pub mod ed;
pub mod error;
pub mod fidelity;

pub use error::{QstError, Result};

pub use num_complex::Complex64 as C64;
