//! Brute-force master-equation dynamics for up to eight spins.
//!
//! The Ising Hamiltonians are diagonal in the z basis, so dissipation-free
//! dark times are exact elementwise phases. With emission or dephasing the
//! Lindbladian is propagated by a Taylor series in steps of at most one
//! inverse norm bound, truncated once terms fall below 1e-17 of the state.

mod dynamics;
mod state;

pub use dynamics::{
    build_hamiltonian, echo_equivalence_check, evolve_master, oracle_sigma_plus, Axis, DiagonalHamiltonian,
    EchoCheck, HamiltonianKind, PulseSequence, Rates, Step,
};
pub use state::{expectation, DensityMatrix, Observable, Pauli, Physicality, MAX_SPINS};
