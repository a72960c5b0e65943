//! Exact per-configuration Ramsey dynamics of the Rydberg Ising model.
//!
//! The Hamiltonian H = Σ_{j<k} V_jk n_j n_k (up to a constant) is diagonal
//! in the z basis, so one-point functions factorise over neighbours and
//! zero-dissipation two-point functions factorise over third atoms.

mod configuration;
mod correlation;
pub mod kernel;
mod observables;
mod protocol;

pub use configuration::{AtomConfiguration, CouplingMatrix};
pub use correlation::{connected_sxsx, sx_sx, two_point, TwoPoint};
pub use kernel::{decay_prefactor, f_kernel, Kernel, KernelMode, SELF_DECAY_COEFFICIENT};
pub use observables::{
    contrast_phase, sigma_plus_config, sigma_plus_site, trace, ContrastPhase, ContrastTrace, Normalization,
    ScaledProduct,
};
pub use protocol::{EchoModel, RamseyProtocol};
