//! Many-body Ramsey dynamics of Rydberg-dressed Ising spins.

pub mod config;
pub mod error;
pub mod experiments;
pub mod gas;
pub mod ising;
pub mod lattice;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
