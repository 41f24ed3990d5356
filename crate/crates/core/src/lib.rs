//! Shell-model configuration-interaction Hamiltonians, a dense state-vector
//! simulator with Trotterized real-time evolution, off-diagonal classical
//! shadows, real-time Krylov subspace diagonalization, and fixed-node Green's
//! function Monte Carlo with classical or quantum trial states.
//!
//! The intended flow:
//!
//! 1. [`shell_model`] parses an interaction file, enumerates an M-scheme
//!    configuration basis, and assembles the sparse many-body Hamiltonian.
//! 2. [`pauli`] maps the second-quantized Hamiltonian onto qubit Pauli
//!    operators (Jordan-Wigner or Bravyi-Kitaev).
//! 3. [`qsd`] builds a real-time Krylov subspace on the [`simulator`]
//!    backend, estimates the subspace matrices either exactly or through the
//!    ancilla-assisted shadow protocol in [`shadows`], and solves the
//!    regularized generalized eigenvalue problem for trial-state coefficients.
//! 4. [`fngfmc`] walks the sparse Hamiltonian under the fixed-node Green's
//!    function and evaluates mixed-estimator energies with the trial state.
//! 5. [`oracle`] provides independent brute-force ground truth for all of it.

pub mod error;
pub mod fngfmc;
pub mod linalg;
pub mod oracle;
pub mod pauli;
pub mod qsd;
pub mod shadows;
pub mod shell_model;
pub mod simulator;

pub use error::{Error, Result};

/// Magnitudes below this are treated as exact zeros when storing sparse
/// matrix elements or Pauli coefficients.
pub const PRUNE_EPS: f64 = 1e-12;
