//! Valence-space shell-model machinery: orbitals, the interaction-file
//! parser, M-scheme configuration bases, and assembly of the second-quantized
//! Hamiltonian with angular-momentum/isospin-coupled two-body terms.

mod basis;
mod cg;
mod hamiltonian;
mod interaction;
mod orbital;

pub use basis::{enumerate_basis, BasisConstraints, ConfigurationBasis};
pub use cg::clebsch_gordan;
pub use hamiltonian::{
    build_hamiltonian, fermion_monomials, SparseHamiltonian, TbmeConvention,
};
pub use interaction::{parse_interaction_file, parse_interaction_str, InteractionData, Tbme};
pub use orbital::{IsospinConvention, Orbital, SingleParticleSpace, SingleParticleState, Species};
