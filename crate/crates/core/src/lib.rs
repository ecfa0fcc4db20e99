//! Linear-response spectra of electronic transitions coupled to quantized
//! photon modes.
//!
//! The crate solves the photon-extended Casida problem in the photon
//! random-phase approximation and derives strengths and spectra from its
//! eigenpairs. The exact Rabi model and Wigner–Weisskopf rates serve as
//! benchmarks. All internal quantities are in Hartree atomic units; see
//! [`units`].

pub mod casida;
pub mod cavity;
mod linalg;
pub mod rabi;
pub mod spectra;
pub mod types;
pub mod units;

pub use casida::{
    assemble_blocks, count_below, excitation_character, solve_dense,
    solve_nonhermitian_reference, solve_structured, CasidaError, CoupledBlocks, CoupledSystem,
    Solution,
};
pub use types::{Excitation, PhotonMode, Spectrum, SpectrumKind, Transition, Vec3};
