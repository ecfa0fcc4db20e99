//! The photon-extended Casida problem in the photon random-phase approximation.
//!
//! Excitation energies are the square roots of the eigenvalues of the
//! symmetric matrix
//!
//! ```text
//! ┌ U   V ┐
//! └ Vᵀ  D ┘
//! ```
//!
//! where `U` is the n×n electronic block and `V` the n×M light–matter
//! coupling, with `D = diag(ω_α²)`. Small problems go through a dense
//! symmetric eigensolve; windows of very large mode ensembles use the
//! structured solver. The unreduced non-Hermitian problem is kept as a
//! cross-check.

mod assemble;
mod dense;
mod reference;
mod structured;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::types::{Excitation, PhotonMode, Transition};

pub use assemble::{assemble_blocks, kernel_matrix};
pub use dense::{solve_dense, DENSE_LIMIT};
pub use reference::{solve_nonhermitian_reference, REFERENCE_LIMIT};
pub use structured::{
    count_below, solve_structured, solve_structured_with, PhotonVectors, StructuredOptions,
};

#[derive(Debug, Error, PartialEq)]
pub enum CasidaError {
    #[error("system has no transitions")]
    NoTransitions,
    #[error("k_elec is {rows}×{cols}, expected {n}×{n}")]
    KernelShape { rows: usize, cols: usize, n: usize },
    #[error("k_elec is not symmetric at ({i}, {j})")]
    KernelNotSymmetric { i: usize, j: usize },
    #[error("k_elec contains a non-finite entry")]
    KernelNotFinite,
    #[error("dense solve of size {size} exceeds the limit of {limit}; use solve_structured with a window")]
    DenseTooLarge { size: usize, limit: usize },
    #[error("reference solve of size {size} exceeds the limit of {limit}")]
    ReferenceTooLarge { size: usize, limit: usize },
    #[error("invalid window ({lo}, {hi}): need 0 <= lo < hi, both finite")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("eigensolver failed to converge")]
    Eigensolver,
    #[error("root isolation failed near Ω² = {mu:e}")]
    RootIsolation { mu: f64 },
}

/// One coupled problem: transitions and modes plus an optional electronic kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSystem {
    pub transitions: Vec<Transition>,
    pub modes: Vec<PhotonMode>,
    /// Electronic Hartree-exchange-correlation coupling `K^elec`, n×n.
    pub k_elec: Option<DMatrix<f64>>,
    /// Adds the dipole self-energy `Σ_α (λ_α·d_q)(λ_α·d_q')` to the kernel.
    pub include_self_energy: bool,
}

impl CoupledSystem {
    pub fn new(transitions: Vec<Transition>, modes: Vec<PhotonMode>) -> Self {
        Self {
            transitions,
            modes,
            k_elec: None,
            include_self_energy: false,
        }
    }

    pub fn with_k_elec(mut self, k: DMatrix<f64>) -> Self {
        self.k_elec = Some(k);
        self
    }

    pub fn with_self_energy(mut self, on: bool) -> Self {
        self.include_self_energy = on;
        self
    }

    pub fn n(&self) -> usize {
        self.transitions.len()
    }

    pub fn m(&self) -> usize {
        self.modes.len()
    }
}

/// Assembled matrix blocks, photon poles sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBlocks {
    /// `U_qq' = δ_qq' ω_q² + 2√(ω_q ω_q') K_qq'`.
    pub u: DMatrix<f64>,
    /// `V_qα = √2 √ω_q ω_α (λ_α·d_q)`, columns in sorted pole order.
    pub v: DMatrix<f64>,
    /// `ω_α²`, ascending.
    pub d: Vec<f64>,
    /// `ω_α` in the same order as `d`.
    pub mode_omega: Vec<f64>,
    /// `order[k]` is the index in `CoupledSystem::modes` of sorted pole `k`.
    pub order: Vec<usize>,
}

impl CoupledBlocks {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    /// Maps a photon vector from sorted pole order back to the system's mode order.
    pub(crate) fn unsort(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (k, &x) in sorted.iter().enumerate() {
            out[self.order[k]] = x;
        }
        out
    }

    /// The full symmetric matrix `[[U, V], [Vᵀ, D]]`.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut a = DMatrix::zeros(n + m, n + m);
        a.view_mut((0, 0), (n, n)).copy_from(&self.u);
        a.view_mut((0, n), (n, m)).copy_from(&self.v);
        a.view_mut((n, 0), (m, n)).copy_from(&self.v.transpose());
        for (k, &d) in self.d.iter().enumerate() {
            a[(n + k, n + k)] = d;
        }
        a
    }
}

/// Solver output. `window` is `None` when every eigenpair is present.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub excitations: Vec<Excitation>,
    pub window: Option<(f64, f64)>,
}

impl Solution {
    pub fn is_complete(&self) -> bool {
        self.window.is_none()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.excitations.iter().map(|e| e.omega).collect()
    }
}

/// Electronic and photonic weight of a normalized eigenvector.
///
/// Falls back to the stored `sigma_p` when photon components were not kept.
pub fn excitation_character(exc: &Excitation) -> (f64, f64) {
    let e: f64 = exc.evec_e.iter().map(|x| x * x).sum();
    if exc.evec_p.is_empty() && exc.sigma_p > 0.0 {
        return (e, exc.sigma_p);
    }
    let p: f64 = exc.evec_p.iter().map(|x| x * x).sum();
    (e, p)
}

pub(crate) fn sort_excitations(list: &mut [Excitation]) {
    list.sort_by(|a, b| a.omega_sq.total_cmp(&b.omega_sq));
}
