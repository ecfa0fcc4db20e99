//! The extended Rabi model: one two-level emitter coupled to one mode.
//!
//! `H = (ω₀/2)σ_z + ω_c a†a + λ σ_x q̂` with `q̂ = (a + a†)/√(2ω_c)`. Exact
//! diagonalization in a truncated Fock basis is the oracle for the mean-field
//! (pRPA) and rotating-wave closed forms. Parameters are in whatever energy
//! unit the caller picks, as long as it is used consistently.

use nalgebra::{DMatrix, Matrix2, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::casida::CoupledSystem;
use crate::linalg::sym_eigen;
use crate::types::{PhotonMode, Spectrum, SpectrumKind, Transition};
use crate::units::C_AU;

pub const DEFAULT_N_FOCK: usize = 40;
/// Largest truncation the doubling loop will try.
pub const MAX_N_FOCK: usize = 1280;
/// Ground-state occupation of the top Fock state accepted as converged.
pub const FOCK_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_ETA: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum RabiError {
    #[error("{0} must be positive and finite")]
    InvalidParameter(&'static str),
    #[error("lambda must be finite")]
    InvalidCoupling,
    #[error("n_fock must be at least 2, got {0}")]
    FockTooSmall(usize),
    #[error("Fock basis not converged at n_fock = {n_fock} (top-state occupation {occupation:e})")]
    NotConverged { n_fock: usize, occupation: f64 },
    #[error("overcritical coupling: lower pRPA eigenvalue Ω² = {omega_sq:e} is negative")]
    Unstable { omega_sq: f64 },
    #[error("eigensolver failed to converge")]
    Eigensolver,
    #[error("eta must be positive, got {0}")]
    InvalidEta(f64),
    #[error(transparent)]
    Domain(#[from] crate::types::DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams {
    pub omega0: f64,
    pub omegac: f64,
    pub lambda: f64,
    pub n_fock: usize,
}

impl RabiParams {
    pub fn new(omega0: f64, omegac: f64, lambda: f64) -> Self {
        Self {
            omega0,
            omegac,
            lambda,
            n_fock: DEFAULT_N_FOCK,
        }
    }

    pub fn with_n_fock(self, n_fock: usize) -> Self {
        Self { n_fock, ..self }
    }

    pub fn validate(&self) -> Result<(), RabiError> {
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(RabiError::InvalidParameter("omega0"));
        }
        if !(self.omegac.is_finite() && self.omegac > 0.0) {
            return Err(RabiError::InvalidParameter("omegac"));
        }
        if !self.lambda.is_finite() {
            return Err(RabiError::InvalidCoupling);
        }
        if self.n_fock < 2 {
            return Err(RabiError::FockTooSmall(self.n_fock));
        }
        Ok(())
    }

    /// Coupling in the rotating-wave form, λ′ = λ/√(2ω_c).
    pub fn lambda_prime(&self) -> f64 {
        self.lambda / (2.0 * self.omegac).sqrt()
    }

    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omegac
    }
}

/// Basis index of `|s⟩ ⊗ |m⟩`, with `s = 0` for `|g⟩` and `s = 1` for `|e⟩`.
#[inline]
fn idx(n_fock: usize, s: usize, m: usize) -> usize {
    s * n_fock + m
}

pub fn build_hamiltonian(params: &RabiParams) -> Result<DMatrix<f64>, RabiError> {
    params.validate()?;
    let n = params.n_fock;
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for m in 0..n {
        let photons = params.omegac * m as f64;
        h[(idx(n, 0, m), idx(n, 0, m))] = -0.5 * params.omega0 + photons;
        h[(idx(n, 1, m), idx(n, 1, m))] = 0.5 * params.omega0 + photons;
    }
    let q_scale = params.lambda / (2.0 * params.omegac).sqrt();
    for m in 0..n - 1 {
        let x = q_scale * ((m + 1) as f64).sqrt();
        for s in 0..2 {
            let i = idx(n, s, m);
            let j = idx(n, 1 - s, m + 1);
            h[(i, j)] = x;
            h[(j, i)] = x;
        }
    }
    Ok(h)
}

/// Spectrum and eigenstates of a converged truncation.
#[derive(Debug, Clone)]
pub struct RabiEigen {
    /// Parameters with the truncation actually used.
    pub params: RabiParams,
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, ordered like `energies`.
    pub states: DMatrix<f64>,
    /// Ground-state weight on the highest Fock state.
    pub top_occupation: f64,
}

fn top_occupation(n: usize, ground: &[f64]) -> f64 {
    ground[idx(n, 0, n - 1)].powi(2) + ground[idx(n, 1, n - 1)].powi(2)
}

/// Diagonalizes once at the given truncation, without the convergence check.
pub fn diagonalize_fixed(params: &RabiParams) -> Result<RabiEigen, RabiError> {
    let h = build_hamiltonian(params)?;
    let (energies, states) = sym_eigen(&h).ok_or(RabiError::Eigensolver)?;
    let ground: Vec<f64> = states.column(0).iter().copied().collect();
    Ok(RabiEigen {
        params: *params,
        top_occupation: top_occupation(params.n_fock, &ground),
        energies,
        states,
    })
}

/// Diagonalizes, doubling `n_fock` until the top Fock state is unoccupied.
pub fn diagonalize(params: &RabiParams) -> Result<RabiEigen, RabiError> {
    params.validate()?;
    let mut p = *params;
    loop {
        let eig = diagonalize_fixed(&p)?;
        if eig.top_occupation < FOCK_TOLERANCE {
            return Ok(eig);
        }
        if p.n_fock * 2 > MAX_N_FOCK {
            return Err(RabiError::NotConverged {
                n_fock: p.n_fock,
                occupation: eig.top_occupation,
            });
        }
        p.n_fock *= 2;
    }
}

impl RabiEigen {
    /// Excitation energies `E_k − E₀`, k ≥ 1.
    pub fn gaps(&self) -> Vec<f64> {
        let e0 = self.energies[0];
        self.energies[1..].iter().map(|e| e - e0).collect()
    }

    /// `⟨0|σ_x|k⟩` for every eigenstate k.
    pub fn sigma_x_elements(&self) -> Vec<f64> {
        let n = self.params.n_fock;
        let g = self.states.column(0);
        (0..self.energies.len())
            .map(|k| {
                let v = self.states.column(k);
                (0..n)
                    .map(|m| g[idx(n, 0, m)] * v[idx(n, 1, m)] + g[idx(n, 1, m)] * v[idx(n, 0, m)])
                    .sum()
            })
            .collect()
    }

    /// `⟨0|q̂|k⟩` for every eigenstate k.
    pub fn q_elements(&self) -> Vec<f64> {
        let n = self.params.n_fock;
        let scale = 1.0 / (2.0 * self.params.omegac).sqrt();
        let g = self.states.column(0);
        (0..self.energies.len())
            .map(|k| {
                let v = self.states.column(k);
                let mut acc = 0.0;
                for s in 0..2 {
                    for m in 0..n - 1 {
                        let r = ((m + 1) as f64).sqrt();
                        acc += r
                            * (g[idx(n, s, m)] * v[idx(n, s, m + 1)]
                                + g[idx(n, s, m + 1)] * v[idx(n, s, m)]);
                    }
                }
                scale * acc
            })
            .collect()
    }

    /// Ground-state expectation `⟨σ_x⟩`.
    pub fn sigma_x_expectation(&self) -> f64 {
        self.sigma_x_elements()[0]
    }
}

/// Operator pair of a response function, named `<perturbation><observable>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResponsePair {
    /// Dipole response to a dipole perturbation, χ^{σx}_{σx}.
    SigmaSigma,
    /// Field response to a current perturbation, χ^{q}_{q}.
    QQ,
    /// Field response to a dipole perturbation, χ^{q}_{σx}.
    SigmaQ,
    /// Dipole response to a current perturbation, χ^{σx}_{q}.
    QSigma,
}

impl ResponsePair {
    pub const ALL: [ResponsePair; 4] = [
        ResponsePair::SigmaSigma,
        ResponsePair::QQ,
        ResponsePair::SigmaQ,
        ResponsePair::QSigma,
    ];

    pub fn kind(self) -> SpectrumKind {
        match self {
            ResponsePair::SigmaSigma => SpectrumKind::Matter,
            ResponsePair::QQ => SpectrumKind::Photon,
            ResponsePair::SigmaQ | ResponsePair::QSigma => SpectrumKind::Mixed,
        }
    }

    /// Pole weight from the two transition matrix elements `⟨0|σ_x|k⟩` and `⟨0|q̂|k⟩`.
    fn weight(self, sigma: f64, q: f64, omegac: f64) -> f64 {
        match self {
            ResponsePair::SigmaSigma => sigma * sigma,
            ResponsePair::QQ => q * q / omegac,
            ResponsePair::SigmaQ => sigma * q,
            ResponsePair::QSigma => sigma * q / omegac,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub omega: f64,
    pub weight: f64,
}

/// A response function in Lehmann form,
/// `χ(ω) = Σ_k w_k [1/(ω − Ω_k + iη) − 1/(ω + Ω_k + iη)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFunction {
    pub pair: ResponsePair,
    pub poles: Vec<Pole>,
}

impl ResponseFunction {
    pub fn evaluate(&self, omega: f64, eta: f64) -> Complex64 {
        let z = Complex64::new(omega, eta);
        self.poles
            .iter()
            .map(|p| p.weight * (1.0 / (z - p.omega) - 1.0 / (z + p.omega)))
            .sum()
    }

    /// Poles whose weight magnitude exceeds `threshold`.
    pub fn significant_poles(&self, threshold: f64) -> Vec<Pole> {
        self.poles
            .iter()
            .copied()
            .filter(|p| p.weight.abs() > threshold)
            .collect()
    }

    /// `σ(ω) = −(4πω/c) Im χ(ω + iη)`, positive for absorption.
    pub fn spectrum(&self, grid: &[f64], eta: f64) -> Result<Spectrum, RabiError> {
        if !(eta > 0.0) {
            return Err(RabiError::InvalidEta(eta));
        }
        let values = grid
            .par_iter()
            .map(|&w| -4.0 * std::f64::consts::PI * w / C_AU * self.evaluate(w, eta).im)
            .collect();
        Ok(Spectrum::new(grid.to_vec(), values, self.pair.kind(), eta)?)
    }
}

/// Exact Lehmann response from diagonalization.
pub fn exact_response(params: &RabiParams, pair: ResponsePair) -> Result<ResponseFunction, RabiError> {
    let eig = diagonalize(params)?;
    Ok(response_from_eigen(&eig, pair))
}

pub fn response_from_eigen(eig: &RabiEigen, pair: ResponsePair) -> ResponseFunction {
    let sx = eig.sigma_x_elements();
    let q = eig.q_elements();
    let e0 = eig.energies[0];
    let poles = (1..eig.energies.len())
        .map(|k| Pole {
            omega: eig.energies[k] - e0,
            weight: pair.weight(sx[k], q[k], eig.params.omegac),
        })
        .collect();
    ResponseFunction { pair, poles }
}

/// pRPA polaritons with their (matter, photon) eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrpaSolution {
    pub lower: f64,
    pub upper: f64,
    /// `(−sin θ, cos θ)`.
    pub lower_vec: (f64, f64),
    /// `(cos θ, sin θ)`.
    pub upper_vec: (f64, f64),
}

/// Closed-form pRPA frequencies, `Ω±² = (ω₀²+ω_c²)/2 ± ½√((ω₀²−ω_c²)² + 8λ²ω₀)`.
pub fn prpa_frequencies(params: &RabiParams) -> Result<PrpaSolution, RabiError> {
    params.validate()?;
    let (w0, wc, l) = (params.omega0, params.omegac, params.lambda);
    let mean = 0.5 * (w0 * w0 + wc * wc);
    let diff = w0 * w0 - wc * wc;
    let root = 0.5 * (diff * diff + 8.0 * l * l * w0).sqrt();
    let lower_sq = mean - root;
    if lower_sq < 0.0 {
        return Err(RabiError::Unstable { omega_sq: lower_sq });
    }
    let v = l * (2.0 * w0).sqrt();
    let theta = 0.5 * (2.0 * v).atan2(diff);
    let (s, c) = theta.sin_cos();
    Ok(PrpaSolution {
        lower: lower_sq.sqrt(),
        upper: (mean + root).sqrt(),
        lower_vec: (-s, c),
        upper_vec: (c, s),
    })
}

/// Rotating-wave polaritons `Ω±(0) = (ω_c + ω₀ ± Ω₀)/2`, `Ω₀ = √(δ² + 4λ′²)`.
pub fn rwa_frequencies(params: &RabiParams) -> Result<(f64, f64), RabiError> {
    params.validate()?;
    let lp = params.lambda_prime();
    let delta = params.detuning();
    let big = (delta * delta + 4.0 * lp * lp).sqrt();
    let sum = params.omegac + params.omega0;
    Ok((0.5 * (sum - big), 0.5 * (sum + big)))
}

/// The single-transition, single-mode coupled system equivalent to the pRPA Rabi model.
pub fn prpa_system(params: &RabiParams) -> Result<CoupledSystem, RabiError> {
    params.validate()?;
    let transition = Transition::new(
        0,
        params.omega0,
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::zeros(),
    )?;
    let mode = PhotonMode::new(
        0,
        params.omegac,
        Vector3::new(params.lambda / params.omegac, 0.0, 0.0),
    )?;
    Ok(CoupledSystem::new(vec![transition], vec![mode]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiMethod {
    Exact,
    Prpa,
    Rwa,
}

/// Two-pole response from matter/photon amplitudes of the polariton pair.
fn two_pole_response(
    pair: ResponsePair,
    omegac: f64,
    poles: [(f64, f64, f64); 2],
) -> ResponseFunction {
    ResponseFunction {
        pair,
        poles: poles
            .iter()
            .map(|&(omega, sigma, q)| Pole {
                omega,
                weight: pair.weight(sigma, q, omegac),
            })
            .collect(),
    }
}

pub fn response(
    params: &RabiParams,
    method: RabiMethod,
    pair: ResponsePair,
) -> Result<ResponseFunction, RabiError> {
    let wc = params.omegac;
    match method {
        RabiMethod::Exact => exact_response(params, pair),
        RabiMethod::Prpa => {
            let sol = prpa_frequencies(params)?;
            // ⟨0|σ_x|I⟩ = √ω₀ E/√Ω and ⟨0|q̂|I⟩ = P/√(2Ω).
            let amp = |omega: f64, (e, p): (f64, f64)| {
                (omega, (params.omega0 / omega).sqrt() * e, p / (2.0 * omega).sqrt())
            };
            Ok(two_pole_response(
                pair,
                wc,
                [amp(sol.lower, sol.lower_vec), amp(sol.upper, sol.upper_vec)],
            ))
        }
        RabiMethod::Rwa => {
            params.validate()?;
            let lp = params.lambda_prime();
            let m = Matrix2::new(params.omega0, lp, lp, wc);
            let eig = m.symmetric_eigen();
            let mut order = [0usize, 1];
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let q_scale = 1.0 / (2.0 * wc).sqrt();
            let amp = |k: usize| {
                let v = eig.eigenvectors.column(k);
                (eig.eigenvalues[k], v[0], v[1] * q_scale)
            };
            Ok(two_pole_response(pair, wc, [amp(order[0]), amp(order[1])]))
        }
    }
}

pub fn rabi_spectra(
    params: &RabiParams,
    method: RabiMethod,
    pair: ResponsePair,
    grid: &[f64],
    eta: f64,
) -> Result<Spectrum, RabiError> {
    response(params, method, pair)?.spectrum(grid, eta)
}

/// Mean-field-exchange-correlation kernels sampled on a grid.
///
/// `None` marks grid points where the response matrix is singular, that is,
/// a pole of the kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MxcKernels {
    pub grid: Vec<f64>,
    pub f_sigma: Vec<Option<Complex64>>,
    pub f_q: Vec<Option<Complex64>>,
}

/// Bare two-level response `χ_s(ω) = 1/(ω−ω₀+iη) − 1/(ω+ω₀+iη)`.
pub fn bare_sigma_response(omega0: f64, omega: f64, eta: f64) -> Complex64 {
    let z = Complex64::new(omega, eta);
    1.0 / (z - omega0) - 1.0 / (z + omega0)
}

/// Kernels from inverting the interacting 2×2 response matrix pointwise.
pub fn extract_kernels(params: &RabiParams, grid: &[f64], eta: f64) -> Result<MxcKernels, RabiError> {
    if !(eta > 0.0) {
        return Err(RabiError::InvalidEta(eta));
    }
    let eig = diagonalize(params)?;
    let [ss, qq, sq, qs] = ResponsePair::ALL.map(|p| response_from_eigen(&eig, p));
    let (f_sigma, f_q) = grid
        .par_iter()
        .map(|&w| {
            let a = ss.evaluate(w, eta);
            let b = qs.evaluate(w, eta);
            let c = sq.evaluate(w, eta);
            let d = qq.evaluate(w, eta);
            let det = a * d - b * c;
            let scale = a.norm() * d.norm() + b.norm() * c.norm();
            if !det.is_finite() || det.norm() <= 1e-14 * scale || det.norm() == 0.0 {
                return (None, None);
            }
            let inv00 = d / det;
            let inv01 = -b / det;
            let chi_s = bare_sigma_response(params.omega0, w, eta);
            (Some(1.0 / chi_s - inv00), Some(-inv01))
        })
        .unzip();
    Ok(MxcKernels {
        grid: grid.to_vec(),
        f_sigma,
        f_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::linspace;

    fn gaps(params: RabiParams) -> Vec<f64> {
        diagonalize(&params).unwrap().gaps()
    }

    #[test]
    fn decoupled_spectrum_is_ladder() {
        let p = RabiParams::new(1.0, 1.0, 0.0).with_n_fock(6);
        let h = build_hamiltonian(&p).unwrap();
        let (e, _) = sym_eigen(&h).unwrap();
        let mut expected: Vec<f64> = (0..6)
            .flat_map(|m| [-0.5 + m as f64, 0.5 + m as f64])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_tiny_truncation() {
        let p = RabiParams::new(1.0, 1.0, 0.1).with_n_fock(1);
        assert_eq!(build_hamiltonian(&p).unwrap_err(), RabiError::FockTooSmall(1));
    }

    #[test]
    fn exact_gaps_match_reference() {
        let g = gaps(RabiParams::new(1.0, 1.0, 0.1));
        for (a, b) in g.iter().zip([0.92933081, 1.07066286, 1.9001169, 2.09986406]) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        let g = gaps(RabiParams::new(1.0, 1.0, 0.7));
        for (a, b) in g
            .iter()
            .zip([0.51788399, 1.33471476, 1.45541207, 2.22594271, 2.56807185])
        {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        let g = gaps(RabiParams::new(2.0, 1.0, 0.1));
        for (a, b) in g.iter().zip([0.9933772, 1.98684707, 2.00661901]) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn fock_doubling_is_converged() {
        for lambda in [0.1, 0.3, 0.7] {
            let p = RabiParams::new(1.0, 1.0, lambda);
            let a = gaps(p);
            let b = diagonalize_fixed(&p.with_n_fock(80)).unwrap().gaps();
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() < 1e-9, "λ={lambda} k={k}");
            }
        }
    }

    #[test]
    fn doubling_kicks_in_when_truncation_is_too_small() {
        let p = RabiParams::new(1.0, 1.0, 0.7).with_n_fock(4);
        let eig = diagonalize(&p).unwrap();
        assert!(eig.params.n_fock > 4);
        assert!(eig.top_occupation < FOCK_TOLERANCE);
    }

    #[test]
    fn decoupled_responses() {
        let p = RabiParams::new(1.0, 1.0, 0.0);
        let ss = exact_response(&p, ResponsePair::SigmaSigma).unwrap();
        let sig = ss.significant_poles(1e-12);
        assert_eq!(sig.len(), 1);
        assert!((sig[0].omega - 1.0).abs() < 1e-12);
        assert!((sig[0].weight - 1.0).abs() < 1e-12);
        let sq = exact_response(&p, ResponsePair::SigmaQ).unwrap();
        assert!(sq.poles.iter().all(|p| p.weight.abs() < 1e-14));
    }

    #[test]
    fn strong_coupling_has_extra_poles() {
        let p = RabiParams::new(1.0, 1.0, 0.7);
        let ss = exact_response(&p, ResponsePair::SigmaSigma).unwrap();
        assert!(ss.significant_poles(1e-3).len() >= 3);
    }

    #[test]
    fn completeness_of_sigma_x() {
        for lambda in [0.0, 0.1, 0.7] {
            let eig = diagonalize(&RabiParams::new(1.0, 1.0, lambda)).unwrap();
            let sx = eig.sigma_x_elements();
            let total: f64 = sx[1..].iter().map(|x| x * x).sum();
            let mean = sx[0];
            assert!((total - (1.0 - mean * mean)).abs() < 1e-10);
        }
    }

    #[test]
    fn reciprocity_of_mixed_responses() {
        let p = RabiParams::new(1.0, 1.3, 0.2);
        let sq = exact_response(&p, ResponsePair::SigmaQ).unwrap();
        let qs = exact_response(&p, ResponsePair::QSigma).unwrap();
        for w in linspace(0.05, 3.0, 200) {
            let a = sq.evaluate(w, 1e-3);
            let b = qs.evaluate(w, 1e-3) * p.omegac;
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn prpa_closed_form() {
        let cases = [
            (1.0, 0.01, 0.9929037538, 1.0070462430),
            (1.0, 0.1, 0.9265951887, 1.0683732289),
            (1.0, 0.3, 0.7587726480, 1.1934253511),
            (1.0, 0.7, 0.1002522136, 1.4106556964),
            (2.0, 0.1, 0.9933405282, 2.0033159000),
        ];
        for (w0, l, lo, hi) in cases {
            let s = prpa_frequencies(&RabiParams::new(w0, 1.0, l)).unwrap();
            assert!((s.lower - lo).abs() < 1e-9 && (s.upper - hi).abs() < 1e-9);
        }
        let s = prpa_frequencies(&RabiParams::new(1.0, 2.0, 0.0)).unwrap();
        assert_eq!((s.lower, s.upper), (1.0, 2.0));
        let split = prpa_frequencies(&RabiParams::new(1.0, 1.0, 0.3)).unwrap();
        assert!((split.upper - split.lower - 0.435).abs() < 1e-3);
    }

    #[test]
    fn prpa_eigenvectors_diagonalize_the_two_by_two() {
        let p = RabiParams::new(1.4, 1.0, 0.2);
        let s = prpa_frequencies(&p).unwrap();
        let v = p.lambda * (2.0 * p.omega0).sqrt();
        let m = Matrix2::new(p.omega0.powi(2), v, v, p.omegac.powi(2));
        for (omega, (a, b)) in [(s.lower, s.lower_vec), (s.upper, s.upper_vec)] {
            let x = nalgebra::Vector2::new(a, b);
            let r = m * x - x * omega * omega;
            assert!(r.norm() < 1e-12);
            assert!((x.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn prpa_flags_overcritical_coupling() {
        let err = prpa_frequencies(&RabiParams::new(1.0, 1.0, 0.8)).unwrap_err();
        assert!(matches!(err, RabiError::Unstable { omega_sq } if omega_sq < 0.0));
    }

    #[test]
    fn rwa_closed_form() {
        let (lo, hi) = rwa_frequencies(&RabiParams::new(1.0, 1.0, 0.1)).unwrap();
        assert!((lo - 0.9292893219).abs() < 1e-9 && (hi - 1.0707106781).abs() < 1e-9);
        let (lo, hi) = rwa_frequencies(&RabiParams::new(2.0, 1.0, 0.1)).unwrap();
        assert!((hi - lo - 1.02f64.sqrt()).abs() < 1e-12);
        assert!((lo - 0.9950247531).abs() < 1e-9);
        let (lo, hi) = rwa_frequencies(&RabiParams::new(2.0, 1.0, 0.0)).unwrap();
        assert_eq!((lo, hi), (1.0, 2.0));
    }

    #[test]
    fn rwa_response_poles_match_closed_form() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        let r = response(&p, RabiMethod::Rwa, ResponsePair::SigmaSigma).unwrap();
        let (lo, hi) = rwa_frequencies(&p).unwrap();
        assert!((r.poles[0].omega - lo).abs() < 1e-12);
        assert!((r.poles[1].omega - hi).abs() < 1e-12);
    }

    #[test]
    fn mixed_weight_signs_agree_between_methods() {
        let p = RabiParams::new(1.0, 1.0, 0.05);
        let exact = exact_response(&p, ResponsePair::SigmaQ).unwrap();
        let sig = exact.significant_poles(1e-4);
        for method in [RabiMethod::Prpa, RabiMethod::Rwa] {
            let r = response(&p, method, ResponsePair::SigmaQ).unwrap();
            assert_eq!(sig.len(), 2);
            for (a, b) in sig.iter().zip(&r.poles) {
                assert_eq!(a.weight.signum(), b.weight.signum(), "{method:?}");
                assert!((a.weight - b.weight).abs() < 0.05 * a.weight.abs());
            }
        }
    }

    #[test]
    fn decoupled_sigma_spectrum_peaks_at_omega0() {
        let p = RabiParams::new(1.0, 1.0, 0.0);
        let grid = linspace(0.5, 1.5, 1001);
        let s = rabi_spectra(&p, RabiMethod::Exact, ResponsePair::SigmaSigma, &grid, 0.01).unwrap();
        let imax = (0..grid.len())
            .max_by(|&i, &j| s.values[i].total_cmp(&s.values[j]))
            .unwrap();
        assert!((grid[imax] - 1.0).abs() < 1e-9);
        assert!(s.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn mixed_spectrum_has_both_signs() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        let grid = linspace(0.8, 1.2, 801);
        let s = rabi_spectra(&p, RabiMethod::Exact, ResponsePair::SigmaQ, &grid, 1e-3).unwrap();
        let max = s.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = s.values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.0 && min < 0.0 && max > 0.1 * -min && -min > 0.1 * max);
    }

    #[test]
    fn qq_peaks_agree_between_exact_and_prpa() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        let grid = linspace(0.8, 1.2, 4001);
        let peaks = |m| {
            let s = rabi_spectra(&p, m, ResponsePair::QQ, &grid, 1e-3).unwrap();
            let mut out = Vec::new();
            for i in 1..grid.len() - 1 {
                if s.values[i] > s.values[i - 1] && s.values[i] > s.values[i + 1] {
                    out.push(grid[i]);
                }
            }
            out
        };
        let (a, b) = (peaks(RabiMethod::Exact), peaks(RabiMethod::Prpa));
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 0.02 * x);
        }
    }

    #[test]
    fn spectrum_rejects_nonpositive_eta() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        assert_eq!(
            rabi_spectra(&p, RabiMethod::Prpa, ResponsePair::QQ, &[1.0], 0.0).unwrap_err(),
            RabiError::InvalidEta(0.0)
        );
    }

    #[test]
    fn kernels_vanish_without_coupling() {
        let p = RabiParams::new(1.0, 1.0, 0.0);
        let grid = linspace(0.2, 0.8, 50);
        let k = extract_kernels(&p, &grid, 1e-3).unwrap();
        for f in &k.f_sigma {
            assert!(f.unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn photon_kernel_is_mean_field_at_weak_coupling() {
        let lambda = 0.05;
        let p = RabiParams::new(1.0, 1.0, lambda);
        let grid = [0.3, 0.5, 1.6, 2.2];
        let k = extract_kernels(&p, &grid, 1e-3).unwrap();
        for f in &k.f_q {
            let f = f.unwrap();
            assert!((f.re - lambda).abs() < 10.0 * lambda.powi(3), "{f}");
            assert!(f.im.abs() < 10.0 * lambda.powi(3), "{f}");
        }
    }

    #[test]
    fn kernels_are_frequency_dependent() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        let grid = linspace(0.2, 0.7, 20);
        let k = extract_kernels(&p, &grid, 1e-3).unwrap();
        let re: Vec<f64> = k.f_sigma.iter().map(|f| f.unwrap().re).collect();
        let spread = re.iter().cloned().fold(f64::MIN, f64::max) - re.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-6, "{spread}");
    }

    #[test]
    fn prpa_system_maps_to_two_by_two() {
        let p = RabiParams::new(1.0, 1.0, 0.1);
        let sys = prpa_system(&p).unwrap();
        let blocks = crate::casida::assemble_blocks(&sys).unwrap();
        assert!((blocks.u[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((blocks.v[(0, 0)] - 2.0 * 0.1 * (0.5f64).sqrt()).abs() < 1e-15);
        assert_eq!(blocks.d[0], 1.0);
    }
}
