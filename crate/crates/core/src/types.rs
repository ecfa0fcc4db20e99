//! Shared domain types. All quantities are in atomic units.

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("{what} must be positive and finite, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("{what} must be finite")]
    NotFinite { what: &'static str },
    #[error("spectrum grid must be strictly ascending (index {index})")]
    GridNotAscending { index: usize },
    #[error("spectrum has {grid} grid points but {values} values")]
    LengthMismatch { grid: usize, values: usize },
    #[error("spectrum value at index {index} is not finite")]
    ValueNotFinite { index: usize },
}

fn check_positive(what: &'static str, value: f64) -> Result<(), DomainError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DomainError::NotPositive { what, value })
    }
}

fn check_finite(what: &'static str, v: &Vec3) -> Result<(), DomainError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DomainError::NotFinite { what })
    }
}

/// `sin(πt)` with exact zeros at integer `t` and exact ±1 at half-integers.
pub fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else if r == 0.5 {
        1.0
    } else if r == -0.5 {
        -1.0
    } else {
        (std::f64::consts::PI * r).sin()
    }
}

/// Standing-wave mode function along x, `amplitude · sin(α π x / L_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandingWave {
    pub amplitude: Vec3,
    pub mode_number: u64,
    pub lx: f64,
    /// Reference emitter position; `PhotonMode::coupling` is the mode function here.
    pub x_ref: f64,
}

impl StandingWave {
    pub fn at(&self, x: f64) -> Vec3 {
        self.amplitude * sin_pi(self.mode_number as f64 * (x / self.lx))
    }
}

/// One quantized field mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonMode {
    pub id: i64,
    /// Mode frequency ω_α.
    pub omega: f64,
    /// Coupling λ_α(x_ref): the mode function evaluated at the reference emitter position.
    pub coupling: Vec3,
    /// Spatial profile, when known. Modes without one couple uniformly.
    pub profile: Option<StandingWave>,
}

impl PhotonMode {
    pub fn new(id: i64, omega: f64, coupling: Vec3) -> Result<Self, DomainError> {
        check_positive("mode frequency", omega)?;
        check_finite("mode coupling", &coupling)?;
        Ok(Self {
            id,
            omega,
            coupling,
            profile: None,
        })
    }

    /// Coupling seen by an emitter displaced by `offset` from the reference position.
    pub fn coupling_at(&self, offset: &Vec3) -> Vec3 {
        match &self.profile {
            Some(wave) if offset.x != 0.0 => wave.at(wave.x_ref + offset.x),
            _ => self.coupling,
        }
    }

    pub fn is_decoupled(&self) -> bool {
        self.coupling.iter().all(|&c| c == 0.0) && self.profile.is_none()
    }
}

/// One occupied→unoccupied Kohn–Sham pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub id: i64,
    /// Pair energy ω_q = ε_a − ε_i.
    pub omega: f64,
    /// Transition dipole d_q (charge × length).
    pub dipole: Vec3,
    /// Emitter offset from the cavity reference position.
    pub position: Vec3,
}

impl Transition {
    pub fn new(id: i64, omega: f64, dipole: Vec3, position: Vec3) -> Result<Self, DomainError> {
        check_positive("transition energy", omega)?;
        check_finite("transition dipole", &dipole)?;
        check_finite("transition position", &position)?;
        Ok(Self {
            id,
            omega,
            dipole,
            position,
        })
    }
}

/// One coupled eigenpair of the photon-extended Casida problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    /// Ω_I. Zero when `unstable`.
    pub omega: f64,
    /// Ω_I², the raw eigenvalue. Negative when `unstable`.
    pub omega_sq: f64,
    /// Electronic part E₁ (one entry per transition).
    pub evec_e: Vec<f64>,
    /// Photonic part P₁ (one entry per mode, in the system's mode order).
    /// Empty when the solver was asked not to keep photon components.
    pub evec_p: Vec<f64>,
    pub sigma_e: f64,
    pub sigma_p: f64,
    pub unstable: bool,
}

impl Excitation {
    /// Builds an excitation from an eigenvalue and a (not necessarily normalized) eigenvector.
    pub fn from_eigenpair(omega_sq: f64, mut evec_e: Vec<f64>, mut evec_p: Vec<f64>) -> Self {
        let norm = evec_e
            .iter()
            .chain(evec_p.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            evec_e.iter_mut().for_each(|x| *x /= norm);
            evec_p.iter_mut().for_each(|x| *x /= norm);
        }
        let sigma_e: f64 = evec_e.iter().map(|x| x * x).sum();
        let sigma_p: f64 = evec_p.iter().map(|x| x * x).sum();
        Self::assemble(omega_sq, evec_e, evec_p, sigma_e, sigma_p)
    }

    /// Like [`from_eigenpair`](Self::from_eigenpair) but discards the photon
    /// components, keeping only their squared norm. `evec_p` is left empty.
    pub fn without_photon_vector(omega_sq: f64, mut evec_e: Vec<f64>, photon_norm_sq: f64) -> Self {
        let e_sq: f64 = evec_e.iter().map(|x| x * x).sum();
        let total = e_sq + photon_norm_sq;
        if total > 0.0 {
            let scale = total.sqrt();
            evec_e.iter_mut().for_each(|x| *x /= scale);
        }
        let (sigma_e, sigma_p) = if total > 0.0 {
            (e_sq / total, photon_norm_sq / total)
        } else {
            (0.0, 0.0)
        };
        Self::assemble(omega_sq, evec_e, Vec::new(), sigma_e, sigma_p)
    }

    fn assemble(omega_sq: f64, evec_e: Vec<f64>, evec_p: Vec<f64>, sigma_e: f64, sigma_p: f64) -> Self {
        let unstable = omega_sq < 0.0;
        Self {
            omega: if unstable { 0.0 } else { omega_sq.sqrt() },
            omega_sq,
            evec_e,
            evec_p,
            sigma_e,
            sigma_p,
            unstable,
        }
    }
}

/// Observable a [`Spectrum`] was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Matter,
    Photon,
    Mixed,
    CrossSection,
}

/// A strength function sampled on an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// Lorentzian half width Δ; zero for binned stick spectra.
    pub broadening: f64,
}

impl Spectrum {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        kind: SpectrumKind,
        broadening: f64,
    ) -> Result<Self, DomainError> {
        if grid.len() != values.len() {
            return Err(DomainError::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        check_grid(&grid)?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(DomainError::ValueNotFinite { index });
        }
        Ok(Self {
            grid,
            values,
            kind,
            broadening,
        })
    }

    /// Trapezoid integral of the values over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

pub fn check_grid(grid: &[f64]) -> Result<(), DomainError> {
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(DomainError::GridNotAscending { index: i + 1 });
        }
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + step * i as f64).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_exact_nodes() {
        for k in 0..50 {
            assert_eq!(sin_pi(k as f64), 0.0);
            assert_eq!(sin_pi(k as f64 * 0.5 * 2.0), 0.0);
        }
        assert_eq!(sin_pi(0.5), 1.0);
        assert_eq!(sin_pi(1.5), -1.0);
        assert_eq!(sin_pi(2.5), 1.0);
        assert!((sin_pi(0.25) - (std::f64::consts::FRAC_PI_4).sin()).abs() < 1e-15);
        assert!((sin_pi(-0.3) - (-0.3 * std::f64::consts::PI).sin()).abs() < 1e-15);
    }

    #[test]
    fn excitation_normalizes_and_flags_instability() {
        let x = Excitation::from_eigenpair(4.0, vec![3.0], vec![4.0]);
        assert_eq!(x.omega, 2.0);
        assert!((x.sigma_e - 0.36).abs() < 1e-15);
        assert!((x.sigma_e + x.sigma_p - 1.0).abs() < 1e-15);
        let y = Excitation::from_eigenpair(-1e-3, vec![1.0], vec![]);
        assert!(y.unstable);
        assert_eq!(y.omega, 0.0);
        assert!(!y.omega.is_nan());
    }

    #[test]
    fn rejects_invalid_domain_values() {
        assert!(PhotonMode::new(1, 0.0, Vec3::zeros()).is_err());
        assert!(PhotonMode::new(1, 1.0, Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
        assert!(PhotonMode::new(1, 1.0, Vec3::zeros()).is_ok());
        assert!(Transition::new(1, -0.2, Vec3::zeros(), Vec3::zeros()).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![0.0, 1.0], vec![1.0, 1.0], SpectrumKind::Matter, 0.1).is_ok());
        assert_eq!(
            Spectrum::new(vec![0.0, 0.0], vec![1.0, 1.0], SpectrumKind::Matter, 0.1),
            Err(DomainError::GridNotAscending { index: 1 })
        );
        assert!(Spectrum::new(vec![0.0], vec![f64::INFINITY], SpectrumKind::Photon, 0.0).is_err());
    }

    #[test]
    fn standing_wave_offsets() {
        let mode = PhotonMode {
            id: 1,
            omega: 1.0,
            coupling: Vec3::new(2.0, 0.0, 0.0),
            profile: Some(StandingWave {
                amplitude: Vec3::new(2.0, 0.0, 0.0),
                mode_number: 1,
                lx: 10.0,
                x_ref: 5.0,
            }),
        };
        assert_eq!(mode.coupling_at(&Vec3::zeros()), Vec3::new(2.0, 0.0, 0.0));
        let shifted = mode.coupling_at(&Vec3::new(2.5, 0.0, 0.0));
        assert!((shifted.x - 2.0 * (0.75 * std::f64::consts::PI).sin()).abs() < 1e-14);
    }
}
