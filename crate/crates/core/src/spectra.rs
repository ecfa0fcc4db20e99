//! Oscillator strengths, sum rules and broadened spectra.

use num_complex::Complex64;
use thiserror::Error;

use crate::casida::{CoupledSystem, Solution};
use crate::types::{check_grid, DomainError, Excitation, Spectrum, SpectrumKind, Vec3};
use crate::units::C_AU;

/// Default Lehmann regularization η in a.u.
pub const DEFAULT_ETA: f64 = 1e-3;
/// Default polarizability trace divisor (3 for isotropic averaging, 1 for scalar models).
pub const DEFAULT_TRACE_DIVISOR: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum SpectraError {
    #[error("sum rule needs the complete spectrum, got a window ({0}, {1})")]
    Windowed(f64, f64),
    #[error("eta must be positive, got {0}")]
    InvalidEta(f64),
    #[error("broadening must be non-negative, got {0}")]
    InvalidBroadening(f64),
    #[error("trace divisor must be positive, got {0}")]
    InvalidDivisor(f64),
    #[error("excitation {0} has no photon components; solve with full photon vectors")]
    MissingPhotonVector(usize),
    #[error("excitation vector lengths do not match the system ({0})")]
    Shape(&'static str),
    #[error("mode index {0} out of range")]
    ModeIndex(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Strengths involving the photon channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedStrength {
    pub f_pn: f64,
    pub f_np: f64,
    pub f_pp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthSet {
    pub omega: Vec<f64>,
    pub f_nn: Vec<f64>,
    /// Present when the solution carried photon vectors.
    pub mixed: Option<Vec<MixedStrength>>,
    pub sigma_e: Vec<f64>,
    pub sigma_p: Vec<f64>,
    /// `(lo, hi)` if only a window of the spectrum was solved.
    pub window: Option<(f64, f64)>,
}

impl StrengthSet {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Matter transition moment `m_I = Σ_q √ω_q d_q E_q`, so that `⟨0|r|I⟩ = m_I/√Ω_I`.
pub fn matter_moment(exc: &Excitation, system: &CoupledSystem) -> Vec3 {
    system
        .transitions
        .iter()
        .zip(&exc.evec_e)
        .map(|(t, &e)| t.dipole * (t.omega.sqrt() * e))
        .sum()
}

/// `f_I = (2/3) |Σ_q √ω_q d_q E_q|²`.
pub fn oscillator_strength_nn(excitations: &[Excitation], system: &CoupledSystem) -> Vec<f64> {
    excitations
        .iter()
        .map(|x| 2.0 / 3.0 * matter_moment(x, system).norm_squared())
        .collect()
}

/// Strength of an isolated transition, `(2/3) ω_q |d_q|²`.
pub fn bare_strength(omega: f64, dipole: &Vec3) -> f64 {
    2.0 / 3.0 * omega * dipole.norm_squared()
}

/// Total of the bare strengths, the value fixed by the Thomas–Reiche–Kuhn sum rule.
pub fn trk_reference(system: &CoupledSystem) -> f64 {
    system
        .transitions
        .iter()
        .map(|t| bare_strength(t.omega, &t.dipole))
        .sum()
}

fn unit_polarization(v: &Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        Vec3::zeros()
    }
}

/// Mixed matter–photon and photon–photon strengths.
///
/// With `m_I` the matter moment and `ê_α` the unit polarization of mode α:
/// `f_pn = √2 Σ_α P_α (ê_α·m_I)`, `f_np` the same with a `1/ω_α` per mode,
/// and `f_pp = (1/3)(Σ_α P_α)(Σ_α P_α/ω_α)`. An isolated mode has
/// `f_pp = 1/(3ω_α)`.
pub fn mixed_and_photon_strengths(
    excitations: &[Excitation],
    system: &CoupledSystem,
) -> Result<Vec<MixedStrength>, SpectraError> {
    let pol: Vec<Vec3> = system
        .modes
        .iter()
        .map(|m| unit_polarization(&m.coupling))
        .collect();
    excitations
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if x.evec_p.len() != system.m() {
                return if x.evec_p.is_empty() && system.m() > 0 {
                    Err(SpectraError::MissingPhotonVector(i))
                } else {
                    Err(SpectraError::Shape("photon"))
                };
            }
            let m = matter_moment(x, system);
            let (mut pn, mut np, mut sum_p, mut sum_pw) = (0.0, 0.0, 0.0, 0.0);
            for ((p, mode), e) in x.evec_p.iter().zip(&system.modes).zip(&pol) {
                let proj = e.dot(&m);
                pn += p * proj;
                np += p * proj / mode.omega;
                sum_p += p;
                sum_pw += p / mode.omega;
            }
            Ok(MixedStrength {
                f_pn: std::f64::consts::SQRT_2 * pn,
                f_np: std::f64::consts::SQRT_2 * np,
                f_pp: sum_p * sum_pw / 3.0,
            })
        })
        .collect()
}

/// All strengths of a solution. Mixed strengths are omitted when photon vectors were dropped.
pub fn strengths(solution: &Solution, system: &CoupledSystem) -> Result<StrengthSet, SpectraError> {
    let exc = &solution.excitations;
    if exc.iter().any(|x| x.evec_e.len() != system.n()) {
        return Err(SpectraError::Shape("electronic"));
    }
    let has_photon = system.m() == 0 || exc.iter().all(|x| x.evec_p.len() == system.m());
    let mixed = if has_photon {
        Some(mixed_and_photon_strengths(exc, system)?)
    } else {
        None
    };
    Ok(StrengthSet {
        omega: exc.iter().map(|x| x.omega).collect(),
        f_nn: oscillator_strength_nn(exc, system),
        mixed,
        sigma_e: exc.iter().map(|x| x.sigma_e).collect(),
        sigma_p: exc.iter().map(|x| x.sigma_p).collect(),
        window: solution.window,
    })
}

/// `Σ_I f_I` over a complete spectrum.
pub fn trk_sum(strengths: &StrengthSet) -> Result<f64, SpectraError> {
    if let Some((lo, hi)) = strengths.window {
        return Err(SpectraError::Windowed(lo, hi));
    }
    Ok(strengths.f_nn.iter().sum())
}

/// Widths of the cells around each grid point, edges at midpoints.
pub fn cell_edges(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    match n {
        0 => Vec::new(),
        1 => vec![grid[0] - 0.5, grid[0] + 0.5],
        _ => {
            let mut e = Vec::with_capacity(n + 1);
            e.push(grid[0] - 0.5 * (grid[1] - grid[0]));
            e.extend(grid.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            e.push(grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]));
            e
        }
    }
}

/// Lorentzian broadening of sticks, or binning into grid cells for `delta = 0`.
///
/// Binned values are the summed weights per cell divided by the cell width,
/// so `Σ value·width` equals the total weight of the sticks inside the grid.
pub fn broaden_sticks(
    omega: &[f64],
    weight: &[f64],
    delta: f64,
    grid: &[f64],
    kind: SpectrumKind,
) -> Result<Spectrum, SpectraError> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(SpectraError::InvalidBroadening(delta));
    }
    check_grid(grid)?;
    let values = if delta == 0.0 {
        let edges = cell_edges(grid);
        let mut v = vec![0.0; grid.len()];
        for (&w, &f) in omega.iter().zip(weight) {
            let k = edges.partition_point(|&e| e <= w);
            if k >= 1 && k <= grid.len() {
                v[k - 1] += f;
            }
        }
        for (k, x) in v.iter_mut().enumerate() {
            *x /= edges[k + 1] - edges[k];
        }
        v
    } else {
        grid.iter()
            .map(|&x| {
                omega
                    .iter()
                    .zip(weight)
                    .map(|(&w, &f)| f * delta / (std::f64::consts::PI * ((x - w).powi(2) + delta * delta)))
                    .sum()
            })
            .collect()
    };
    Ok(Spectrum::new(grid.to_vec(), values, kind, delta)?)
}

/// Matter strength function `S(ω) = Σ_I f_I L_Δ(ω − Ω_I)`.
pub fn broaden(strengths: &StrengthSet, delta: f64, grid: &[f64]) -> Result<Spectrum, SpectraError> {
    broaden_sticks(&strengths.omega, &strengths.f_nn, delta, grid, SpectrumKind::Matter)
}

fn check_eta(eta: f64) -> Result<(), SpectraError> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(SpectraError::InvalidEta(eta))
    }
}

fn check_divisor(divisor: f64) -> Result<(), SpectraError> {
    if divisor > 0.0 && divisor.is_finite() {
        Ok(())
    } else {
        Err(SpectraError::InvalidDivisor(divisor))
    }
}

/// `1/(Ω² − (ω+iη)²)`, whose imaginary part is positive for ω > 0.
fn resonance(big_omega: f64, omega: f64, eta: f64) -> Complex64 {
    let z = Complex64::new(omega, eta);
    1.0 / (big_omega * big_omega - z * z)
}

/// Photoabsorption cross section `σ(ω) = (4πω/c) Im Tr α(ω+iη) / divisor`,
/// with `Tr α = Σ_I 3 f_I / (Ω_I² − ω²)`.
pub fn cross_section(
    strengths: &StrengthSet,
    grid: &[f64],
    eta: f64,
    divisor: f64,
) -> Result<Spectrum, SpectraError> {
    check_eta(eta)?;
    check_divisor(divisor)?;
    let values = grid
        .iter()
        .map(|&w| {
            let tr: f64 = strengths
                .omega
                .iter()
                .zip(&strengths.f_nn)
                .map(|(&o, &f)| 3.0 * f * resonance(o, w, eta).im)
                .sum();
            4.0 * std::f64::consts::PI * w / C_AU * tr / divisor
        })
        .collect();
    Ok(Spectrum::new(grid.to_vec(), values, SpectrumKind::CrossSection, eta)?)
}

/// Field absorption `(4πω/c) Im β(ω+iη) / divisor`, with
/// `β = Σ_I Σ_α (P_Iα² / ω_α) / (Ω_I² − ω²)` over `modes` (all when `None`).
pub fn field_spectrum(
    excitations: &[Excitation],
    system: &CoupledSystem,
    modes: Option<&[usize]>,
    grid: &[f64],
    eta: f64,
    divisor: f64,
) -> Result<Spectrum, SpectraError> {
    check_eta(eta)?;
    check_divisor(divisor)?;
    let all: Vec<usize>;
    let subset = match modes {
        Some(s) => s,
        None => {
            all = (0..system.m()).collect();
            &all
        }
    };
    if let Some(&bad) = subset.iter().find(|&&a| a >= system.m()) {
        return Err(SpectraError::ModeIndex(bad));
    }
    let mut weights = Vec::with_capacity(excitations.len());
    for (i, x) in excitations.iter().enumerate() {
        if x.evec_p.len() != system.m() {
            return Err(SpectraError::MissingPhotonVector(i));
        }
        weights.push(
            subset
                .iter()
                .map(|&a| x.evec_p[a].powi(2) / system.modes[a].omega)
                .sum::<f64>(),
        );
    }
    let values = grid
        .iter()
        .map(|&w| {
            let beta: f64 = excitations
                .iter()
                .zip(&weights)
                .map(|(x, &g)| g * resonance(x.omega, w, eta).im)
                .sum();
            4.0 * std::f64::consts::PI * w / C_AU * beta / divisor
        })
        .collect();
    Ok(Spectrum::new(grid.to_vec(), values, SpectrumKind::Photon, eta)?)
}
