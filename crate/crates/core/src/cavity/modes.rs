use std::f64::consts::PI;

use super::CavityError;
use crate::types::{sin_pi, PhotonMode, StandingWave, Vec3};
use crate::units::C_AU;

/// A one-dimensional cavity along x with cross-section `ly × lz` (a.u.).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec1D {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    /// Reference emitter position along x.
    pub x0: f64,
    /// Highest mode number α.
    pub count: u64,
    /// Keep only modes with `ω_α` inside this band.
    pub window: Option<(f64, f64)>,
}

impl CavitySpec1D {
    pub fn validate(&self) -> Result<(), CavityError> {
        for (name, v) in [("lx", self.lx), ("ly", self.ly), ("lz", self.lz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CavityError::NotPositive(name));
            }
        }
        if !(self.x0 >= 0.0 && self.x0 <= self.lx) {
            return Err(CavityError::PositionOutside {
                x0: self.x0,
                lx: self.lx,
            });
        }
        if self.count == 0 {
            return Err(CavityError::NoModes);
        }
        Ok(())
    }

    /// Spacing between consecutive modes, `cπ/L_x`.
    pub fn spacing(&self) -> f64 {
        C_AU * PI / self.lx
    }

    /// Mode-function amplitude `√(8π/V)`.
    pub fn amplitude(&self) -> f64 {
        (8.0 * PI / (self.lx * self.ly * self.lz)).sqrt()
    }

    /// Cavity length whose *coupled* modes (odd α at the centre) are `spacing` apart.
    pub fn lx_for_coupled_spacing(spacing: f64) -> f64 {
        2.0 * C_AU * PI / spacing
    }
}

/// Modes `ω_α = αcπ/L_x`, `λ_α = √(8π/V) sin(απx₀/L_x) e_x`.
pub fn gen_modes_1d(spec: &CavitySpec1D) -> Result<Vec<PhotonMode>, CavityError> {
    spec.validate()?;
    let step = spec.spacing();
    let (first, last) = match spec.window {
        None => (1, spec.count),
        Some((lo, hi)) => {
            let first = ((lo / step).ceil().max(1.0)) as u64;
            let last = ((hi / step).floor().min(spec.count as f64)) as u64;
            (first, last)
        }
    };
    if first > last {
        let (lo, hi) = spec.window.unwrap_or((0.0, 0.0));
        return Err(CavityError::EmptyWindow(lo, hi));
    }
    let amp = spec.amplitude();
    let ratio = spec.x0 / spec.lx;
    let e_x = Vec3::new(amp, 0.0, 0.0);
    Ok((first..=last)
        .map(|alpha| {
            let omega = alpha as f64 * step;
            PhotonMode {
                id: alpha as i64,
                omega,
                coupling: e_x * sin_pi(alpha as f64 * ratio),
                profile: Some(StandingWave {
                    amplitude: e_x,
                    mode_number: alpha,
                    lx: spec.lx,
                    x_ref: spec.x0,
                }),
            }
        })
        .collect())
}

/// Appends one mode per `(omega, scale)` with coupling `scale · reference`.
///
/// New ids continue after the largest existing id, in input order.
pub fn add_strong_modes(
    mut modes: Vec<PhotonMode>,
    reference: Vec3,
    extra: &[(f64, f64)],
) -> Result<Vec<PhotonMode>, CavityError> {
    let mut next = modes.iter().map(|m| m.id).max().map_or(0, |id| id + 1);
    for &(omega, scale) in extra {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(CavityError::NotPositive("strong mode frequency"));
        }
        modes.push(PhotonMode {
            id: next,
            omega,
            coupling: reference * scale,
            profile: None,
        });
        next += 1;
    }
    Ok(modes)
}

/// Grid points at the midpoints of consecutive coupled mode frequencies.
///
/// Between two coupled poles lies exactly one coupled eigenvalue of a single
/// emitter, so binning sticks on this grid puts one eigenvalue per cell.
pub fn pole_aligned_grid(modes: &[PhotonMode], window: Option<(f64, f64)>) -> Result<Vec<f64>, CavityError> {
    let mut w: Vec<f64> = modes
        .iter()
        .filter(|m| m.coupling.iter().any(|&c| c != 0.0))
        .map(|m| m.omega)
        .filter(|&o| window.map_or(true, |(lo, hi)| o >= lo && o <= hi))
        .collect();
    w.sort_by(f64::total_cmp);
    w.dedup();
    if w.len() < 2 {
        return Err(CavityError::TooFewPoles);
    }
    Ok(w.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}
