use std::f64::consts::PI;

use super::CavityError;
use crate::types::Vec3;
use crate::units::C_AU;

/// A decay rate with its lifetime, both in a.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub gamma: f64,
    pub tau: f64,
}

impl Rate {
    fn new(gamma: f64) -> Self {
        Self {
            gamma,
            tau: 1.0 / gamma,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), CavityError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CavityError::NotPositive(name))
    }
}

/// Free-space spontaneous emission, `Γ = ω₀³|d|²/(3πε₀ħc³) = 4ω₀³|d|²/(3c³)`.
pub fn ww_rate_3d(omega0: f64, dipole: &Vec3) -> Result<Rate, CavityError> {
    positive("omega0", omega0)?;
    Ok(Rate::new(4.0 * omega0.powi(3) * dipole.norm_squared() / (3.0 * C_AU.powi(3))))
}

/// Emission into a one-dimensional cavity, `Γ = ω₀|d|²/(L_yL_z ε₀ħc) = 4πω₀|d|²/(L_yL_z c)`.
pub fn ww_rate_1d(omega0: f64, dipole: &Vec3, ly: f64, lz: f64) -> Result<Rate, CavityError> {
    positive("omega0", omega0)?;
    positive("ly", ly)?;
    positive("lz", lz)?;
    Ok(Rate::new(4.0 * PI * omega0 * dipole.norm_squared() / (ly * lz * C_AU)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{angstrom_to_bohr, au_to_ev, ev_to_au, AU_TIME_FS};

    fn benzene() -> (f64, Vec3) {
        (ev_to_au(6.88), Vec3::new(angstrom_to_bohr(0.952), 0.0, 0.0))
    }

    #[test]
    fn benzene_free_space() {
        let (w, d) = benzene();
        let r = ww_rate_3d(w, &d).unwrap();
        assert!((r.tau * AU_TIME_FS * 1e-6 - 0.8924737).abs() < 1e-6);
    }

    #[test]
    fn hydrogen_2p() {
        let d = Vec3::new(128.0 * 2f64.sqrt() / 243.0, 0.0, 0.0);
        let r = ww_rate_3d(0.375, &d).unwrap();
        assert!((r.tau * AU_TIME_FS * 1e-6 - 1.5953).abs() < 1e-3);
    }

    #[test]
    fn benzene_in_cavity() {
        let (w, d) = benzene();
        let r = ww_rate_1d(w, &d, angstrom_to_bohr(10.58), angstrom_to_bohr(2.65)).unwrap();
        assert!((r.tau * AU_TIME_FS - 32.2745).abs() < 1e-3);
        assert!((au_to_ev(r.gamma) - 0.0203942).abs() < 1e-6);
    }

    #[test]
    fn scaling_and_limits() {
        let (w, d) = benzene();
        let a = ww_rate_1d(w, &d, 20.0, 5.0).unwrap();
        let b = ww_rate_1d(w, &d, 10.0, 5.0).unwrap();
        assert!((b.gamma / a.gamma - 2.0).abs() < 1e-14);
        assert_eq!(ww_rate_1d(w, &Vec3::zeros(), 1.0, 1.0).unwrap().gamma, 0.0);
        assert_eq!(ww_rate_3d(w, &Vec3::zeros()).unwrap().gamma, 0.0);
        assert!(ww_rate_3d(0.0, &d).is_err());
        assert!(ww_rate_1d(w, &d, 0.0, 1.0).is_err());
    }
}
