//! Physical constants and unit conversion.
//!
//! Everything inside the crate runs in Hartree atomic units
//! (ħ = e = m_e = 4πε₀ = 1). Values only leave atomic units at IO
//! boundaries, through [`convert`] or the typed helpers below.

use std::fmt;

use thiserror::Error;

/// Hartree energy in eV.
pub const HARTREE_EV: f64 = 27.211386245988;
/// Bohr radius in Å.
pub const BOHR_ANGSTROM: f64 = 0.529177210903;
/// Speed of light in atomic units.
pub const C_AU: f64 = 137.035999084;
/// ħ in eV·fs.
pub const HBAR_EV_FS: f64 = 0.6582119569;
/// ħc in eV·nm.
pub const HBARC_EV_NM: f64 = 197.3269804;
/// Atomic unit of time in fs.
pub const AU_TIME_FS: f64 = HBAR_EV_FS / HARTREE_EV;
/// Vacuum permittivity in atomic units.
pub const EPSILON0_AU: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Physical dimension of a [`Unit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Time,
    /// Energy^{1/2} / length, the mode coupling λ.
    Coupling,
    /// Charge × length.
    Dipole,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Hartree,
    ElectronVolt,
    MilliElectronVolt,
    Bohr,
    Angstrom,
    Nanometer,
    Micrometer,
    AuTime,
    Femtosecond,
    Nanosecond,
    /// a.u. of coupling, Ha^{1/2}/bohr.
    AuCoupling,
    /// eV^{1/2}/nm.
    SqrtEvPerNm,
    /// e·bohr.
    AuDipole,
    /// e·Å.
    ElectronAngstrom,
    /// 1/(a.u. time).
    AuRate,
    PerFemtosecond,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Hartree | ElectronVolt | MilliElectronVolt => Dimension::Energy,
            Bohr | Angstrom | Nanometer | Micrometer => Dimension::Length,
            AuTime | Femtosecond | Nanosecond => Dimension::Time,
            AuCoupling | SqrtEvPerNm => Dimension::Coupling,
            AuDipole | ElectronAngstrom => Dimension::Dipole,
            AuRate | PerFemtosecond => Dimension::Rate,
        }
    }

    /// Size of one of this unit expressed in atomic units.
    fn in_au(self) -> f64 {
        use Unit::*;
        match self {
            Hartree | Bohr | AuTime | AuCoupling | AuDipole | AuRate => 1.0,
            ElectronVolt => 1.0 / HARTREE_EV,
            MilliElectronVolt => 1e-3 / HARTREE_EV,
            Angstrom | ElectronAngstrom => 1.0 / BOHR_ANGSTROM,
            Nanometer => 10.0 / BOHR_ANGSTROM,
            Micrometer => 1e4 / BOHR_ANGSTROM,
            Femtosecond => 1.0 / AU_TIME_FS,
            Nanosecond => 1e6 / AU_TIME_FS,
            SqrtEvPerNm => (1.0 / HARTREE_EV).sqrt() * BOHR_ANGSTROM / 10.0,
            PerFemtosecond => AU_TIME_FS,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Unit::*;
        let s = match self {
            Hartree => "Ha",
            ElectronVolt => "eV",
            MilliElectronVolt => "meV",
            Bohr => "bohr",
            Angstrom => "Å",
            Nanometer => "nm",
            Micrometer => "µm",
            AuTime => "a.u.(time)",
            Femtosecond => "fs",
            Nanosecond => "ns",
            AuCoupling => "a.u.(coupling)",
            SqrtEvPerNm => "eV^1/2/nm",
            AuDipole => "e·bohr",
            ElectronAngstrom => "e·Å",
            AuRate => "a.u.(rate)",
            PerFemtosecond => "1/fs",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("cannot convert {from} to {to}: incompatible dimensions")]
pub struct UnitError {
    pub from: Unit,
    pub to: Unit,
}

/// Linear rescaling of `value` from one unit to another of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64, UnitError> {
    if from.dimension() != to.dimension() {
        return Err(UnitError { from, to });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.in_au() / to.in_au())
}

pub fn ev_to_au(e: f64) -> f64 {
    e / HARTREE_EV
}

pub fn au_to_ev(e: f64) -> f64 {
    e * HARTREE_EV
}

pub fn angstrom_to_bohr(x: f64) -> f64 {
    x / BOHR_ANGSTROM
}

pub fn bohr_to_angstrom(x: f64) -> f64 {
    x * BOHR_ANGSTROM
}

pub fn nm_to_bohr(x: f64) -> f64 {
    x * 10.0 / BOHR_ANGSTROM
}

pub fn bohr_to_nm(x: f64) -> f64 {
    x * BOHR_ANGSTROM / 10.0
}

/// Lifetime τ = ħ/ΔE in fs for a width given in eV.
pub fn lifetime_fs_from_width_ev(width_ev: f64) -> f64 {
    HBAR_EV_FS / width_ev
}
