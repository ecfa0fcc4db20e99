//! Config files and the validated run description built from arguments.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use qedr_core::rabi::RabiParams;
use qedr_core::units::ev_to_au;
use qedr_core::Vec3;

use crate::args::{Kind, PhotonVectorsArg, Solver, SpectrumRequestArgs, SystemArgs};
use crate::error::{CliError, Result};

/// Reads `key = value` lines. `#` starts a comment; keys are long flag names.
pub fn parse_config(text: &str, name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::input(format!("{name}:{}: expected key = value", k + 1)));
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(CliError::input(format!("{name}:{}: invalid key '{key}'", k + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Splices config entries in right after the subcommand path, so explicit
/// flags, which come later, override them.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config: Option<PathBuf> = None;
    let mut iter = args.into_iter();
    while let Some(a) = iter.next() {
        match a.to_str() {
            Some("--config") => {
                let path = iter.next().ok_or_else(|| CliError::input("--config needs a file"))?;
                config = Some(path.into());
            }
            Some(s) if s.starts_with("--config=") => config = Some(PathBuf::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let name = path.display().to_string();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::input(format!("{name}: {e}")))?;
    let entries = parse_config(&text, &name)?;

    // rest[0] is the program name, then the subcommand (two words for `modes`).
    let mut at = 1;
    if let Some(first) = rest.get(at).and_then(|s| s.to_str()) {
        if !first.starts_with('-') {
            at += if first == "modes" { 2 } else { 1 };
        }
    }
    let at = at.min(rest.len());
    let spliced: Vec<OsString> = entries
        .into_iter()
        .flat_map(|(k, v)| [OsString::from(format!("--{k}")), OsString::from(v)])
        .collect();
    rest.splice(at..at, spliced);
    Ok(rest)
}

/// `lo:hi`, in the units of the flag.
pub fn parse_window(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || CliError::input(format!("{what}: expected lo:hi with 0 <= lo < hi, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// `lo:hi:n` as `n` evenly spaced points.
pub fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>> {
    let bad = || CliError::input(format!("{what}: expected lo:hi:n with lo < hi and n >= 2, got '{s}'"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = a.parse().map_err(|_| bad())?;
    let hi: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
        return Err(bad());
    }
    Ok(qedr_core::types::linspace(lo, hi, n))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Files { transitions: PathBuf, modes: Option<PathBuf> },
    /// One transition at the reference point: energy and dipole in a.u.
    Inline { omega: f64, dipole: Vec3, modes: Option<PathBuf> },
    Rabi(RabiParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Explicit points, a.u.
    Points(Vec<f64>),
    PoleAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRequest {
    pub kind: Kind,
    pub grid: GridSpec,
    /// a.u.
    pub delta: f64,
    /// a.u.
    pub eta: f64,
    pub divisor: f64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: SystemSource,
    pub solver: Solver,
    /// a.u.
    pub window: Option<(f64, f64)>,
    pub self_energy: bool,
    pub photon_vectors: PhotonVectorsArg,
    pub spectra: Vec<SpectrumRequest>,
    pub excitations_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.solver == Solver::Structured && self.window.is_none() {
            return Err(CliError::input("the structured solver needs --window-eV"));
        }
        for req in &self.spectra {
            if !(req.delta >= 0.0 && req.delta.is_finite()) {
                return Err(CliError::input(format!("--delta-eV must be >= 0, got {}", req.delta)));
            }
            if !(req.eta > 0.0 && req.eta.is_finite()) {
                return Err(CliError::input(format!("--eta-eV must be > 0, got {}", req.eta)));
            }
            let has_modes = matches!(
                &self.source,
                SystemSource::Files { modes: Some(_), .. } | SystemSource::Inline { modes: Some(_), .. }
            );
            if req.grid == GridSpec::PoleAligned && !has_modes {
                return Err(CliError::input("--pole-grid needs a mode file"));
            }
        }
        Ok(())
    }
}

pub fn system_source(a: &SystemArgs) -> Result<SystemSource> {
    match (&a.transitions, a.omega0_ev, a.dipole_ea) {
        (Some(t), None, None) => Ok(SystemSource::Files {
            transitions: t.clone(),
            modes: a.modes.clone(),
        }),
        (None, Some(w), Some(d)) => {
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::input(format!("--omega0-eV must be positive, got {w}")));
            }
            Ok(SystemSource::Inline {
                omega: ev_to_au(w),
                dipole: Vec3::new(qedr_core::units::angstrom_to_bohr(d), 0.0, 0.0),
                modes: a.modes.clone(),
            })
        }
        (None, Some(_), None) | (None, None, Some(_)) => {
            Err(CliError::input("an inline transition needs both --omega0-eV and --dipole-eA"))
        }
        (None, None, None) => Err(CliError::input("no system: give --transitions or --omega0-eV with --dipole-eA")),
        (Some(_), _, _) => Err(CliError::input("give either --transitions or an inline transition, not both")),
    }
}

/// Grid and units of one spectrum request; `window` limits a pole grid.
pub fn spectrum_request(a: &SpectrumRequestArgs, out: Option<&Path>) -> Result<SpectrumRequest> {
    let grid = match (&a.grid_ev, a.pole_grid) {
        (Some(g), false) => GridSpec::Points(parse_grid(g, "--grid-eV")?.into_iter().map(ev_to_au).collect()),
        (None, true) => GridSpec::PoleAligned,
        (Some(_), true) => return Err(CliError::input("give either --grid-eV or --pole-grid, not both")),
        (None, false) => return Err(CliError::input("a spectrum needs --grid-eV or --pole-grid")),
    };
    Ok(SpectrumRequest {
        kind: a.kind,
        grid,
        delta: ev_to_au(a.delta_ev),
        eta: a.eta_ev.map_or(qedr_core::spectra::DEFAULT_ETA, ev_to_au),
        divisor: a.divisor,
        out: out.map(Path::to_path_buf),
    })
}
