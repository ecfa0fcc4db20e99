use std::io::Write;
use std::path::Path;

use qedr_core::casida::{solve_structured_with, PhotonVectors, StructuredOptions};
use qedr_core::cavity::{
    add_strong_modes, extract_peak, fit_fano, gen_modes_1d, pole_aligned_grid, ww_rate_1d, ww_rate_3d,
    CavitySpec1D,
};
use qedr_core::rabi::{response, RabiMethod, RabiParams, ResponsePair};
use qedr_core::spectra::{broaden_sticks, cross_section, strengths, StrengthSet};
use qedr_core::units::{
    angstrom_to_bohr, au_to_ev, convert, ev_to_au, Unit, AU_TIME_FS, BOHR_ANGSTROM, HARTREE_EV,
};
use qedr_core::{
    assemble_blocks, solve_dense, solve_nonhermitian_reference, CoupledSystem, PhotonMode, Solution, Spectrum,
    SpectrumKind, Vec3,
};
use serde::Serialize;

use crate::args::*;
use crate::config::{parse_grid, parse_window, spectrum_request, system_source, GridSpec, RunConfig, SpectrumRequest, SystemSource};
use crate::error::{CliError, Result};
use crate::io::{self, fmt_f64, ExcitationRow};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Rabi(a) => rabi(a),
        Command::Solve(a) => solve(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Modes(ModesCommand::Gen1d(a)) => gen_1d(a),
        Command::Lifetime(a) => lifetime(a),
        Command::Ww(a) => ww(a),
    }
}

fn write_err(e: std::io::Error) -> CliError {
    CliError::input(format!("write failed: {e}"))
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = io::output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::input(format!("write failed: {e}")))?;
    writeln!(w).map_err(write_err)?;
    w.flush().map_err(write_err)
}

fn rabi(a: RabiArgs) -> Result<()> {
    let params = RabiParams::new(a.omega0, a.omegac, a.lambda).with_n_fock(a.n_fock);
    let method = match a.method {
        Method::Exact => RabiMethod::Exact,
        Method::Prpa => RabiMethod::Prpa,
        Method::Rwa => RabiMethod::Rwa,
    };
    let pair = match a.pair {
        Pair::SigmaSigma => ResponsePair::SigmaSigma,
        Pair::QQ => ResponsePair::QQ,
        Pair::SigmaQ => ResponsePair::SigmaQ,
        Pair::QSigma => ResponsePair::QSigma,
    };
    let chi = response(&params, method, pair)?;
    let mut w = io::output(a.out.as_deref())?;
    writeln!(w, "Omega,weight").map_err(write_err)?;
    for p in chi.poles.iter().filter(|p| p.weight.abs() > a.min_weight) {
        writeln!(w, "{},{}", fmt_f64(p.omega), fmt_f64(p.weight)).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    drop(w);
    match (&a.grid, &a.spectrum_out) {
        (Some(g), out) => {
            let s = chi.spectrum(&parse_grid(g, "--grid")?, a.eta)?;
            let mut w = io::output(out.as_deref())?;
            writeln!(w, "omega,value").map_err(write_err)?;
            for (x, v) in s.grid.iter().zip(&s.values) {
                writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*v)).map_err(write_err)?;
            }
            w.flush().map_err(write_err)
        }
        (None, Some(_)) => Err(CliError::input("--spectrum-out needs --grid")),
        (None, None) => Ok(()),
    }
}

fn load_system(source: &SystemSource, self_energy: bool) -> Result<CoupledSystem> {
    let (transitions, modes) = match source {
        SystemSource::Files { transitions, modes } => (io::load_transitions(transitions)?, modes),
        SystemSource::Inline { omega, dipole, modes } => {
            let t = qedr_core::Transition::new(0, *omega, *dipole, Vec3::zeros())
                .map_err(|e| CliError::input(e.to_string()))?;
            (vec![t], modes)
        }
        SystemSource::Rabi(_) => return Err(CliError::input("Rabi parameters are handled by the rabi command")),
    };
    let modes = match modes {
        Some(p) => io::load_modes(p)?,
        None => Vec::new(),
    };
    Ok(CoupledSystem::new(transitions, modes).with_self_energy(self_energy))
}

fn solve_system(cfg: &RunConfig, system: &CoupledSystem) -> Result<Solution> {
    let blocks = assemble_blocks(system)?;
    let sol = match cfg.solver {
        Solver::Dense => solve_dense(&blocks)?,
        Solver::Reference => solve_nonhermitian_reference(system)?,
        Solver::Structured => {
            let (lo, hi) = cfg.window.expect("validated");
            let photon_vectors = match cfg.photon_vectors {
                PhotonVectorsArg::Full => PhotonVectors::Full,
                PhotonVectorsArg::NormOnly => PhotonVectors::NormOnly,
            };
            solve_structured_with(&blocks, (lo, hi), &StructuredOptions { photon_vectors })?
        }
    };
    if let Some(x) = sol.excitations.iter().find(|x| x.unstable) {
        return Err(CliError::numerical(format!("unstable excitation with Omega^2 = {:e}", x.omega_sq)));
    }
    Ok(sol)
}

fn excitation_rows(set: &StrengthSet) -> Vec<ExcitationRow> {
    (0..set.len())
        .map(|i| {
            let mixed = set.mixed.as_ref().map(|m| m[i]);
            ExcitationRow {
                omega: set.omega[i],
                f_nn: set.f_nn[i],
                f_pn: mixed.map(|m| m.f_pn),
                f_pp: mixed.map(|m| m.f_pp),
                sigma_e: set.sigma_e[i],
                sigma_p: set.sigma_p[i],
            }
        })
        .collect()
}

fn column(rows: &[ExcitationRow], kind: Kind) -> Result<Vec<f64>> {
    let pick = |f: fn(&ExcitationRow) -> Option<f64>, name: &str| {
        rows.iter()
            .map(|r| f(r))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::input(format!("{name} is missing; solve with --photon-vectors full")))
    };
    match kind {
        Kind::Matter | Kind::CrossSection => Ok(rows.iter().map(|r| r.f_nn).collect()),
        Kind::Photon => pick(|r| r.f_pp, "f_pp"),
        Kind::Mixed => pick(|r| r.f_pn, "f_pn"),
    }
}

/// The requested spectrum in a.u. and the factor to file units.
pub fn build_spectrum(
    rows: &[ExcitationRow],
    req: &SpectrumRequest,
    modes: &[PhotonMode],
    window: Option<(f64, f64)>,
) -> Result<(Spectrum, f64)> {
    let grid = match &req.grid {
        GridSpec::Points(g) => g.clone(),
        GridSpec::PoleAligned => pole_aligned_grid(modes, window)?,
    };
    let omega: Vec<f64> = rows.iter().map(|r| r.omega).collect();
    let weight = column(rows, req.kind)?;
    let per_ev = 1.0 / HARTREE_EV;
    Ok(match req.kind {
        Kind::CrossSection => {
            let set = StrengthSet {
                omega,
                f_nn: weight,
                mixed: None,
                sigma_e: rows.iter().map(|r| r.sigma_e).collect(),
                sigma_p: rows.iter().map(|r| r.sigma_p).collect(),
                window: None,
            };
            (cross_section(&set, &grid, req.eta, req.divisor)?, BOHR_ANGSTROM * BOHR_ANGSTROM)
        }
        Kind::Matter => (broaden_sticks(&omega, &weight, req.delta, &grid, SpectrumKind::Matter)?, per_ev),
        Kind::Photon => (broaden_sticks(&omega, &weight, req.delta, &grid, SpectrumKind::Photon)?, per_ev),
        Kind::Mixed => (broaden_sticks(&omega, &weight, req.delta, &grid, SpectrumKind::Mixed)?, per_ev),
    })
}

fn window_au(s: &Option<String>, flag: &str) -> Result<Option<(f64, f64)>> {
    s.as_deref()
        .map(|w| parse_window(w, flag).map(|(lo, hi)| (ev_to_au(lo), ev_to_au(hi))))
        .transpose()
}

fn solve(a: SolveArgs) -> Result<()> {
    let spectra = match &a.spectrum_out {
        Some(p) => vec![spectrum_request(&a.spectrum, Some(p))?],
        None => Vec::new(),
    };
    let cfg = RunConfig {
        source: system_source(&a.system)?,
        solver: a.solver,
        window: window_au(&a.window_ev, "--window-eV")?,
        self_energy: a.system.self_energy,
        photon_vectors: a.photon_vectors,
        spectra,
        excitations_out: a.out.clone(),
    };
    cfg.validate()?;
    let system = load_system(&cfg.source, cfg.self_energy)?;
    let sol = solve_system(&cfg, &system)?;
    let rows = excitation_rows(&strengths(&sol, &system)?);
    io::write_excitations(io::output(cfg.excitations_out.as_deref())?, &rows)?;
    for req in &cfg.spectra {
        let (s, scale) = build_spectrum(&rows, req, &system.modes, cfg.window)?;
        io::write_spectrum(io::output(req.out.as_deref())?, &s, scale)?;
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let req = spectrum_request(&a.spectrum, a.out.as_deref())?;
    let modes = match (&a.modes, &req.grid) {
        (Some(p), _) => io::load_modes(p)?,
        (None, GridSpec::PoleAligned) => return Err(CliError::input("--pole-grid needs --modes")),
        (None, _) => Vec::new(),
    };
    let rows = io::load_excitations(&a.excitations)?;
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no excitations", a.excitations.display())));
    }
    let (s, scale) = build_spectrum(&rows, &req, &modes, window_au(&a.window_ev, "--window-eV")?)?;
    io::write_spectrum(io::output(req.out.as_deref())?, &s, scale)
}

fn gen_1d(a: Gen1dArgs) -> Result<()> {
    let lx = match (a.lx_um, a.coupled_spacing_ev) {
        (Some(l), None) => convert(l, Unit::Micrometer, Unit::Bohr).expect("lengths"),
        (None, Some(d)) if d > 0.0 && d.is_finite() => CavitySpec1D::lx_for_coupled_spacing(ev_to_au(d)),
        (None, Some(d)) => return Err(CliError::input(format!("--coupled-spacing-eV must be positive, got {d}"))),
        _ => return Err(CliError::input("give exactly one of --lx-um and --coupled-spacing-eV")),
    };
    let window = window_au(&a.window_ev, "--window-eV")?;
    let count = match (a.count, window) {
        (Some(c), _) => c,
        (None, Some(_)) => u64::MAX,
        (None, None) => return Err(CliError::input("give --count or --window-eV")),
    };
    if !(0.0..=1.0).contains(&a.x0_frac) {
        return Err(CliError::input(format!("--x0-frac must lie in [0, 1], got {}", a.x0_frac)));
    }
    let spec = CavitySpec1D {
        lx,
        ly: angstrom_to_bohr(a.ly_a),
        lz: angstrom_to_bohr(a.lz_a),
        x0: a.x0_frac * lx,
        count,
        window,
    };
    let mut modes = gen_modes_1d(&spec)?;
    if !a.strong_mode.is_empty() {
        let extra = a
            .strong_mode
            .iter()
            .map(|s| {
                let bad = || CliError::input(format!("--strong-mode: expected omega_eV:scale, got '{s}'"));
                let (w, k) = s.split_once(':').ok_or_else(bad)?;
                let w: f64 = w.trim().parse().map_err(|_| bad())?;
                let k: f64 = k.trim().parse().map_err(|_| bad())?;
                Ok((ev_to_au(w), k))
            })
            .collect::<Result<Vec<_>>>()?;
        modes = add_strong_modes(modes, Vec3::new(spec.amplitude(), 0.0, 0.0), &extra)?;
    }
    io::write_modes(io::output(a.out.as_deref())?, &modes)
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct LifetimeReport {
    e_peak_eV: f64,
    fwhm_eV: f64,
    tau_fs: f64,
    asymmetry: f64,
    fano_q: Option<f64>,
    excitations: usize,
    coupled_modes: usize,
}

fn lifetime(a: LifetimeArgs) -> Result<()> {
    let source = system_source(&a.system)?;
    let window = window_au(&Some(a.window_ev.clone()), "--window-eV")?;
    let peak_window = window_au(&a.peak_window_ev, "--peak-window-eV")?.or(window).expect("window given");
    let cfg = RunConfig {
        source,
        solver: Solver::Structured,
        window,
        self_energy: a.system.self_energy,
        photon_vectors: PhotonVectorsArg::NormOnly,
        spectra: vec![SpectrumRequest {
            kind: Kind::Matter,
            grid: GridSpec::PoleAligned,
            delta: 0.0,
            eta: qedr_core::spectra::DEFAULT_ETA,
            divisor: qedr_core::spectra::DEFAULT_TRACE_DIVISOR,
            out: a.spectrum_out.clone(),
        }],
        excitations_out: None,
    };
    cfg.validate()?;
    let system = load_system(&cfg.source, cfg.self_energy)?;
    let sol = solve_system(&cfg, &system)?;
    let rows = excitation_rows(&strengths(&sol, &system)?);
    let (spec, scale) = build_spectrum(&rows, &cfg.spectra[0], &system.modes, cfg.window)?;
    let mut peak = extract_peak(&spec, peak_window)?;
    if a.fano {
        peak.fano_q = Some(fit_fano(&spec, peak_window)?.q);
    }
    if let Some(p) = &cfg.spectra[0].out {
        io::write_spectrum(io::output(Some(p))?, &spec, scale)?;
    }
    let report = LifetimeReport {
        e_peak_eV: au_to_ev(peak.e_peak),
        fwhm_eV: au_to_ev(peak.fwhm),
        tau_fs: peak.tau * AU_TIME_FS,
        asymmetry: peak.asymmetry,
        fano_q: peak.fano_q,
        excitations: rows.len(),
        coupled_modes: system.modes.iter().filter(|m| !m.is_decoupled()).count(),
    };
    write_json(&report, a.out.as_deref())
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct RateReport {
    dim: &'static str,
    omega0_eV: f64,
    dipole_eA: f64,
    gamma_eV: f64,
    tau_fs: f64,
}

fn ww(a: WwArgs) -> Result<()> {
    let omega = ev_to_au(a.omega0_ev);
    let d = Vec3::new(angstrom_to_bohr(a.dipole_ea), 0.0, 0.0);
    let (dim, rate) = match a.dim {
        Dim::Three => ("3d", ww_rate_3d(omega, &d)?),
        Dim::One => {
            let (Some(ly), Some(lz)) = (a.ly_a, a.lz_a) else {
                return Err(CliError::input("--dim 1d needs --ly-A and --lz-A"));
            };
            ("1d", ww_rate_1d(omega, &d, angstrom_to_bohr(ly), angstrom_to_bohr(lz))?)
        }
    };
    write_json(
        &RateReport {
            dim,
            omega0_eV: a.omega0_ev,
            dipole_eA: a.dipole_ea,
            gamma_eV: au_to_ev(rate.gamma),
            tau_fs: rate.tau * AU_TIME_FS,
        },
        a.out.as_deref(),
    )
}
