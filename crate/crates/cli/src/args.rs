//! Command-line surface. Every long flag is also a config-file key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qedr", version, about = "Linear-response spectra of matter coupled to quantized photon modes")]
pub struct Cli {
    /// Flat `key = value` file; its keys are long flags, command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, pRPA or RWA response of the Rabi model (dimensionless units).
    #[command(args_override_self = true)]
    Rabi(RabiArgs),
    /// Solve the coupled problem and write excitations with their strengths.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Build a spectrum from an excitations file.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Photon mode generators.
    #[command(subcommand)]
    Modes(ModesCommand),
    /// Radiative linewidth and lifetime from a densely sampled mode continuum.
    #[command(args_override_self = true)]
    Lifetime(LifetimeArgs),
    /// Wigner–Weisskopf decay rate in free space or a 1D waveguide.
    #[command(args_override_self = true)]
    Ww(WwArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModesCommand {
    /// Standing-wave modes of a 1D cavity.
    #[command(name = "gen-1d", args_override_self = true)]
    Gen1d(Gen1dArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Prpa,
    Rwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pair {
    SigmaSigma,
    QQ,
    SigmaQ,
    QSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Dense,
    Structured,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhotonVectorsArg {
    Full,
    NormOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Binned or Lorentzian-broadened f_nn, per eV.
    Matter,
    /// Photon strengths f_pp, per eV.
    Photon,
    /// Mixed strengths f_pn, per eV.
    Mixed,
    /// Photoabsorption cross section in Å².
    CrossSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dim {
    #[value(name = "1d")]
    One,
    #[value(name = "3d")]
    Three,
}

#[derive(Debug, Args)]
pub struct RabiArgs {
    #[arg(long)]
    pub omega0: f64,
    #[arg(long)]
    pub omegac: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "sigma-sigma")]
    pub pair: Pair,
    #[arg(long, default_value_t = qedr_core::rabi::DEFAULT_N_FOCK)]
    pub n_fock: usize,
    /// Poles with |weight| at or below this are dropped from the output.
    #[arg(long, default_value_t = 0.0)]
    pub min_weight: f64,
    /// Spectrum grid `lo:hi:n`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = qedr_core::rabi::DEFAULT_ETA)]
    pub eta: f64,
    /// Pole list `Omega, weight`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
}

/// Where the coupled system comes from.
#[derive(Debug, Args)]
pub struct SystemArgs {
    #[arg(long)]
    pub transitions: Option<PathBuf>,
    /// A single transition at the reference point, dipole along x.
    #[arg(long = "omega0-eV")]
    pub omega0_ev: Option<f64>,
    #[arg(long = "dipole-eA")]
    pub dipole_ea: Option<f64>,
    /// Mode file; an absent file means no photon modes.
    #[arg(long)]
    pub modes: Option<PathBuf>,
    /// Include the dipole self-energy in the electronic kernel.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub self_energy: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumRequestArgs {
    #[arg(long, value_enum, default_value = "matter")]
    pub kind: Kind,
    /// Grid `lo:hi:n` in eV.
    #[arg(long = "grid-eV")]
    pub grid_ev: Option<String>,
    /// Grid at midpoints of consecutive coupled mode frequencies.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub pole_grid: bool,
    /// Lorentzian half width; 0 bins the sticks into grid cells.
    #[arg(long = "delta-eV", default_value_t = 0.0)]
    pub delta_ev: f64,
    /// Damping of the cross section.
    #[arg(long = "eta-eV")]
    pub eta_ev: Option<f64>,
    #[arg(long, default_value_t = qedr_core::spectra::DEFAULT_TRACE_DIVISOR)]
    pub divisor: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value = "dense")]
    pub solver: Solver,
    /// Energy window `lo:hi` in eV; required by the structured solver.
    #[arg(long = "window-eV")]
    pub window_ev: Option<String>,
    #[arg(long, value_enum, default_value = "full")]
    pub photon_vectors: PhotonVectorsArg,
    /// Excitations CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a spectrum of the fresh solution.
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
    #[command(flatten)]
    pub spectrum: SpectrumRequestArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub excitations: PathBuf,
    /// Mode file for `--pole-grid`.
    #[arg(long)]
    pub modes: Option<PathBuf>,
    /// Restricts the pole grid, `lo:hi` in eV.
    #[arg(long = "window-eV")]
    pub window_ev: Option<String>,
    #[command(flatten)]
    pub spectrum: SpectrumRequestArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Gen1dArgs {
    #[arg(long = "lx-um")]
    pub lx_um: Option<f64>,
    /// Alternative to `--lx-um`: spacing of the coupled (odd) modes.
    #[arg(long = "coupled-spacing-eV")]
    pub coupled_spacing_ev: Option<f64>,
    #[arg(long = "ly-A")]
    pub ly_a: f64,
    #[arg(long = "lz-A")]
    pub lz_a: f64,
    /// Emitter position as a fraction of L_x.
    #[arg(long, default_value_t = 0.5)]
    pub x0_frac: f64,
    /// Highest mode number.
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long = "window-eV")]
    pub window_ev: Option<String>,
    /// Extra mode `omega_eV:scale` with coupling scale × √(8π/V) along x; repeatable.
    #[arg(long)]
    pub strong_mode: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Solve window `lo:hi` in eV.
    #[arg(long = "window-eV")]
    pub window_ev: String,
    /// Peak search window `lo:hi` in eV; defaults to the solve window.
    #[arg(long = "peak-window-eV")]
    pub peak_window_ev: Option<String>,
    /// Also fit a Fano profile over the peak window.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub fano: bool,
    /// Peak report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WwArgs {
    #[arg(long, value_enum)]
    pub dim: Dim,
    #[arg(long = "omega0-eV")]
    pub omega0_ev: f64,
    #[arg(long = "dipole-eA")]
    pub dipole_ea: f64,
    #[arg(long = "ly-A")]
    pub ly_a: Option<f64>,
    #[arg(long = "lz-A")]
    pub lz_a: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
