//! Photon environments, Wigner–Weisskopf rates and lineshape analysis.

mod lineshape;
mod modes;
mod rates;

use thiserror::Error;

pub use lineshape::{extract_peak, fit_fano, fano_profile, FanoFit, PeakReport};
pub use modes::{add_strong_modes, gen_modes_1d, pole_aligned_grid, CavitySpec1D};
pub use rates::{ww_rate_1d, ww_rate_3d, Rate};

#[derive(Debug, Error, PartialEq)]
pub enum CavityError {
    #[error("{0} must be positive and finite")]
    NotPositive(&'static str),
    #[error("emitter position x0 = {x0} lies outside [0, {lx}]")]
    PositionOutside { x0: f64, lx: f64 },
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("window ({0}, {1}) contains no cavity modes")]
    EmptyWindow(f64, f64),
    #[error("need at least two coupled poles to build a grid")]
    TooFewPoles,
    #[error("no local maximum inside ({0}, {1})")]
    NoMaximum(f64, f64),
    #[error("{side} half-maximum crossing lies outside the search window")]
    CrossingOutside { side: &'static str },
    #[error("window ({0}, {1}) holds fewer than {2} grid points")]
    TooFewPoints(f64, f64, usize),
    #[error("Fano fit did not converge after {iterations} iterations (residual trace {trace:?})")]
    FitNotConverged { iterations: usize, trace: Vec<f64> },
}
