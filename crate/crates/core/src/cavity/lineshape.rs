use nalgebra::{Matrix4, Vector4};

use super::CavityError;
use crate::types::Spectrum;

/// Position and width of one resonance. Energies and times in a.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakReport {
    pub e_peak: f64,
    pub fwhm: f64,
    /// `ħ/fwhm`.
    pub tau: f64,
    /// `(right half-width − left half-width) / fwhm`.
    pub asymmetry: f64,
    pub fano_q: Option<f64>,
}

fn window_range(spectrum: &Spectrum, (lo, hi): (f64, f64), min: usize) -> Result<(usize, usize), CavityError> {
    let a = spectrum.grid.partition_point(|&x| x < lo);
    let b = spectrum.grid.partition_point(|&x| x <= hi);
    if b < a + min {
        return Err(CavityError::TooFewPoints(lo, hi, min));
    }
    Ok((a, b))
}

/// Vertex of the parabola through three points, if it opens downwards.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[1] + (xv - x[1]) * (b + a * (xv + x[1]));
    (xv >= x[0] && xv <= x[2]).then_some((xv, yv))
}

/// Finds the highest peak inside `window` and measures its half-maximum width.
pub fn extract_peak(spectrum: &Spectrum, window: (f64, f64)) -> Result<PeakReport, CavityError> {
    let (a, b) = window_range(spectrum, window, 3)?;
    let (x, y) = (&spectrum.grid, &spectrum.values);
    let imax = (a..b).max_by(|&i, &j| y[i].total_cmp(&y[j])).unwrap();
    if imax == a || imax == b - 1 || !(y[imax] > 0.0) {
        return Err(CavityError::NoMaximum(window.0, window.1));
    }
    let (e_peak, height) = parabola_vertex(
        [x[imax - 1], x[imax], x[imax + 1]],
        [y[imax - 1], y[imax], y[imax + 1]],
    )
    .filter(|&(_, h)| h >= y[imax])
    .unwrap_or((x[imax], y[imax]));
    let half = 0.5 * height;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);

    let left = (a..imax)
        .rev()
        .find(|&i| y[i] < half)
        .map(|i| cross(i, i + 1))
        .ok_or(CavityError::CrossingOutside { side: "left" })?;
    let right = (imax + 1..b)
        .find(|&i| y[i] < half)
        .map(|i| cross(i - 1, i))
        .ok_or(CavityError::CrossingOutside { side: "right" })?;
    let fwhm = right - left;
    Ok(PeakReport {
        e_peak,
        fwhm,
        tau: 1.0 / fwhm,
        asymmetry: ((right - e_peak) - (e_peak - left)) / fwhm,
        fano_q: None,
    })
}

/// Fano parameters for `A (1 + ε/q)² / (1 + ε²)`, `ε = 2(ω − E_r)/γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoFit {
    /// Asymmetry parameter; infinite for an exact Lorentzian.
    pub q: f64,
    pub gamma: f64,
    pub e_r: f64,
    /// Peak height of the Lorentzian limit, `A`.
    pub amplitude: f64,
    /// Root-mean-square residual relative to the largest data value.
    pub residual: f64,
}

/// `A (1 + pε)² / (1 + ε²)` with `p = 1/q`; equals `A q⁻²(q + ε)²/(1 + ε²)`.
pub fn fano_profile(omega: f64, amplitude: f64, p: f64, e_r: f64, gamma: f64) -> f64 {
    let eps = 2.0 * (omega - e_r) / gamma;
    amplitude * (1.0 + p * eps).powi(2) / (1.0 + eps * eps)
}

const FIT_MAX_ITER: usize = 500;

/// Levenberg–Marquardt on scaled data; returns (params, cost, converged, trace).
fn levenberg_marquardt(u: &[f64], y: &[f64], start: Vector4<f64>) -> (Vector4<f64>, f64, bool, Vec<f64>) {
    let model = |t: &Vector4<f64>, x: f64| fano_profile(x, t[0], t[1], t[2], t[3]);
    let cost = |t: &Vector4<f64>| u.iter().zip(y).map(|(&x, &v)| (v - model(t, x)).powi(2)).sum::<f64>();
    let mut theta = start;
    let mut c = cost(&theta);
    let mut damping = 1e-3;
    let mut trace = vec![c];
    for _ in 0..FIT_MAX_ITER {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        let (amp, p, e, g) = (theta[0], theta[1], theta[2], theta[3]);
        for (&x, &v) in u.iter().zip(y) {
            let eps = 2.0 * (x - e) / g;
            let den = 1.0 + eps * eps;
            let lin = 1.0 + p * eps;
            let num = lin * lin;
            let f = amp * num / den;
            let df_deps = amp * (2.0 * p * lin * den - num * 2.0 * eps) / (den * den);
            let j = Vector4::new(
                num / den,
                amp * 2.0 * lin * eps / den,
                df_deps * (-2.0 / g),
                df_deps * (-eps / g),
            );
            jtj += j * j.transpose();
            jtr += j * (v - f);
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += damping * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&jtr)) else {
                damping *= 4.0;
                continue;
            };
            let trial = theta + step;
            let ct = if trial[3] > 0.0 { cost(&trial) } else { f64::INFINITY };
            if ct < c {
                let rel = (c - ct) / c.max(f64::MIN_POSITIVE);
                let small = step.norm() <= 1e-12 * (theta.norm() + 1e-12);
                theta = trial;
                c = ct;
                damping = (damping / 3.0).max(1e-15);
                trace.push(c);
                if rel < 1e-14 || small || c < 1e-30 {
                    return (theta, c, true, trace);
                }
                improved = true;
                break;
            }
            damping *= 2.0;
        }
        if !improved {
            // No downhill step at any damping: a (local) minimum.
            return (theta, c, true, trace);
        }
    }
    (theta, c, false, trace)
}

/// Least-squares Fano fit of the single feature inside `window`.
pub fn fit_fano(spectrum: &Spectrum, window: (f64, f64)) -> Result<FanoFit, CavityError> {
    let (a, b) = window_range(spectrum, window, 5)?;
    let xs = &spectrum.grid[a..b];
    let ys = &spectrum.values[a..b];
    let ymax = ys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ymax == 0.0 {
        return Err(CavityError::NoMaximum(window.0, window.1));
    }
    let (e0, g0) = match extract_peak(spectrum, window) {
        Ok(r) => (r.e_peak, r.fwhm),
        Err(_) => {
            let i = (0..ys.len()).max_by(|&i, &j| ys[i].total_cmp(&ys[j])).unwrap();
            (xs[i], 0.1 * (window.1 - window.0))
        }
    };
    // Fit in units centred on the peak and scaled by its width.
    let u: Vec<f64> = xs.iter().map(|&x| (x - e0) / g0).collect();
    let y: Vec<f64> = ys.iter().map(|&v| v / ymax).collect();

    let mut best: Option<(Vector4<f64>, f64, bool, Vec<f64>)> = None;
    for p0 in [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
        let height = 1.0 / (1.0 + p0 * p0);
        let run = levenberg_marquardt(&u, &y, Vector4::new(height, p0, 0.0, 1.0));
        if best.as_ref().map_or(true, |b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (theta, cost, converged, trace) = best.unwrap();
    if !converged || !theta.iter().all(|t| t.is_finite()) {
        let tail = trace[trace.len().saturating_sub(10)..].to_vec();
        return Err(CavityError::FitNotConverged {
            iterations: FIT_MAX_ITER,
            trace: tail,
        });
    }
    Ok(FanoFit {
        q: 1.0 / theta[1],
        gamma: theta[3] * g0,
        e_r: e0 + theta[2] * g0,
        amplitude: theta[0] * ymax,
        residual: (cost / u.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{linspace, SpectrumKind};
    use crate::units::{ev_to_au, AU_TIME_FS};

    fn lorentzian(grid: &[f64], e: f64, half: f64) -> Spectrum {
        let v = grid.iter().map(|&x| half / (std::f64::consts::PI * ((x - e).powi(2) + half * half))).collect();
        Spectrum::new(grid.to_vec(), v, SpectrumKind::Matter, 0.0).unwrap()
    }

    #[test]
    fn lorentzian_width_gives_32fs_lifetime() {
        let half = ev_to_au(0.0102);
        let e = ev_to_au(6.88);
        let grid = linspace(e - 40.0 * half, e + 40.0 * half, 8001);
        let r = extract_peak(&lorentzian(&grid, e, half), (grid[0], grid[8000])).unwrap();
        assert!((r.fwhm / (2.0 * half) - 1.0).abs() < 1e-4);
        assert!((r.tau * AU_TIME_FS - 32.27).abs() < 0.01);
        assert!(r.asymmetry.abs() < 1e-4);
        assert!((r.e_peak - e).abs() < 1e-3 * half);
        assert!((r.tau * r.fwhm - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn peak_errors() {
        let grid = linspace(0.0, 1.0, 101);
        let s = lorentzian(&grid, 0.5, 0.03);
        assert!(matches!(extract_peak(&s, (0.0, 0.3)), Err(CavityError::NoMaximum(..))));
        assert!(matches!(
            extract_peak(&s, (0.49, 0.6)),
            Err(CavityError::CrossingOutside { side: "left" })
        ));
        let rising = Spectrum::new(grid.clone(), grid.clone(), SpectrumKind::Matter, 0.0).unwrap();
        assert!(extract_peak(&rising, (0.0, 1.0)).is_err());
    }

    #[test]
    fn lorentzian_fits_with_large_q() {
        let grid = linspace(0.0, 2.0, 801);
        let fit = fit_fano(&lorentzian(&grid, 1.0, 0.05), (0.0, 2.0)).unwrap();
        assert!(fit.q.abs() > 50.0, "{fit:?}");
        assert!(fit.residual < 1e-6);
        assert!((fit.gamma - 0.1).abs() < 1e-6);
    }

    #[test]
    fn recovers_fano_asymmetry() {
        let grid = linspace(0.0, 2.0, 801);
        let v = grid.iter().map(|&x| fano_profile(x, 2.0, 1.0, 1.0, 0.1)).collect();
        let s = Spectrum::new(grid, v, SpectrumKind::Matter, 0.0).unwrap();
        let fit = fit_fano(&s, (0.0, 2.0)).unwrap();
        assert!((fit.q - 1.0).abs() < 0.05, "{fit:?}");
        assert!((fit.e_r - 1.0).abs() < 1e-6);
    }
}
