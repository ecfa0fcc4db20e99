use faer::Mat;

use super::assemble::{coupling_products, kernel_matrix};
use super::{sort_excitations, CasidaError, CoupledSystem, Solution};
use crate::types::Excitation;

/// Largest `n + M` accepted by [`solve_nonhermitian_reference`].
pub const REFERENCE_LIMIT: usize = 500;

/// Solves the unreduced four-block problem
///
/// ```text
/// ┌ L K M M ┐       ┌ 1          ┐
/// │ K L M M │ x = Ω │   -1       │ x
/// │ N N ω 0 │       │      1     │
/// └ N N 0 ω ┘       └         -1 ┘
/// ```
///
/// with `L = diag(ω_q) + K`, `M_qα = −ω_α λ_α·d_q`, `N_αq = −½ λ_α·d_q`, and
/// keeps the positive-frequency branch. Intended as an independent check on
/// the Hermitian reduction, not for production use.
pub fn solve_nonhermitian_reference(system: &CoupledSystem) -> Result<Solution, CasidaError> {
    let k = kernel_matrix(system)?;
    let (n, m) = (system.n(), system.m());
    let size = n + m;
    if size > REFERENCE_LIMIT {
        return Err(CasidaError::ReferenceTooLarge {
            size,
            limit: REFERENCE_LIMIT,
        });
    }
    let g = coupling_products(system);
    let w: Vec<f64> = system.modes.iter().map(|p| p.omega).collect();

    // Row/column offsets of the X, Y, A, B blocks.
    let (ox, oy, oa, ob) = (0, n, 2 * n, 2 * n + m);
    let mut a = Mat::<f64>::zeros(2 * size, 2 * size);
    for i in 0..n {
        for j in 0..n {
            let l = k[(i, j)] + if i == j { system.transitions[i].omega } else { 0.0 };
            a[(ox + i, ox + j)] = l;
            a[(oy + i, oy + j)] = l;
            a[(ox + i, oy + j)] = k[(i, j)];
            a[(oy + i, ox + j)] = k[(i, j)];
        }
        for al in 0..m {
            let mm = -w[al] * g[(i, al)];
            let nn = -0.5 * g[(i, al)];
            for (row, col) in [(ox, oa), (ox, ob), (oy, oa), (oy, ob)] {
                a[(row + i, col + al)] = mm;
            }
            for (row, col) in [(oa, ox), (oa, oy), (ob, ox), (ob, oy)] {
                a[(row + al, col + i)] = nn;
            }
        }
    }
    for al in 0..m {
        a[(oa + al, oa + al)] = w[al];
        a[(ob + al, ob + al)] = w[al];
    }
    // Multiply by the metric so the generalized problem becomes a standard one.
    for r in (oy..oy + n).chain(ob..ob + m) {
        for c in 0..2 * size {
            a[(r, c)] = -a[(r, c)];
        }
    }

    let evd = a.eigen().map_err(|_| CasidaError::Eigensolver)?;
    let s = evd.S();
    let u = evd.U();
    let mut excitations = Vec::with_capacity(size);
    for col in 0..2 * size {
        let z = s[col];
        if !(z.re > 0.0) || z.im.abs() > 1e-8 * z.re.abs() {
            continue;
        }
        // Fix the arbitrary complex phase on the largest component.
        let (mut best, mut pivot) = (0.0, None);
        for r in 0..2 * size {
            let x = u[(r, col)];
            let mag = (x.re * x.re + x.im * x.im).sqrt();
            if mag > best {
                best = mag;
                pivot = Some(x);
            }
        }
        let Some(p) = pivot else { continue };
        let phase = (p.re / best, -p.im / best);
        let re = |r: usize| {
            let x = u[(r, col)];
            x.re * phase.0 - x.im * phase.1
        };
        let evec_e = (0..n)
            .map(|q| (re(ox + q) + re(oy + q)) / system.transitions[q].omega.sqrt())
            .collect();
        let evec_p = (0..m)
            .map(|al| -std::f64::consts::SQRT_2 * (re(oa + al) + re(ob + al)))
            .collect();
        excitations.push(Excitation::from_eigenpair(z.re * z.re, evec_e, evec_p));
    }
    sort_excitations(&mut excitations);
    Ok(Solution {
        excitations,
        window: None,
    })
}
