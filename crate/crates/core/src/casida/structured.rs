//! Window solver for few transitions coupled to many modes.
//!
//! Eigenvalues below a shift μ are counted with the Haynsworth inertia
//! formula, `#(ω_α² < μ) + neg(S(μ))` with the Schur complement
//! `S(μ) = U − μ − Σ_α v_α v_αᵀ / (ω_α² − μ)`, which costs O(n²M + n³).
//! Between consecutive poles `S` is smooth and strictly decreasing, so each
//! eigenvalue there is the unique zero of one ordered eigenvalue branch of
//! `S` and is refined by safeguarded Newton.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::{sort_excitations, CasidaError, CoupledBlocks, Solution};
use crate::types::Excitation;

/// Poles closer than this (relative) are treated as degenerate.
const POLE_TOL: f64 = 1e-13;
/// Relative threshold below which a Gram eigenvalue counts as null.
const NULL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 400;

/// What to keep of the photon part of each eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhotonVectors {
    /// Full `P₁`, one entry per mode.
    #[default]
    Full,
    /// Only `σ_p`; `evec_p` is left empty. Use for very large mode sets.
    NormOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructuredOptions {
    pub photon_vectors: PhotonVectors,
}

/// A set of coupled poles at (numerically) one frequency.
struct Group {
    d: f64,
    omega: f64,
    /// Sorted-order mode indices.
    members: Vec<usize>,
    /// Orthonormal g×g rotation; the first `rank` columns couple, the rest are null.
    basis: DMatrix<f64>,
    rank: usize,
    first_col: usize,
}

struct Prepared<'a> {
    blocks: &'a CoupledBlocks,
    n: usize,
    /// Effective coupling columns, n entries each.
    w: Vec<f64>,
    col_d: Vec<f64>,
    groups: Vec<Group>,
    deflated: Vec<usize>,
}

enum Segment {
    Regular(f64, f64),
    Pole(usize, f64, f64),
}

impl<'a> Prepared<'a> {
    fn new(blocks: &'a CoupledBlocks) -> Self {
        let (n, m) = (blocks.n(), blocks.m());
        let is_coupled = |k: usize| (0..n).any(|q| blocks.v[(q, k)] != 0.0);
        let (coupled, deflated): (Vec<usize>, Vec<usize>) = (0..m).partition(|&k| is_coupled(k));

        let mut groups = Vec::new();
        let mut w = Vec::new();
        let mut col_d = Vec::new();
        let mut i = 0;
        while i < coupled.len() {
            let start = coupled[i];
            let mut j = i + 1;
            while j < coupled.len() && blocks.d[coupled[j]] - blocks.d[start] <= POLE_TOL * blocks.d[coupled[j]] {
                j += 1;
            }
            let members: Vec<usize> = coupled[i..j].to_vec();
            let g = members.len();
            let vg = DMatrix::from_fn(n, g, |q, c| blocks.v[(q, members[c])]);
            let (basis, rank) = if g == 1 {
                (DMatrix::from_element(1, 1, 1.0), 1)
            } else {
                let eig = SymmetricEigen::new(vg.transpose() * &vg);
                let mut order: Vec<usize> = (0..g).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                let top = eig.eigenvalues[order[0]];
                let rank = order
                    .iter()
                    .take_while(|&&k| eig.eigenvalues[k] > NULL_TOL * top)
                    .count()
                    .clamp(1, n.min(g));
                let basis = DMatrix::from_fn(g, g, |r, c| eig.eigenvectors[(r, order[c])]);
                (basis, rank)
            };
            let eff = &vg * basis.columns(0, rank);
            let first_col = col_d.len();
            for c in 0..rank {
                w.extend(eff.column(c).iter());
                col_d.push(blocks.d[start]);
            }
            groups.push(Group {
                d: blocks.d[start],
                omega: blocks.mode_omega[start],
                members,
                basis,
                rank,
                first_col,
            });
            i = j;
        }
        Self {
            blocks,
            n,
            w,
            col_d,
            groups,
            deflated,
        }
    }

    fn col(&self, c: usize) -> &[f64] {
        &self.w[c * self.n..(c + 1) * self.n]
    }

    /// `S(μ)`, optionally leaving out the columns of one group.
    fn schur(&self, mu: f64, skip: Option<usize>) -> DMatrix<f64> {
        let n = self.n;
        let mut s = self.blocks.u.clone();
        for q in 0..n {
            s[(q, q)] -= mu;
        }
        let skipped = skip.map(|g| {
            let grp = &self.groups[g];
            grp.first_col..grp.first_col + grp.rank
        });
        for c in 0..self.col_d.len() {
            if skipped.as_ref().is_some_and(|r| r.contains(&c)) {
                continue;
            }
            let coef = 1.0 / (self.col_d[c] - mu);
            let w = self.col(c);
            for i in 0..n {
                let wi = coef * w[i];
                for j in 0..n {
                    s[(i, j)] -= wi * w[j];
                }
            }
        }
        s
    }

    /// Ascending eigenvalues and eigenvectors of `S(μ)`.
    fn schur_eigen(&self, mu: f64) -> (Vec<f64>, DMatrix<f64>) {
        sorted_eigen(self.schur(mu, None))
    }

    fn neg_count(&self, mu: f64) -> usize {
        if self.n == 1 {
            return usize::from(self.scalar_secular(mu).0 < 0.0);
        }
        self.schur_eigen(mu).0.iter().filter(|&&x| x < 0.0).count()
    }

    fn count(&self, mu: f64) -> usize {
        self.col_d.partition_point(|&d| d < mu) + self.neg_count(mu)
    }

    /// Scalar `S(μ)` and its derivative for n = 1.
    fn scalar_secular(&self, mu: f64) -> (f64, f64) {
        let mut f = self.blocks.u[(0, 0)] - mu;
        let mut df = -1.0;
        for (c, &d) in self.col_d.iter().enumerate() {
            let r = 1.0 / (d - mu);
            let w2 = self.w[c] * self.w[c];
            f -= w2 * r;
            df -= w2 * r * r;
        }
        (f, df)
    }

    /// Branch `idx` of the ordered eigenvalues of `S(μ)` and its derivative.
    fn branch(&self, mu: f64, idx: usize) -> (f64, f64) {
        if self.n == 1 {
            return self.scalar_secular(mu);
        }
        let (vals, vecs) = self.schur_eigen(mu);
        let z = vecs.column(idx);
        let mut df = -z.norm_squared();
        for c in 0..self.col_d.len() {
            let r = 1.0 / (self.col_d[c] - mu);
            let wz: f64 = self.col(c).iter().zip(z.iter()).map(|(a, b)| a * b).sum();
            df -= wz * wz * r * r;
        }
        (vals[idx], df)
    }

    /// Photon components in effective coordinates, `y_c = w_cᵀE / (μ − d_c)`.
    fn photon_effective(&self, mu: f64, e: &[f64], skip: Option<usize>) -> Vec<f64> {
        let skipped = skip.map(|g| {
            let grp = &self.groups[g];
            grp.first_col..grp.first_col + grp.rank
        });
        (0..self.col_d.len())
            .map(|c| {
                if skipped.as_ref().is_some_and(|r| r.contains(&c)) {
                    return 0.0;
                }
                let wz: f64 = self.col(c).iter().zip(e).map(|(a, b)| a * b).sum();
                wz / (mu - self.col_d[c])
            })
            .collect()
    }

    /// Maps effective photon coordinates to a vector in system mode order.
    fn photon_full(&self, y: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.blocks.m()];
        for grp in &self.groups {
            for c in 0..grp.rank {
                let yc = y[grp.first_col + c];
                if yc == 0.0 {
                    continue;
                }
                for (i, &k) in grp.members.iter().enumerate() {
                    p[k] += grp.basis[(i, c)] * yc;
                }
            }
        }
        self.blocks.unsort(&p)
    }

    fn excitation(&self, mu: f64, e: Vec<f64>, y: &[f64], opts: &StructuredOptions) -> Excitation {
        match opts.photon_vectors {
            PhotonVectors::Full => Excitation::from_eigenpair(mu, e, self.photon_full(y)),
            PhotonVectors::NormOnly => {
                Excitation::without_photon_vector(mu, e, y.iter().map(|x| x * x).sum())
            }
        }
    }

    fn trivial(&self, d: f64, omega: f64, sorted_p: Vec<f64>, opts: &StructuredOptions) -> Excitation {
        let e = vec![0.0; self.n];
        let mut x = match opts.photon_vectors {
            PhotonVectors::Full => Excitation::from_eigenpair(d, e, self.blocks.unsort(&sorted_p)),
            PhotonVectors::NormOnly => {
                Excitation::without_photon_vector(d, e, sorted_p.iter().map(|x| x * x).sum())
            }
        };
        x.omega = omega;
        x
    }

    fn half_width(&self, g: usize) -> f64 {
        let d = self.groups[g].d;
        let mut delta = POLE_TOL * d;
        if g > 0 {
            delta = delta.min(0.25 * (d - self.groups[g - 1].d));
        }
        if g + 1 < self.groups.len() {
            delta = delta.min(0.25 * (self.groups[g + 1].d - d));
        }
        delta
    }

    fn segments(&self, mut lo: f64, mut hi: f64) -> Vec<Segment> {
        // Window edges that fall inside a pole neighbourhood are widened to its edge.
        for g in 0..self.groups.len() {
            let (d, delta) = (self.groups[g].d, self.half_width(g));
            if (d - delta..=d + delta).contains(&lo) {
                lo = d - delta;
            }
            if (d - delta..=d + delta).contains(&hi) {
                hi = d + delta;
            }
        }
        let first = self.groups.partition_point(|grp| grp.d < lo);
        let mut out = Vec::new();
        let mut cur = lo;
        for g in first..self.groups.len() {
            let (d, delta) = (self.groups[g].d, self.half_width(g));
            if d - delta >= hi {
                break;
            }
            if d - delta > cur {
                out.push(Segment::Regular(cur, d - delta));
            }
            out.push(Segment::Pole(g, (d - delta).max(cur), (d + delta).min(hi)));
            cur = d + delta;
        }
        if cur < hi {
            out.push(Segment::Regular(cur, hi));
        }
        out
    }

    fn solve_regular(&self, a: f64, b: f64, opts: &StructuredOptions) -> Result<Vec<Excitation>, CasidaError> {
        let neg_a = self.neg_count(a);
        let neg_b = self.neg_count(b);
        if neg_b <= neg_a {
            return Ok(Vec::new());
        }
        let mut roots = Vec::with_capacity(neg_b - neg_a);
        for idx in neg_a..neg_b {
            let mu = safeguarded_newton(|x| self.branch(x, idx), a, b)?;
            roots.push((mu, idx));
        }
        let mut vecs: Vec<(f64, Vec<f64>, Vec<f64>)> = roots
            .iter()
            .map(|&(mu, idx)| {
                let e: Vec<f64> = if self.n == 1 {
                    vec![1.0]
                } else {
                    self.schur_eigen(mu).1.column(idx).iter().copied().collect()
                };
                let y = self.photon_effective(mu, &e, None);
                (mu, e, y)
            })
            .collect();
        orthonormalize_clusters(&mut vecs);
        Ok(vecs
            .into_iter()
            .map(|(mu, e, y)| self.excitation(mu, e, &y, opts))
            .collect())
    }

    fn solve_pole(&self, g: usize, a: f64, b: f64, opts: &StructuredOptions) -> Result<Vec<Excitation>, CasidaError> {
        let (ca, cb) = (self.count(a), self.count(b));
        if cb <= ca {
            return Ok(Vec::new());
        }
        let k = cb - ca;
        let grp = &self.groups[g];
        let (n, r) = (self.n, grp.rank);
        // Null vectors of [[S̃(d), W], [Wᵀ, 0]] give (E, P) for eigenvalues at the pole.
        let st = self.schur(grp.d, Some(g));
        let mut bordered = DMatrix::zeros(n + r, n + r);
        bordered.view_mut((0, 0), (n, n)).copy_from(&st);
        for c in 0..r {
            let w = self.col(grp.first_col + c);
            for q in 0..n {
                bordered[(q, n + c)] = w[q];
                bordered[(n + c, q)] = w[q];
            }
        }
        let eig = SymmetricEigen::new(bordered);
        let mut order: Vec<usize> = (0..n + r).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].abs().total_cmp(&eig.eigenvalues[j].abs()));
        let mut out = Vec::with_capacity(k);
        for &col in order.iter().take(k.min(n + r)) {
            let z = eig.eigenvectors.column(col);
            let e: Vec<f64> = z.rows(0, n).iter().copied().collect();
            let mut y = self.photon_effective(grp.d, &e, Some(g));
            for c in 0..r {
                y[grp.first_col + c] = z[n + c];
            }
            let mut x = self.excitation(grp.d, e, &y, opts);
            x.omega = grp.omega;
            out.push(x);
        }
        Ok(out)
    }

    fn trivial_in(&self, lo: f64, hi: f64, opts: &StructuredOptions) -> Vec<Excitation> {
        let m = self.blocks.m();
        let mut out = Vec::new();
        for &k in &self.deflated {
            let d = self.blocks.d[k];
            if d >= lo && d <= hi {
                let mut p = vec![0.0; m];
                p[k] = 1.0;
                out.push(self.trivial(d, self.blocks.mode_omega[k], p, opts));
            }
        }
        for grp in &self.groups {
            if grp.d < lo || grp.d > hi {
                continue;
            }
            for c in grp.rank..grp.members.len() {
                let mut p = vec![0.0; m];
                for (i, &k) in grp.members.iter().enumerate() {
                    p[k] = grp.basis[(i, c)];
                }
                out.push(self.trivial(grp.d, grp.omega, p, opts));
            }
        }
        out
    }
}

fn sorted_eigen(s: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Zero of a strictly decreasing function on `[a, b]` with `f(a) ≥ 0 > f(b)`.
fn safeguarded_newton<F: Fn(f64) -> (f64, f64)>(f: F, a: f64, b: f64) -> Result<f64, CasidaError> {
    let (mut lo, mut hi) = (a, b);
    let mut x = 0.5 * (a + b);
    let mut dx_old = b - a;
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / dfx;
        let xn = x - step;
        let newton_ok = dfx < 0.0 && xn > lo && xn < hi && (2.0 * fx).abs() <= (dx_old * dfx).abs();
        dx_old = dx;
        if newton_ok {
            dx = step;
            x = xn;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(x);
        }
        (fx, dfx) = f(x);
        if !fx.is_finite() {
            return Err(CasidaError::RootIsolation { mu: x });
        }
    }
    Err(CasidaError::RootIsolation { mu: x })
}

/// Gram–Schmidt over roots that coincide to working precision.
fn orthonormalize_clusters(vecs: &mut [(f64, Vec<f64>, Vec<f64>)]) {
    let norm = |e: &[f64], y: &[f64]| e.iter().chain(y).map(|x| x * x).sum::<f64>().sqrt();
    for (_, e, y) in vecs.iter_mut() {
        let s = norm(e, y);
        e.iter_mut().chain(y.iter_mut()).for_each(|x| *x /= s);
    }
    for i in 1..vecs.len() {
        for j in 0..i {
            if (vecs[i].0 - vecs[j].0).abs() > 1e-10 * vecs[i].0.abs() {
                continue;
            }
            let (head, tail) = vecs.split_at_mut(i);
            let (_, ej, yj) = &head[j];
            let (_, ei, yi) = &mut tail[0];
            let dot: f64 = ei.iter().zip(ej.iter()).chain(yi.iter().zip(yj.iter())).map(|(a, b)| a * b).sum();
            ei.iter_mut().zip(ej).for_each(|(a, b)| *a -= dot * b);
            yi.iter_mut().zip(yj).for_each(|(a, b)| *a -= dot * b);
            let s = norm(ei, yi);
            ei.iter_mut().chain(yi.iter_mut()).for_each(|x| *x /= s);
        }
    }
}

/// Number of eigenvalues (Ω²) strictly below `mu`.
///
/// `mu` must not coincide with a coupled photon pole.
pub fn count_below(blocks: &CoupledBlocks, mu: f64) -> usize {
    let n = blocks.n();
    let mut s = blocks.u.clone();
    for q in 0..n {
        s[(q, q)] -= mu;
    }
    for k in 0..blocks.m() {
        let v = blocks.v.column(k);
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        let coef = 1.0 / (blocks.d[k] - mu);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] -= coef * v[i] * v[j];
            }
        }
    }
    let below = blocks.d.partition_point(|&d| d < mu);
    below + SymmetricEigen::new(s).eigenvalues.iter().filter(|&&x| x < 0.0).count()
}

/// Eigenpairs with `Ω ∈ [lo, hi]`.
pub fn solve_structured(blocks: &CoupledBlocks, window: (f64, f64)) -> Result<Solution, CasidaError> {
    solve_structured_with(blocks, window, &StructuredOptions::default())
}

pub fn solve_structured_with(
    blocks: &CoupledBlocks,
    window: (f64, f64),
    opts: &StructuredOptions,
) -> Result<Solution, CasidaError> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(CasidaError::InvalidWindow { lo, hi });
    }
    let prep = Prepared::new(blocks);
    let (mu_lo, mu_hi) = (lo * lo, hi * hi);
    let segments = prep.segments(mu_lo, mu_hi);
    let parts: Vec<Vec<Excitation>> = segments
        .par_iter()
        .map(|seg| match *seg {
            Segment::Regular(a, b) => prep.solve_regular(a, b, opts),
            Segment::Pole(g, a, b) => prep.solve_pole(g, a, b, opts),
        })
        .collect::<Result<_, _>>()?;
    let mut excitations: Vec<Excitation> = parts.into_iter().flatten().collect();
    excitations.extend(prep.trivial_in(mu_lo, mu_hi, opts));
    sort_excitations(&mut excitations);
    Ok(Solution {
        excitations,
        window: Some(window),
    })
}
