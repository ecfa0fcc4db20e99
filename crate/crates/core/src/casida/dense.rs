use super::{sort_excitations, CasidaError, CoupledBlocks, Solution};
use crate::linalg::sym_eigen;
use crate::types::Excitation;

/// Largest `n + M` accepted by [`solve_dense`].
pub const DENSE_LIMIT: usize = 20_000;

/// Every eigenpair, from a full symmetric eigensolve.
pub fn solve_dense(blocks: &CoupledBlocks) -> Result<Solution, CasidaError> {
    let (n, m) = (blocks.n(), blocks.m());
    if n + m > DENSE_LIMIT {
        return Err(CasidaError::DenseTooLarge {
            size: n + m,
            limit: DENSE_LIMIT,
        });
    }
    let (values, vectors) = sym_eigen(&blocks.full_matrix()).ok_or(CasidaError::Eigensolver)?;
    let mut excitations: Vec<Excitation> = values
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let col = vectors.column(k);
            let e: Vec<f64> = col.rows(0, n).iter().copied().collect();
            let p: Vec<f64> = col.rows(n, m).iter().copied().collect();
            Excitation::from_eigenpair(mu, e, blocks.unsort(&p))
        })
        .collect();
    sort_excitations(&mut excitations);
    Ok(Solution {
        excitations,
        window: None,
    })
}
