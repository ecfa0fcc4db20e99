use faer::{Mat, Side};
use nalgebra::DMatrix;

/// Ascending eigenvalues and column eigenvectors of a real symmetric matrix.
///
/// Returns `None` if the eigensolver does not converge.
pub(crate) fn sym_eigen(a: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Some((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let evd = m.self_adjoint_eigen(Side::Lower).ok()?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let values = order.iter().map(|&i| s[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, k| u[(i, order[k])]);
    Some((values, vectors))
}
