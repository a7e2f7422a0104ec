use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

/// Above this size `(I - A)^-1` is computed through a sparse LU factorization
/// solved against identity column blocks instead of a dense inversion.
pub(crate) const DENSE_INVERSE_LIMIT: usize = 2000;

const SPARSE_BLOCK: usize = 256;

/// Inverse of `I - A` where `A` is given by its nonzero entries `(row, col, value)`.
/// Returns `None` when the system is numerically singular.
pub(crate) fn inverse_identity_minus(
    n: usize,
    entries: &[(usize, usize, f64)],
) -> Option<DMatrix<f64>> {
    if n <= DENSE_INVERSE_LIMIT {
        let mut m = DMatrix::<f64>::identity(n, n);
        for &(i, j, a) in entries {
            m[(i, j)] -= a;
        }
        let inv = m.lu().try_inverse()?;
        inv.iter().all(|v| v.is_finite()).then_some(inv)
    } else {
        sparse_inverse_identity_minus(n, entries)
    }
}

pub(crate) fn sparse_inverse_identity_minus(
    n: usize,
    entries: &[(usize, usize, f64)],
) -> Option<DMatrix<f64>> {
    let mut triplets: Vec<Triplet<usize, usize, f64>> = (0..n).map(|i| Triplet::new(i, i, 1.0)).collect();
    triplets.extend(entries.iter().map(|&(i, j, a)| Triplet::new(i, j, -a)));
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets).ok()?;
    let lu = mat.sp_lu().ok()?;
    let mut out = DMatrix::<f64>::zeros(n, n);
    let mut start = 0;
    while start < n {
        let width = SPARSE_BLOCK.min(n - start);
        let rhs = Mat::<f64>::from_fn(n, width, |i, j| if i == start + j { 1.0 } else { 0.0 });
        let sol = lu.solve(&rhs);
        for j in 0..width {
            for i in 0..n {
                let v = sol[(i, j)];
                if !v.is_finite() {
                    return None;
                }
                out[(i, start + j)] = v;
            }
        }
        start += width;
    }
    Some(out)
}

/// `ln det` of a symmetric positive definite matrix via Cholesky.
pub(crate) fn logdet_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_and_dense_inverses_agree() {
        let entries = vec![(0, 1, 0.5), (1, 2, 0.7), (2, 0, 0.2), (3, 1, 0.9), (2, 3, 0.1)];
        let dense = inverse_identity_minus(4, &entries).unwrap();
        let sparse = sparse_inverse_identity_minus(4, &entries).unwrap();
        for (a, b) in dense.iter().zip(sparse.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_system_is_rejected() {
        // 2-cycle with no leakage: I - A is singular.
        let entries = vec![(0, 1, 1.0), (1, 0, 1.0)];
        assert!(inverse_identity_minus(2, &entries).is_none());
    }
}
