//! Numerical rank checks for second-order coefficient matrices.
//!
//! A pointwise nonlinearity applied to a weighted sum can only produce a
//! rank-1 pairwise coefficient matrix (the outer product of its linear
//! weights); a free pairwise term can reach full rank. These helpers make
//! that expressivity gap testable.

use crate::linalg::symmetric_eigenvalues;

const RANK_TOLERANCE: f64 = 1e-10;

/// Numerical rank of the order-2 coefficient matrix `alpha2 * w * w^T`
/// implied by expanding a pointwise nonlinearity around a linear filter
/// `w`. Always <= 1; returns 0 when `alpha2` is 0.
pub fn tied_weights_rank_check(w: &[f64], alpha2: f64) -> usize {
    let m = w.len();
    let mut mat = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            mat[i * m + j] = alpha2 * w[i] * w[j];
        }
    }
    symmetric_rank(mat, m)
}

/// Numerical rank of the symmetric matrix equivalent to an
/// upper-triangular-inclusive pairwise weight vector: diagonal entries
/// are kept, off-diagonal entries split in half across the two mirrored
/// slots so the quadratic form is unchanged.
pub fn quadratic_form_rank(w2_upper: &[f64], m: usize) -> usize {
    assert_eq!(w2_upper.len(), super::pair_count(m), "w2 length mismatch");
    let mut mat = vec![0.0f64; m * m];
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            let v = w2_upper[k];
            if i == j {
                mat[i * m + i] = v;
            } else {
                mat[i * m + j] = v / 2.0;
                mat[j * m + i] = v / 2.0;
            }
            k += 1;
        }
    }
    symmetric_rank(mat, m)
}

/// Count of singular values above `1e-10 * max` (symmetric input, so the
/// singular values are the absolute eigenvalues).
fn symmetric_rank(mat: Vec<f64>, m: usize) -> usize {
    let sv: Vec<f64> = symmetric_eigenvalues(mat, m)
        .into_iter()
        .map(f64::abs)
        .collect();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}
