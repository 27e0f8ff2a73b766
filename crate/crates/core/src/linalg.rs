//! Dense complex matrix helpers for truncation diagnostics.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of the leading `size × size` block.
pub fn max_abs_block(m: &CMatrix, size: usize) -> f64 {
    let size = size.min(m.nrows()).min(m.ncols());
    m.view((0, 0), (size, size))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest entry modulus of the block with row and column indices in `range`.
pub fn max_abs_range(m: &CMatrix, range: std::ops::Range<usize>) -> f64 {
    let len = range.end.saturating_sub(range.start);
    if len == 0 {
        return 0.0;
    }
    m.view((range.start, range.start), (len, len))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diagonal(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// Singular values in ascending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// 2-norm condition number; infinite for singular matrices.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Inverse of a well-conditioned matrix.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}
