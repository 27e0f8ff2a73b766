//! Residuals of the resolvent and parametrix identities on truncations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Truncation;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Largest condition number accepted for a matrix that has to be inverted.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Max-entry residuals of the identities checked by [`appendix_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub size: usize,
    pub re_lambda: f64,
    pub im_lambda: f64,
    /// `D R(λ) − (I + λ R(λ))` and `R(λ) D − (I + λ R(λ))` with
    /// `R(λ) = (D − λ)^{-1}`.
    pub resolvent: f64,
    /// `D Q − (I − (I + DD*)^{-1})` with `Q = D*(I + DD*)^{-1}`.
    pub parametrix_right: f64,
    /// `Q D − (I − (I + D*D)^{-1})`.
    pub parametrix_left: f64,
    /// Difference between `(𝒟 − λ)^{-1}` for `𝒟 = [[0, D], [D*, 0]]` and the
    /// block formula `[[λ(DD* − λ²)^{-1}, D(D*D − λ²)^{-1}],
    /// [D*(DD* − λ²)^{-1}, λ(D*D − λ²)^{-1}]]`, together with the residual of
    /// the formula as a right inverse.
    pub block: f64,
    /// Largest condition number among the inverted matrices.
    pub max_condition: f64,
}

impl AppendixReport {
    pub fn worst(&self) -> f64 {
        self.resolvent
            .max(self.parametrix_right)
            .max(self.parametrix_left)
            .max(self.block)
    }
}

fn guarded_inverse(m: &CMatrix, worst: &mut f64) -> Result<CMatrix> {
    let cond = linalg::condition_number(m);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    *worst = worst.max(cond);
    linalg::inverse(m).ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
        limit: CONDITION_LIMIT,
    })
}

/// Verifies, on a truncation `D` and at a spectral parameter `λ`:
/// the resolvent identities `D R(λ) = R(λ) D = I + λ R(λ)`; the parametrix
/// identities for `Q = D*(I + DD*)^{-1}`; and the block resolvent of the even
/// operator `𝒟 = [[0, D], [D*, 0]]`, where `(𝒟 + it)^{-1}` is written with
/// `(t² + DD*)^{-1}` and `(t² + D*D)^{-1}` at `t = iλ`.
///
/// Any matrix to be inverted with condition number above
/// [`CONDITION_LIMIT`] is reported as an ill-conditioned error.
pub fn appendix_verify(d: &Truncation, lambda: Complex64) -> Result<AppendixReport> {
    let dm = &d.matrix;
    let n = d.size;
    let id = linalg::identity(n);
    let dstar = dm.adjoint();
    let mut cond = 1.0f64;

    let r = guarded_inverse(&(dm - &id * lambda), &mut cond)?;
    let target = &id + &r * lambda;
    let resolvent = linalg::max_abs(&(dm * &r - &target)).max(linalg::max_abs(&(&r * dm - &target)));

    let ddstar = dm * &dstar;
    let dstard = &dstar * dm;
    let inv_right = guarded_inverse(&(&id + &ddstar), &mut cond)?;
    let inv_left = guarded_inverse(&(&id + &dstard), &mut cond)?;
    let q = &dstar * &inv_right;
    let parametrix_right = linalg::max_abs(&(dm * &q - (&id - &inv_right)));
    let parametrix_left = linalg::max_abs(&(&q * dm - (&id - &inv_left)));

    let l2 = lambda * lambda;
    let a = guarded_inverse(&(&ddstar - &id * l2), &mut cond)?;
    let b = guarded_inverse(&(&dstard - &id * l2), &mut cond)?;
    let mut formula = CMatrix::zeros(2 * n, 2 * n);
    formula.view_mut((0, 0), (n, n)).copy_from(&(&a * lambda));
    formula.view_mut((0, n), (n, n)).copy_from(&(dm * &b));
    formula.view_mut((n, 0), (n, n)).copy_from(&(&dstar * &a));
    formula.view_mut((n, n), (n, n)).copy_from(&(&b * lambda));
    let mut even = CMatrix::zeros(2 * n, 2 * n);
    even.view_mut((0, n), (n, n)).copy_from(dm);
    even.view_mut((n, 0), (n, n)).copy_from(&dstar);
    let shifted = &even - linalg::identity(2 * n) * lambda;
    let direct = guarded_inverse(&shifted, &mut cond)?;
    let block = linalg::max_abs(&(&direct - &formula)).max(linalg::max_abs(&(&shifted * &formula - linalg::identity(2 * n))));

    Ok(AppendixReport {
        size: n,
        re_lambda: lambda.re,
        im_lambda: lambda.im,
        resolvent,
        parametrix_right,
        parametrix_left,
        block,
        max_condition: cond,
    })
}
