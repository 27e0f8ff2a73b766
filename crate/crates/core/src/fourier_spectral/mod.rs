//! Fourier-mode analysis of the covariant implementation on a weighted GNS
//! space, `D f = U β(K) f − f U α(K)`.
//!
//! On the `n`-th Fourier component the operator acts as one of four
//! bidiagonal operators on `ℓ²(ℕ)`:
//!
//! ```text
//! (D_n^+ f)(k)    = β(k+n) f(k) − α(k) f(k+1)
//! (D_n^- f)(k)    = α(k+n−1) f(k) − β(k−1) f(k−1)
//! ((D_n^+)* f)(k) = β̄(k+n) f(k) − ᾱ(k−1) f(k−1)
//! ((D_n^-)* f)(k) = ᾱ(k+n−1) f(k) − β̄(k) f(k+1)
//! ```
//!
//! with `α(k) = β(k) μ(k+1)/μ(k)` and `μ(0) = 1`. This module provides the
//! reductions that bring a general operator to that form (gauge phase,
//! weight transfer, constant shifts), the formal kernels and explicit
//! inverses of the mode operators, eigenfunction growth probes, the scan over
//! spectral parameters that exhibits a half-plane of eigenvalues, and
//! verifiers for the resolvent and parametrix identities on truncations.

mod appendix;
mod mode;
mod nogo;
mod probe;

pub use appendix::{appendix_verify, AppendixReport, CONDITION_LIMIT};
pub use mode::{
    apply_mode, estimate_growth_window, formal_kernel, gauge_defect, gauge_phase, hilbert_schmidt_norm,
    inverse_mode, kernel_growth_exponent, kernel_log_norm_partial, kernel_norm_partial, mu_from_alpha,
    mu_growth_check, round_trip_defect, transfer_weight, unweight, weight_transfer_defect, GrowthWindow,
    KernelGenerator, ModeOperator, MuGrowth, Sign, ZERO_SCAN,
};
pub use nogo::{nogo_scan, HeatCell, LambdaGrid, NogoReport, NogoSettings, NogoVerdict};
pub use probe::{
    adjoint_eigen_residual, classic_inequalities, eigenfunction_probe, fit_slope, residual_product_form,
    residual_solution, InequalityReport, Membership, ProbeReport, ProbeTables, MARGIN,
};

use crate::linalg::CMatrix;

/// How a finite matrix relates to the infinite operator it approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `P_N D P_N` for the coordinate projection `P_N` onto indices `< N`.
    Compression,
    /// A matrix supplied directly.
    Explicit,
}

/// Square finite section of an operator.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub size: usize,
    pub matrix: CMatrix,
    pub boundary: Boundary,
}

impl Truncation {
    pub fn explicit(matrix: CMatrix) -> crate::Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(crate::Error::InvalidInput(format!(
                "truncation must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Truncation {
            size: matrix.nrows(),
            matrix,
            boundary: Boundary::Explicit,
        })
    }
}
