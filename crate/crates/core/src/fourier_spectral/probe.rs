//! Eigenfunction growth probes for `D_n^+ − λ` and residual-spectrum
//! solutions of the adjoint eigen-equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mode::{ModeOperator, Sign};
use crate::error::{Error, Result};
use crate::sequences::CoefficientSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Half-width of the band around the critical exponent `−1/2` inside which
/// membership in `ℓ²` is not decided.
pub const MARGIN: f64 = 0.2;

/// Relative size below which a factor `β(j+n) − λ` counts as zero.
const DEGENERATE_TOL: f64 = 1e-12;

/// `ℓ²` membership of an eigenfunction judged from its fitted power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

impl Membership {
    pub fn from_exponent(p: f64) -> Self {
        if p < -0.5 - MARGIN {
            Membership::Member
        } else if p > -0.5 + MARGIN {
            Membership::NonMember
        } else {
            Membership::Inconclusive
        }
    }
}

/// Growth of `f_λ(k) = ∏_{j<k} (β(j+n) − λ)/β(j) · 1/μ(k)` up to `k = N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub re_lambda: f64,
    pub im_lambda: f64,
    /// Least-squares slope of `ln|f_λ(k)|` against `ln k` over `[N/10, N]`.
    pub exponent: f64,
    pub verdict: Membership,
    /// `ln|f_λ(N)|`.
    pub log_abs_last: f64,
    pub size: usize,
}

/// Precomputed `β` and `μ` data shared by probes at many values of `λ`.
#[derive(Debug, Clone)]
pub struct ProbeTables {
    n: usize,
    size: usize,
    ln_beta: Vec<f64>,
    beta_shifted: Vec<Complex64>,
    ln_mu: Vec<f64>,
}

impl ProbeTables {
    pub fn new(beta: &CoefficientSequence, mu: &CoefficientSequence, n: usize, size: usize) -> Result<Self> {
        if size < 10 {
            return Err(Error::InvalidInput(format!("probe size {size} is below 10")));
        }
        let values = beta.table(size + n);
        if let Some(j) = values[..size].iter().position(|b| *b == ZERO) {
            return Err(Error::ZeroCoefficient { name: "beta", k: j as i64 });
        }
        let ln_mu: Vec<f64> = mu.log_table(size + 1).iter().map(|(l, _)| *l).collect();
        if let Some(k) = ln_mu.iter().position(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::Overflow(format!("μ({k}) is not representable")));
        }
        if let Some(k) = ln_mu.iter().position(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::ZeroCoefficient { name: "mu", k: k as i64 });
        }
        Ok(ProbeTables {
            n,
            size,
            ln_beta: values[..size].iter().map(|b| b.norm().ln()).collect(),
            beta_shifted: values[n..n + size].to_vec(),
            ln_mu,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Mode index of the probed operator.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Least-squares power of `|μ(k)|` over the top decade `[N/10, N]`.
    pub fn mu_exponent(&self) -> f64 {
        let first = (self.size / 10).max(1);
        let points: Vec<(f64, f64)> = (first..=self.size).map(|k| ((k as f64).ln(), self.ln_mu[k])).collect();
        fit_slope(&points).unwrap_or(0.0)
    }

    pub fn probe(&self, lambda: Complex64) -> Result<ProbeReport> {
        let first = (self.size / 10).max(1);
        let scale = lambda.norm().max(1.0);
        let (mut acc, mut count) = (-self.ln_mu[0], 0.0);
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for k in 1..=self.size {
            let factor = self.beta_shifted[k - 1] - lambda;
            if factor.norm() <= DEGENERATE_TOL * scale {
                return Err(Error::DegenerateLambda { j: k as i64 - 1 });
            }
            acc += factor.norm().ln() - self.ln_beta[k - 1];
            if k >= first {
                let (x, y) = ((k as f64).ln(), acc - self.ln_mu[k]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                count += 1.0;
            }
        }
        let exponent = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        Ok(ProbeReport {
            re_lambda: lambda.re,
            im_lambda: lambda.im,
            exponent,
            verdict: Membership::from_exponent(exponent),
            log_abs_last: acc - self.ln_mu[self.size],
            size: self.size,
        })
    }
}

/// Power-law growth of the formal eigenfunction of `D_n^+` at `λ`; an exact
/// zero factor (`λ = β(j+n)`) is reported as a degenerate parameter.
pub fn eigenfunction_probe(
    beta: &CoefficientSequence,
    mu: &CoefficientSequence,
    n: usize,
    lambda: Complex64,
    size: usize,
) -> Result<ProbeReport> {
    ProbeTables::new(beta, mu, n, size)?.probe(lambda)
}

/// Least-squares slope through `(x, y)` points; `None` without two distinct
/// abscissae.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (xm, ym) = (sx / m, sy / m);
    let sxx: f64 = points.iter().map(|(x, _)| (x - xm).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - xm) * (y - ym)).sum();
    (points.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

/// Solution of `(D_n^+)* f = λ_l f` at `λ_l = β̄(l+n)` on `k < len`: zero
/// below `l`, normalised by `f(l) = 1`, and for `k > l`
/// `f(k) = ᾱ(k−1) f(k−1) / (β̄(k+n) − λ_l)`.
pub fn residual_solution(
    beta: &CoefficientSequence,
    mu: &CoefficientSequence,
    n: usize,
    l: usize,
    len: usize,
) -> Result<Vec<Complex64>> {
    let op = ModeOperator::new(Sign::Plus, true, n, beta.clone(), mu.clone())?;
    let lambda = beta.eval((l + n) as i64).conj();
    let scale = lambda.norm().max(1.0);
    let mut f = vec![ZERO; len];
    for k in 0..len {
        let gap = beta.eval((k + n) as i64).conj() - lambda;
        if k != l && gap.norm() <= DEGENERATE_TOL * scale {
            return Err(Error::DegenerateLambda { j: k as i64 });
        }
        if k == l {
            f[k] = ONE;
        } else if k > l {
            f[k] = op.alpha().eval(k as i64 - 1).conj() * f[k - 1] / gap;
        }
    }
    Ok(f)
}

/// The closed product `f(k+l) = β(k)⋯β(k+l−1) μ̄(l+k)`, zero below `l`.
/// It solves the adjoint eigen-equation when `β(k) = s·(k+1)`; for other
/// coefficients [`residual_solution`] is the exact solution.
pub fn residual_product_form(beta: &CoefficientSequence, mu: &CoefficientSequence, l: usize, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|k| {
            if k < l {
                return ZERO;
            }
            let m = (k - l) as i64;
            (0..l as i64).map(|j| beta.eval(m + j)).product::<Complex64>() * mu.eval(k as i64).conj()
        })
        .collect()
}

/// `max_k |((D f) − λ f)(k)| / (|diagonal term| + |off-diagonal term|)` over
/// `k < len − 1`, for a vector given on `k < len`.
pub fn adjoint_eigen_residual(op: &ModeOperator, lambda: Complex64, f: &[Complex64]) -> f64 {
    let at = |j: i64| f.get(j as usize).copied().unwrap_or(ZERO);
    let mut worst = 0.0f64;
    for k in 0..f.len().saturating_sub(1) as i64 {
        let applied = op.apply(at, k);
        let diag = op.apply(|j| if j == k { at(k) } else { ZERO }, k);
        let scale = diag.norm() + (applied - diag).norm() + (lambda * at(k)).norm();
        if scale > 0.0 {
            worst = worst.max((applied - lambda * at(k)).norm() / scale);
        }
    }
    worst
}

/// Pointwise check of the elementary inequalities behind the eigenfunction
/// estimates, at each factor `1 + x_j`, `x_j = (β(j+n) − β(j) − λ)/β(j)`:
///
/// 1. `|1 + x|² ≤ exp(2 Re x + |x|²)` (from `1 + y ≤ e^y`);
/// 2. `ln k ≤ Σ_{j<k} 1/(j+1) ≤ 1 + ln k` for `k ≥ 1`;
/// 3. `|1 + x|² ≥ 1 + y ≥ C e^{y/2}` with `y = 2 Re x`, whenever `|y| ≤ 1/2`,
///    with the optimal constant `C = e^{1/4}/2` on that interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub factors: usize,
    pub upper_violations: usize,
    pub harmonic_violations: usize,
    /// Factors with `|y| ≤ 1/2`, where the lower bound applies.
    pub lower_checked: usize,
    pub lower_violations: usize,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.upper_violations == 0 && self.harmonic_violations == 0 && self.lower_violations == 0
    }
}

pub fn classic_inequalities(beta: &CoefficientSequence, n: usize, lambda: Complex64, size: usize) -> InequalityReport {
    let values = beta.table(size + n);
    let c = 0.25f64.exp() / 2.0;
    let mut report = InequalityReport {
        factors: size,
        upper_violations: 0,
        harmonic_violations: 0,
        lower_checked: 0,
        lower_violations: 0,
    };
    let mut harmonic = 0.0;
    for j in 0..size {
        let x = (values[j + n] - values[j] - lambda) / values[j];
        let modulus = (ONE + x).norm_sqr();
        if modulus > (2.0 * x.re + x.norm_sqr()).exp() * (1.0 + 1e-14) {
            report.upper_violations += 1;
        }
        let y = 2.0 * x.re;
        if y.abs() <= 0.5 {
            report.lower_checked += 1;
            if modulus < (1.0 + y) * (1.0 - 1e-14) || 1.0 + y < c * (y / 2.0).exp() * (1.0 - 1e-14) {
                report.lower_violations += 1;
            }
        }
        harmonic += 1.0 / (j as f64 + 1.0);
        let k = (j + 1) as f64;
        if harmonic < k.ln() || harmonic > 1.0 + k.ln() {
            report.harmonic_violations += 1;
        }
    }
    report
}
