//! Numerical classification of sequence tails.

use num_complex::Complex64;

use super::seq::CoefficientSequence;
use crate::error::{Error, Result};

/// Tail behaviour of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitClass {
    /// Converges to zero.
    C0,
    /// Converges to a nonzero limit.
    NonzeroLimit(Complex64),
    /// Unbounded.
    Divergent,
}

/// A classification together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub class: LimitClass,
    /// True when decided from structural metadata, false when sampled.
    pub from_metadata: bool,
    /// Number of coefficient evaluations spent.
    pub evaluations: usize,
}

/// Largest sampling index; beyond this `k` is no longer exact in `f64`.
const MAX_EXPONENT: u32 = 52;

/// Classifies the tail of `seq`.
///
/// Metadata decides exactly when present. Otherwise the sequence is sampled on
/// windows `[K, K + window]` at `K = 2^j`; the window means are extrapolated
/// with Aitken's Δ² process and the class is accepted once successive
/// extrapolations differ by less than `tol`.
pub fn limit_class(seq: &CoefficientSequence, window: usize, tol: f64, budget: usize) -> Result<LimitReport> {
    if window < 2 {
        return Err(Error::InvalidInput("window must be at least 2".into()));
    }
    if let Some(tail) = seq.tail() {
        let class = match tail.degree() {
            0 if tail.is_zero() => LimitClass::C0,
            0 => LimitClass::NonzeroLimit(tail.coeff(0)),
            _ => LimitClass::Divergent,
        };
        return Ok(LimitReport {
            class,
            from_metadata: true,
            evaluations: 0,
        });
    }

    let mut evaluations = 0usize;
    let mut means: Vec<Complex64> = Vec::new();
    let mut spreads: Vec<f64> = Vec::new();
    let mut extrapolated: Vec<Complex64> = Vec::new();
    for j in 4..=MAX_EXPONENT {
        if evaluations + window + 1 > budget {
            break;
        }
        let start = 1i64 << j;
        let values: Vec<Complex64> = (0..=window as i64).map(|i| seq.eval(start + i)).collect();
        evaluations += values.len();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Ok(sampled(LimitClass::Divergent, evaluations));
        }
        let mean = values.iter().sum::<Complex64>() / values.len() as f64;
        let spread = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        means.push(mean);
        spreads.push(spread);

        if growing(&means) {
            return Ok(sampled(LimitClass::Divergent, evaluations));
        }
        let m = means.len();
        if m >= 3 {
            let (a, b, c) = (means[m - 3], means[m - 2], means[m - 1]);
            let denom = a - 2.0 * b + c;
            let limit = if denom.norm() <= f64::EPSILON * (a.norm() + b.norm() + c.norm()) {
                c
            } else {
                c - (c - b) * (c - b) / denom
            };
            extrapolated.push(limit);
        }
        let e = extrapolated.len();
        if e >= 2 && spread < tol.sqrt() {
            let (prev, last) = (extrapolated[e - 2], extrapolated[e - 1]);
            let scale = 1.0f64.max(last.norm());
            if (last - prev).norm() < tol * scale && (c_tail(&means) - last).norm() < tol.sqrt() * scale {
                let class = if last.norm() <= 10.0 * tol {
                    LimitClass::C0
                } else {
                    LimitClass::NonzeroLimit(last)
                };
                return Ok(sampled(class, evaluations));
            }
        }
    }
    Err(Error::Inconclusive(format!(
        "tail of {seq} did not settle within {evaluations} evaluations"
    )))
}

fn c_tail(means: &[Complex64]) -> Complex64 {
    *means.last().unwrap()
}

fn sampled(class: LimitClass, evaluations: usize) -> LimitReport {
    LimitReport {
        class,
        from_metadata: false,
        evaluations,
    }
}

/// Window means that have grown monotonically by a factor of at least 1.5 per
/// doubling over the last eight doublings and exceed 1e3 in modulus.
fn growing(means: &[Complex64]) -> bool {
    const RUN: usize = 8;
    if means.len() <= RUN {
        return false;
    }
    let tail = &means[means.len() - RUN - 1..];
    tail.windows(2).all(|w| w[1].norm() >= 1.5 * w[0].norm()) && tail[RUN].norm() > 1e3
}
