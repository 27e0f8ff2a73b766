//! Rotation-invariant states and their GNS spaces.
//!
//! Every invariant state is `τ = λ∞ τ∞ + λ0 Σ_k w(k) τ_k` where `τ_k(a) =
//! a_0(k)` evaluates the diagonal part at `k`, `τ∞(a) = lim a_0(k)`, and `w`
//! is a probability weight. The GNS spaces realised here are the weighted
//! spaces of faithful normal states, the Fock space of `τ_0` and the circle
//! space of `τ∞`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::sequences::CoefficientSequence;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Cauchy tolerance for infinite sums without metadata.
pub const SUM_TOL: f64 = 1e-12;

/// `Σ_{k>=0} seq(k)` under the shared tolerance and budget.
pub fn sum_sequence(seq: &CoefficientSequence) -> Result<Complex64> {
    seq.series_sum(SUM_TOL, crate::budget::evaluation_budget())
}

/// Number of leading indices scanned for sign checks when a weight has no
/// metadata.
const SIGN_SCAN: i64 = 10_000;

/// Number of leading indices checked for strict positivity when a weight has
/// no metadata; short enough that summable weights such as `2^(-k)` do not
/// underflow to zero inside the scan.
const POSITIVITY_SCAN: i64 = 1_000;

fn check_nonnegative(w: &CoefficientSequence, what: &str) -> Result<()> {
    let last = match w.domain_constant() {
        Some(k0) => k0 as i64 + 1,
        None => SIGN_SCAN,
    };
    for k in 0..last {
        let v = w.eval(k);
        if v.im.abs() > 1e-15 || v.re < 0.0 || !v.re.is_finite() {
            return Err(Error::InvalidInput(format!("{what}({k}) = {v} is not a nonnegative real")));
        }
    }
    if let Some(c) = w.eventual_constant() {
        if c.re < 0.0 || c.im != 0.0 {
            return Err(Error::InvalidInput(format!("{what} has a negative tail")));
        }
    }
    Ok(())
}

/// `τ = λ∞ τ∞ + (1 - λ∞) Σ_k w(k) τ_k` with `Σ_k w(k) = 1`.
#[derive(Debug, Clone)]
pub struct InvariantState {
    lambda_inf: f64,
    weights: CoefficientSequence,
}

impl InvariantState {
    /// Builds a state from `λ∞ ∈ [0, 1]` and a nonnegative summable weight,
    /// which is normalised to total mass one. The weight is ignored when
    /// `λ∞ = 1`.
    pub fn new(lambda_inf: f64, weights: CoefficientSequence) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda_inf) {
            return Err(Error::InvalidInput(format!("λ∞ = {lambda_inf} is outside [0, 1]")));
        }
        if lambda_inf == 1.0 {
            return Ok(Self::at_infinity());
        }
        check_nonnegative(&weights, "w")?;
        let total = sum_sequence(&weights)?.re;
        if total <= 0.0 {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        let weights = if (total - 1.0).abs() <= f64::EPSILON {
            weights
        } else {
            weights.scale(Complex64::new(1.0 / total, 0.0))
        };
        Ok(InvariantState { lambda_inf, weights })
    }

    /// The pure state `τ_k(a) = a_0(k)`.
    pub fn pure(k: usize) -> Self {
        InvariantState {
            lambda_inf: 0.0,
            weights: CoefficientSequence::indicator(k),
        }
    }

    /// The pure state `τ∞(a) = lim_k a_0(k)`.
    pub fn at_infinity() -> Self {
        InvariantState {
            lambda_inf: 1.0,
            weights: CoefficientSequence::zero(),
        }
    }

    pub fn lambda_inf(&self) -> f64 {
        self.lambda_inf
    }

    pub fn lambda_0(&self) -> f64 {
        1.0 - self.lambda_inf
    }

    /// Normalised weight `w` (zero for `τ∞`).
    pub fn weights(&self) -> &CoefficientSequence {
        &self.weights
    }

    /// `ω(k) = τ(P_k) = λ0 w(k)`.
    pub fn omega(&self) -> CoefficientSequence {
        self.weights.scale(Complex64::new(self.lambda_0(), 0.0))
    }

    /// Faithful normal: no mass at infinity and every weight positive.
    pub fn is_faithful_normal(&self) -> bool {
        if self.lambda_inf != 0.0 {
            return false;
        }
        let last = self.weights.domain_constant().map_or(POSITIVITY_SCAN, |k0| k0 as i64 + 1);
        let head_positive = (0..last).all(|k| self.weights.eval(k).re > 0.0);
        let tail_positive = match self.weights.eventual_constant() {
            Some(c) => c.re > 0.0,
            None => true,
        };
        head_positive && tail_positive
    }

    /// `τ(a) = λ∞ a_{0,∞} + λ0 Σ_k w(k) a_0(k)` for `a` with eventually
    /// constant coefficients. With `Σ w = 1` this is
    /// `a_{0,∞} + λ0 Σ_{k<k0} w(k) (a_0(k) - a_{0,∞})`, a finite sum.
    pub fn evaluate(&self, a: &AlgebraElement) -> Result<Complex64> {
        let a0 = a.expectation();
        let limit = a0.eventual_constant().ok_or_else(|| {
            Error::InvalidInput(format!("diagonal part {a0} is not eventually constant"))
        })?;
        let k0 = a0.domain_constant().unwrap_or(0) as i64;
        let finite: Complex64 = (0..k0).map(|k| self.weights.eval(k) * (a0.eval(k) - limit)).sum();
        Ok(limit + finite * self.lambda_0())
    }
}

/// Recovers the state from `ω(k) = τ(P_k)`: `λ0 = Σ ω`, `w = ω / λ0`,
/// `λ∞ = 1 - λ0`; `ω ≡ 0` gives `τ∞`.
pub fn decompose_from_projections(omega: &CoefficientSequence) -> Result<InvariantState> {
    check_nonnegative(omega, "ω")?;
    let last = omega.domain_constant().map_or(SIGN_SCAN, |k0| k0 as i64 + 1);
    if let Some(k) = (0..last).find(|&k| omega.eval(k).re > 1.0) {
        return Err(Error::InvalidInput(format!("ω({k}) exceeds 1")));
    }
    if omega.is_structurally_zero() {
        return Ok(InvariantState::at_infinity());
    }
    let lambda_0 = sum_sequence(omega)?.re;
    if lambda_0 > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(format!("Σ ω = {lambda_0} exceeds 1")));
    }
    if lambda_0 == 0.0 {
        return Ok(InvariantState::at_infinity());
    }
    let lambda_0 = lambda_0.min(1.0);
    Ok(InvariantState {
        lambda_inf: 1.0 - lambda_0,
        weights: omega.scale(Complex64::new(1.0 / lambda_0, 0.0)),
    })
}

/// A GNS space.
#[derive(Debug, Clone)]
pub enum Space {
    /// Space of the faithful normal state with weight `w`: the completion of
    /// the algebra under `‖f‖² = Σ_k w(k) (f*f)_0(k)`.
    Weighted(WeightedSpace),
    /// Space of `τ_0`: `ℓ²(ℕ)` with basis `E_n = U^n P_0`.
    Fock,
    /// Space of `τ∞`: `L²(S¹)` with basis `e^{inx}`.
    Circle,
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Weighted(_) => "weighted",
            Space::Fock => "fock",
            Space::Circle => "circle",
        }
    }

    /// GNS space of a state. Only faithful normal states, `τ_0` and `τ∞`
    /// have a realised GNS space.
    pub fn of_state(state: &InvariantState) -> Result<Space> {
        if state.lambda_inf() == 1.0 {
            return Ok(Space::Circle);
        }
        if state.lambda_inf() == 0.0 && state.weights().approx_eq(&CoefficientSequence::indicator(0), 0.0) {
            return Ok(Space::Fock);
        }
        if state.is_faithful_normal() {
            return Ok(Space::Weighted(WeightedSpace::new(state.weights().clone())?));
        }
        Err(Error::Unsupported(
            "GNS spaces are realised only for faithful normal states, τ_0 and τ∞".into(),
        ))
    }
}

/// A weight together with its total mass.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    w: CoefficientSequence,
    total: f64,
}

impl WeightedSpace {
    pub fn new(w: CoefficientSequence) -> Result<Self> {
        let mut k = 0;
        let last = w.domain_constant().map_or(POSITIVITY_SCAN, |k0| k0 as i64 + 1);
        while k < last {
            if !(w.eval(k).re > 0.0) {
                return Err(Error::NonpositiveWeight { k });
            }
            k += 1;
        }
        check_nonnegative(&w, "w")?;
        let total = sum_sequence(&w)?.re;
        Ok(WeightedSpace { w, total })
    }

    pub fn weight(&self) -> &CoefficientSequence {
        &self.w
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `Σ_{k>=0} w(k + offset) |f(k)|²` for eventually constant `f`, or by
    /// partial sums otherwise.
    fn weighted_square_sum(&self, f: &CoefficientSequence, offset: usize) -> Result<f64> {
        match f.eventual_constant() {
            Some(c) => {
                let c2 = c.norm_sqr();
                let k0 = f.domain_constant().unwrap_or(0) as i64;
                let skipped: f64 = (0..offset as i64).map(|k| self.w.eval(k).re).sum();
                let head: f64 = (0..k0)
                    .map(|k| self.w.eval(k + offset as i64).re * (f.eval(k).norm_sqr() - c2))
                    .sum();
                Ok(c2 * (self.total - skipped) + head)
            }
            None => {
                let (w, f) = (self.w.clone(), f.clone());
                let terms = CoefficientSequence::from_fn(move |k| {
                    Complex64::new(w.eval(k + offset as i64).re * f.eval(k).norm_sqr(), 0.0)
                });
                Ok(sum_sequence(&terms)?.re)
            }
        }
    }
}

/// A vector of a GNS space.
#[derive(Debug, Clone)]
pub enum GnsVector {
    /// Power series `f = Σ U^n f_n^+(K) + Σ f_n^-(K)(U*)^n`.
    Weighted { space: WeightedSpace, f: AlgebraElement },
    /// Finite combination `Σ c_n E_n`.
    Fock(BTreeMap<usize, Complex64>),
    /// Trigonometric polynomial `Σ c_n e^{inx}`.
    Circle(BTreeMap<i64, Complex64>),
}

impl GnsVector {
    /// The class of an algebra element: `f` itself, `f·E_0`, or the boundary
    /// symbol of `f`.
    pub fn from_element(space: &Space, f: &AlgebraElement) -> Result<Self> {
        Ok(match space {
            Space::Weighted(s) => GnsVector::Weighted {
                space: s.clone(),
                f: f.clone(),
            },
            Space::Fock => GnsVector::Fock(
                f.modes()
                    .filter(|(n, _)| *n >= 0)
                    .map(|(n, a)| (n as usize, a.eval(0)))
                    .filter(|(_, c)| *c != ZERO)
                    .collect(),
            ),
            Space::Circle => GnsVector::Circle(boundary_symbol(f)?),
        })
    }

    pub fn basis_fock(n: usize) -> Self {
        GnsVector::Fock(BTreeMap::from([(n, Complex64::new(1.0, 0.0))]))
    }

    pub fn basis_circle(n: i64) -> Self {
        GnsVector::Circle(BTreeMap::from([(n, Complex64::new(1.0, 0.0))]))
    }

    pub fn space_name(&self) -> &'static str {
        match self {
            GnsVector::Weighted { .. } => "weighted",
            GnsVector::Fock(_) => "fock",
            GnsVector::Circle(_) => "circle",
        }
    }

    /// The GNS norm.
    ///
    /// Weighted: `Σ_{n>=0} Σ_k w(k)|f_n^+(k)|² + Σ_{n>=1} Σ_k w(k+n)|f_n^-(k)|²`.
    /// Fock and circle: the `ℓ²` norm of the coefficients.
    pub fn norm(&self) -> Result<f64> {
        match self {
            GnsVector::Weighted { space, f } => {
                let mut total = 0.0;
                for (n, a) in f.modes() {
                    let offset = if n < 0 { (-n) as usize } else { 0 };
                    total += space.weighted_square_sum(a, offset)?;
                }
                Ok(total.max(0.0).sqrt())
            }
            GnsVector::Fock(c) => Ok(c.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
            GnsVector::Circle(c) => Ok(c.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
        }
    }
}

/// Boundary symbol `f_a(x) = Σ a_{n,∞}^+ e^{inx} + Σ a_{n,∞}^- e^{-inx}` as the
/// map from frequency to Fourier coefficient (zero coefficients omitted).
pub fn boundary_symbol(a: &AlgebraElement) -> Result<BTreeMap<i64, Complex64>> {
    let mut out = BTreeMap::new();
    for (n, coeff) in a.modes() {
        let c = coeff.eventual_constant().ok_or_else(|| {
            Error::InvalidInput(format!("coefficient of mode {n} is not eventually constant"))
        })?;
        if c != ZERO {
            out.insert(n, c);
        }
    }
    Ok(out)
}

/// Serializable summary of a state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSummary {
    pub lambda_inf: f64,
    pub lambda_0: f64,
    pub weights: Vec<f64>,
    pub faithful_normal: bool,
}

impl InvariantState {
    /// Parameters with the first `len` weights.
    pub fn summary(&self, len: usize) -> StateSummary {
        StateSummary {
            lambda_inf: self.lambda_inf,
            lambda_0: self.lambda_0(),
            weights: self.weights.table(len).iter().map(|z| z.re).collect(),
            faithful_normal: self.is_faithful_normal(),
        }
    }
}
