//! Invariant and covariant derivations of the Toeplitz algebra and the
//! approximately-inner criterion.
//!
//! An invariant derivation is `d(a) = [β(K-1), a]`; a covariant one is
//! `d(a) = [Uβ(K), a]`. Both are determined by a sequence `β` with `β(-1) = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::sequences::{limit_class, CoefficientSequence, LimitClass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivationKind {
    Invariant,
    Covariant,
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub kind: DerivationKind,
    pub beta: CoefficientSequence,
}

impl Derivation {
    pub fn invariant(beta: CoefficientSequence) -> Self {
        Derivation {
            kind: DerivationKind::Invariant,
            beta,
        }
    }

    pub fn covariant(beta: CoefficientSequence) -> Self {
        Derivation {
            kind: DerivationKind::Covariant,
            beta,
        }
    }

    /// `α = increments(β)`.
    pub fn alpha(&self) -> CoefficientSequence {
        self.beta.increments()
    }

    /// The implementing element: `β(K-1)` (invariant) or `Uβ(K)` (covariant).
    pub fn generator(&self) -> AlgebraElement {
        match self.kind {
            DerivationKind::Invariant => AlgebraElement::diagonal(self.beta.shifted(-1)),
            DerivationKind::Covariant => AlgebraElement::mode(1, self.beta.clone()),
        }
    }

    /// `d(a)` in normal form.
    ///
    /// Invariant kind: mode `n >= 0` coefficients are multiplied by
    /// `β(k+n-1) - β(k-1)`, mode `-n` coefficients by `β(k-1) - β(k+n-1)`.
    /// Covariant kind: the commutator with `Uβ(K)`, which raises every mode by one.
    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        match self.kind {
            DerivationKind::Invariant => {
                let below = self.beta.shifted(-1);
                let mut out = AlgebraElement::zero();
                for (n, coeff) in a.modes() {
                    if n == 0 {
                        continue;
                    }
                    let above = self.beta.shifted(n.abs() - 1);
                    let factor = if n > 0 { above.sub(&below) } else { below.sub(&above) };
                    out = out.add(&AlgebraElement::mode(n, factor.mul(coeff)));
                }
                out
            }
            DerivationKind::Covariant => self.generator().commutator(a),
        }
    }
}

/// Interior block size for comparing truncated products: entries of
/// `to_matrix(x·y, N)` and `to_matrix(x, N)·to_matrix(y, N)` agree in the
/// leading `N - band(y)` block.
pub fn interior(size: usize, band: usize) -> usize {
    size.saturating_sub(band)
}

/// Largest interior entry of `d(ab) - a d(b) - d(a) b`, evaluated on
/// `N × N` truncations of the three normal forms.
pub fn leibniz_defect(d: &Derivation, a: &AlgebraElement, b: &AlgebraElement, size: usize) -> f64 {
    let lhs = d.apply(&a.multiply(b));
    let rhs = a.multiply(&d.apply(b)).add(&d.apply(a).multiply(b));
    let band = lhs.band().max(rhs.band()) + 1;
    crate::linalg::max_abs_block(&(lhs.to_matrix(size) - rhs.to_matrix(size)), interior(size, band))
}

/// Transformation law expected of a derivation under the circle action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivarianceLaw {
    /// `d(ρ_θ(a)) = ρ_θ(d(a))`
    Invariant,
    /// `d(ρ_θ(a)) = e^{-iθ} ρ_θ(d(a))`
    Covariant,
}

impl From<DerivationKind> for EquivarianceLaw {
    fn from(kind: DerivationKind) -> Self {
        match kind {
            DerivationKind::Invariant => EquivarianceLaw::Invariant,
            DerivationKind::Covariant => EquivarianceLaw::Covariant,
        }
    }
}

/// Largest truncation entry of the defect of `law` for `d` at `a`, `θ`.
pub fn equivariance_defect(d: &Derivation, law: EquivarianceLaw, a: &AlgebraElement, theta: f64, size: usize) -> f64 {
    let lhs = d.apply(&a.rotate(theta));
    let phase = match law {
        EquivarianceLaw::Invariant => Complex64::new(1.0, 0.0),
        EquivarianceLaw::Covariant => Complex64::from_polar(1.0, -theta),
    };
    let rhs = d.apply(a).rotate(theta).scale(phase);
    crate::linalg::max_abs(&(lhs.to_matrix(size) - rhs.to_matrix(size)))
}

/// `μ_n(k) = β(k)` for `k <= n`, `β(n)` for `k > n`: eventually constant with
/// domain constant `n + 1`.
pub fn approx_inner_mu(beta: &CoefficientSequence, n: usize) -> CoefficientSequence {
    let head: Vec<Complex64> = (0..=n as i64).map(|k| beta.eval(k)).collect();
    let tail = head[n];
    CoefficientSequence::from_values(head, tail).with_minus_one(beta.eval(-1))
}

/// Numerical settings for sampled tail analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSettings {
    pub window: usize,
    pub tol: f64,
    pub budget: usize,
}

impl Default for TailSettings {
    fn default() -> Self {
        TailSettings {
            window: 16,
            tol: 1e-9,
            budget: crate::budget::evaluation_budget(),
        }
    }
}

/// Result of [`approx_inner_defect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectReport {
    /// `sup_{k>n} |Δβ(k)|` (infinite when the increments are unbounded).
    pub value: f64,
    pub from_metadata: bool,
}

/// `sup_{k>n} |β(k) - β(k-1)|`: the uniform distance between the increments
/// of `β` and of the eventually constant `μ_n`.
///
/// Exact from metadata when available. Otherwise the increments are scanned
/// on `(n, n + S]` with `S` bounded by the budget, and the supremum beyond the
/// scan is bounded by the sampled tail limit.
pub fn approx_inner_defect(beta: &CoefficientSequence, n: usize, settings: &TailSettings) -> Result<DefectReport> {
    let inc = beta.increments();
    if let (Some(head), Some(tail)) = (inc.head(), inc.tail()) {
        if tail.degree() > 0 {
            return Ok(DefectReport {
                value: f64::INFINITY,
                from_metadata: true,
            });
        }
        let beyond = head.iter().skip(n + 1).map(|v| v.norm()).fold(0.0, f64::max);
        // the constant tail applies at every k beyond the head, hence beyond n
        let tail_value = tail.coeff(0).norm();
        return Ok(DefectReport {
            value: beyond.max(tail_value),
            from_metadata: true,
        });
    }
    let limit = limit_class(&inc, settings.window, settings.tol, settings.budget / 2)?;
    let tail_bound = match limit.class {
        LimitClass::C0 => 0.0,
        LimitClass::NonzeroLimit(l) => l.norm(),
        LimitClass::Divergent => {
            return Ok(DefectReport {
                value: f64::INFINITY,
                from_metadata: false,
            })
        }
    };
    let scan = (settings.budget / 4).clamp(1, 1 << 20) as i64;
    let first = n as i64 + 1;
    let sup = (first..first + scan).map(|k| inc.eval(k).norm()).fold(0.0, f64::max);
    Ok(DefectReport {
        value: sup.max(tail_bound),
        from_metadata: false,
    })
}

/// Classification of an invariant derivation by its increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivationClass {
    /// Increments in `c0`: a limit of inner derivations.
    ApproximatelyInner,
    /// Increments with a nonzero limit or unbounded: not a limit of bounded ones.
    NotApproximatelyBounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: DerivationClass,
    /// The increment limit when it exists.
    pub increment_limit: Option<Complex64>,
    pub from_metadata: bool,
}

/// Approximately inner iff the increments of `β` lie in `c0`.
pub fn classify_derivation(beta: &CoefficientSequence, settings: &TailSettings) -> Result<Classification> {
    let report = limit_class(&beta.increments(), settings.window, settings.tol, settings.budget)?;
    let (class, increment_limit) = match report.class {
        LimitClass::C0 => (DerivationClass::ApproximatelyInner, Some(ZERO)),
        LimitClass::NonzeroLimit(l) => (DerivationClass::NotApproximatelyBounded, Some(l)),
        LimitClass::Divergent => (DerivationClass::NotApproximatelyBounded, None),
    };
    Ok(Classification {
        class,
        increment_limit,
        from_metadata: report.from_metadata,
    })
}

/// Rejects `β` whose value at `-1` was overridden away from zero.
pub fn check_beta(beta: &CoefficientSequence) -> Result<()> {
    if beta.eval(-1) != ZERO {
        return Err(Error::InvalidInput("β(-1) must be 0".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_block, CMatrix};
    use std::f64::consts::PI;

    fn seq(text: &str) -> CoefficientSequence {
        CoefficientSequence::parse(text).unwrap()
    }

    fn el(text: &str) -> AlgebraElement {
        AlgebraElement::parse(text).unwrap()
    }

    /// Commutator of truncations compared on the interior block.
    fn matrix_commutator(g: &AlgebraElement, a: &AlgebraElement, size: usize) -> CMatrix {
        let (gm, am) = (g.to_matrix(size), a.to_matrix(size));
        &gm * &am - &am * &gm
    }

    #[test]
    fn invariant_apply_examples() {
        let d = Derivation::invariant(seq("k+1"));
        assert_eq!(d.apply(&AlgebraElement::shift()), AlgebraElement::shift());
        assert_eq!(d.apply(&AlgebraElement::shift_adjoint()), AlgebraElement::shift_adjoint().scale(-Complex64::new(1.0, 0.0)));
        assert!(d.apply(&AlgebraElement::diagonal(seq("sqrt(k)"))).is_zero());

        for a in [AlgebraElement::shift(), AlgebraElement::shift_adjoint()] {
            let oracle = matrix_commutator(&d.generator(), &a, 16);
            let direct = d.apply(&a).to_matrix(16);
            assert!(max_abs_block(&(oracle - direct), 15) < 1e-12);
        }
    }

    #[test]
    fn leibniz_examples() {
        let inv = Derivation::invariant(seq("k+1"));
        let cov = Derivation::covariant(seq("k+1"));
        let inv_sqrt = Derivation::invariant(seq("sqrt(k+1)"));
        let (u, us) = (AlgebraElement::shift(), AlgebraElement::shift_adjoint());
        assert!(leibniz_defect(&inv, &u, &us, 16) <= 1e-10);
        assert!(leibniz_defect(&cov, &u, &u, 16) <= 1e-10);
        let a = AlgebraElement::diagonal(seq("min(k,1)"));
        assert!(leibniz_defect(&inv_sqrt, &u, &a, 16) <= 1e-10);
    }

    #[test]
    fn equivariance_examples() {
        let inv = Derivation::invariant(seq("k+1"));
        let cov = Derivation::covariant(seq("k+1"));
        let u = AlgebraElement::shift();
        assert!(equivariance_defect(&inv, EquivarianceLaw::Invariant, &u, PI / 3.0, 16) <= 1e-10);
        assert!(equivariance_defect(&cov, EquivarianceLaw::Covariant, &el("U^2"), 1.0, 16) <= 1e-10);
        // d(U) = U^2 has unit entries; the wrong law doubles it at θ = π
        let wrong = equivariance_defect(&cov, EquivarianceLaw::Invariant, &u, PI, 16);
        assert!((wrong - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mu_examples() {
        let mu = approx_inner_mu(&seq("k+1"), 2);
        assert_eq!(mu.domain_constant(), Some(3));
        for (k, v) in [1.0, 2.0, 3.0, 3.0, 3.0].iter().enumerate() {
            assert_eq!(mu.eval(k as i64).re, *v);
        }
        let c = CoefficientSequence::real(2.5);
        assert!(approx_inner_mu(&c, 4).approx_eq(&c, 0.0));
        let mu = approx_inner_mu(&seq("sqrt(k+1)"), 3);
        for k in 0..4 {
            assert!((mu.eval(k).re - ((k + 1) as f64).sqrt()).abs() < 1e-15);
        }
        assert_eq!(mu.eventual_constant(), Some(Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn defect_examples() {
        let s = TailSettings::default();
        let r = approx_inner_defect(&seq("sqrt(k+1)"), 100, &s).unwrap();
        assert!((r.value - (102f64.sqrt() - 101f64.sqrt())).abs() < 1e-10);
        assert!((r.value - 0.0496).abs() < 1e-4);
        assert!(!r.from_metadata);
        for n in [0, 5, 1000] {
            let r = approx_inner_defect(&seq("k+1"), n, &s).unwrap();
            assert_eq!(r.value, 1.0);
            assert!(r.from_metadata);
        }
        let r = approx_inner_defect(&seq("min(k,3)"), 3, &s).unwrap();
        assert_eq!(r.value, 0.0);
        let r = approx_inner_defect(&seq("k^2"), 3, &s).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn classification_examples() {
        let s = TailSettings::default();
        assert_eq!(
            classify_derivation(&seq("sqrt(k+1)"), &s).unwrap().class,
            DerivationClass::ApproximatelyInner
        );
        let c = classify_derivation(&seq("k+1"), &s).unwrap();
        assert_eq!(c.class, DerivationClass::NotApproximatelyBounded);
        assert_eq!(c.increment_limit, Some(Complex64::new(1.0, 0.0)));
        assert_eq!(
            classify_derivation(&seq("k^2"), &s).unwrap().class,
            DerivationClass::NotApproximatelyBounded
        );
    }

    #[test]
    fn invariant_derivation_commutes_with_rotation() {
        let d = Derivation::invariant(seq("sqrt(k+1) + i*k"));
        let a = el("U^2 [k] + 3 e_1 U* + U*^3");
        for theta in [0.0, PI / 5.0, PI, 1.7] {
            let lhs = d.apply(&a.rotate(theta));
            let rhs = d.apply(&a).rotate(theta);
            assert!(lhs.max_deviation(&rhs, 200) < 1e-12);
        }
    }
}
