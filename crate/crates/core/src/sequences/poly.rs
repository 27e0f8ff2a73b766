//! Dense complex polynomials in the index variable `k`, used as the exact tail
//! rule of eventually-polynomial sequences.

use num_complex::Complex64;

/// Coefficients in increasing degree: `coeffs[j]` multiplies `k^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `slope * k + offset`
    pub fn affine(slope: Complex64, offset: Complex64) -> Self {
        Poly::new(vec![offset, slope])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(ZERO, |acc, c| acc * k + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|j| self.coeff(j) + other.coeff(j)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|j| self.coeff(j) - other.coeff(j)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    pub fn conj(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// The polynomial `k ↦ p(k + shift)`.
    pub fn shifted(&self, shift: i64) -> Poly {
        if shift == 0 || self.coeffs.len() < 2 {
            return self.clone();
        }
        let h = shift as f64;
        let n = self.coeffs.len();
        let mut out = vec![ZERO; n];
        // (k + h)^j = Σ_i C(j, i) h^(j-i) k^i
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut binom = 1.0;
            for i in (0..=j).rev() {
                // binom = C(j, i), walking i downward from j
                out[i] += c * binom * h.powi((j - i) as i32);
                if i > 0 {
                    binom = binom * i as f64 / (j - i + 1) as f64;
                }
            }
        }
        Poly::new(out)
    }

    /// Backward difference `p(k) - p(k-1)`.
    pub fn difference(&self) -> Poly {
        self.sub(&self.shifted(-1))
    }

    /// A polynomial `r` with `r(k) - r(k-1) = p(k)`; the constant term of `r`
    /// is fixed to zero.
    pub fn antidifference(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let d = self.degree();
        // Solve top-down: the difference of k^(j+1) has leading term (j+1) k^j.
        let mut r = vec![ZERO; d + 2];
        let mut residual = self.clone();
        for j in (0..=d).rev() {
            let target = residual.coeff(j);
            if target == ZERO {
                continue;
            }
            let c = target / (j as f64 + 1.0);
            r[j + 1] += c;
            let mut mono = vec![ZERO; j + 2];
            mono[j + 1] = c;
            residual = residual.sub(&Poly::new(mono).difference());
        }
        Poly::new(r)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Smallest integer `k0 >= 0` beyond which `p` has no real root, from the
    /// Cauchy bound on root moduli.
    pub fn root_free_from(&self) -> i64 {
        if self.degree() == 0 {
            return 0;
        }
        let lead = self.leading().norm();
        let bound = 1.0
            + self.coeffs[..self.coeffs.len() - 1]
                .iter()
                .map(|c| c.norm() / lead)
                .fold(0.0, f64::max);
        bound.ceil() as i64 + 1
    }
}
