//! Mode operators, the reductions that produce them, their formal kernels and
//! their explicit inverses.

use num_complex::Complex64;

use super::{Boundary, Truncation};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sequences::CoefficientSequence;
use crate::states::{sum_sequence, GnsVector, WeightedSpace};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of leading indices checked for vanishing coefficients when a
/// sequence carries no tail metadata.
pub const ZERO_SCAN: i64 = 1 << 14;

/// Indices to check for zeros: the head plus every tail index that could be a
/// root of the tail polynomial, or the fixed scan without metadata.
fn scan_length(seq: &CoefficientSequence) -> Result<i64> {
    match (seq.head(), seq.tail()) {
        (Some(head), Some(tail)) => Ok((head.len() as i64).max(tail.root_free_from()) + 1),
        _ => Ok(ZERO_SCAN),
    }
}

fn first_zero(seq: &CoefficientSequence, name: &'static str) -> Result<()> {
    if let Some(tail) = seq.tail() {
        if tail.is_zero() {
            let k = seq.head().map_or(0, |h| h.len() as i64);
            if (0..k).all(|j| seq.eval(j) != ZERO) {
                return Err(Error::ZeroCoefficient { name, k });
            }
        }
    }
    for k in 0..scan_length(seq)? {
        if seq.eval(k) == ZERO {
            return Err(Error::ZeroCoefficient { name, k });
        }
    }
    Ok(())
}

/// `μ` from `α(k) = β(k) μ(k+1)/μ(k)` and `μ(0) = 1`, i.e. the running
/// product of `α/β`.
pub fn mu_from_alpha(beta: &CoefficientSequence, alpha: &CoefficientSequence) -> Result<CoefficientSequence> {
    first_zero(beta, "beta")?;
    first_zero(alpha, "alpha")?;
    Ok(alpha.div(beta).running_product())
}

/// Number of leading indices checked for strict positivity of a weight
/// without metadata; short enough that summable weights such as `2^(-k)` do
/// not underflow inside the scan.
const WEIGHT_SCAN: i64 = 1_000;

/// Weight transfer `α̃(k) = α(k) √(w(k)/w(k+1))` to the unweighted space.
pub fn unweight(alpha: &CoefficientSequence, w: &CoefficientSequence) -> Result<CoefficientSequence> {
    let last = w.domain_constant().map_or(WEIGHT_SCAN, |k0| k0 as i64 + 1);
    for k in 0..=last {
        let v = w.eval(k);
        if !(v.re > 0.0) || v.im != 0.0 {
            return Err(Error::NonpositiveWeight { k });
        }
    }
    if let Some(c) = w.eventual_constant() {
        if !(c.re > 0.0) || c.im != 0.0 {
            return Err(Error::NonpositiveWeight { k: last });
        }
        // eventually constant weights transfer to an eventually equal α
        let k0 = w.domain_constant().unwrap_or(0);
        let ratio: Vec<Complex64> = (0..k0 as i64).map(|k| Complex64::new((w.eval(k).re / w.eval(k + 1).re).sqrt(), 0.0)).collect();
        return Ok(alpha.mul(&CoefficientSequence::from_values(ratio, ONE)));
    }
    let (a, w) = (alpha.clone(), w.clone());
    Ok(CoefficientSequence::from_fn(move |k| a.eval(k) * (w.eval(k).re / w.eval(k + 1).re).sqrt()))
}

/// The unimodular gauge `V(k) = exp(i Σ_{j<k} Arg β(j))`, for which
/// `V(K)^{-1} D_β V(K) = D_{|β|}`.
pub fn gauge_phase(beta: &CoefficientSequence) -> Result<CoefficientSequence> {
    first_zero(beta, "beta")?;
    Ok(beta.map(|z| z / z.norm()).running_product())
}

fn modulus(beta: &CoefficientSequence) -> CoefficientSequence {
    beta.map(|z| Complex64::new(z.norm(), 0.0))
}

/// Which Fourier component a mode operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Sampled constants of the window `c₂(k+1) ≤ |β(k)| ≤ c₁(k+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWindow {
    pub c1: f64,
    pub c2: f64,
    /// Number of indices sampled; the constants are estimates.
    pub samples: usize,
}

/// Estimates `c₁ = max |β(k)|/(k+1)` and `c₂ = min |β(k)|/(k+1)` over `k < len`.
pub fn estimate_growth_window(beta: &CoefficientSequence, len: usize) -> GrowthWindow {
    let (mut c1, mut c2) = (0.0f64, f64::INFINITY);
    for (k, b) in beta.table(len).iter().enumerate() {
        let r = b.norm() / (k as f64 + 1.0);
        c1 = c1.max(r);
        c2 = c2.min(r);
    }
    GrowthWindow { c1, c2, samples: len }
}

/// One of the four bidiagonal Fourier components `D_n^+`, `D_n^-`,
/// `(D_n^+)*`, `(D_n^-)*` of the covariant implementation.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    sign: Sign,
    adjointed: bool,
    n: usize,
    beta: CoefficientSequence,
    mu: CoefficientSequence,
    alpha: CoefficientSequence,
    window: Option<GrowthWindow>,
}

impl ModeOperator {
    /// Builds the operator from `β` and `μ`; `α(k) = β(k) μ(k+1)/μ(k)`.
    pub fn new(sign: Sign, adjointed: bool, n: usize, beta: CoefficientSequence, mu: CoefficientSequence) -> Result<Self> {
        check_index(sign, n)?;
        if (mu.eval(0) - ONE).norm() > 1e-14 {
            return Err(Error::InvalidInput(format!("μ(0) must be 1, got {}", mu.eval(0))));
        }
        first_zero(&beta, "beta")?;
        first_zero(&mu, "mu")?;
        let alpha = beta.mul(&mu.shifted(1)).div(&mu);
        Ok(ModeOperator {
            sign,
            adjointed,
            n,
            beta,
            mu,
            alpha,
            window: None,
        })
    }

    /// Builds the operator from `β` and `α`, extracting `μ`.
    pub fn from_alpha(sign: Sign, adjointed: bool, n: usize, beta: CoefficientSequence, alpha: CoefficientSequence) -> Result<Self> {
        check_index(sign, n)?;
        let mu = mu_from_alpha(&beta, &alpha)?;
        Ok(ModeOperator {
            sign,
            adjointed,
            n,
            beta,
            mu,
            alpha,
            window: None,
        })
    }

    /// Records sampled growth-window constants; fails when `β` is not of
    /// linear growth on the sample (`c₂` not positive).
    pub fn with_growth_window(mut self, len: usize) -> Result<Self> {
        let window = estimate_growth_window(&self.beta, len);
        if !(window.c2 > 0.0) || !window.c1.is_finite() {
            return Err(Error::InvalidInput(format!(
                "β is not within a linear growth window on k < {len} (c₁ = {}, c₂ = {})",
                window.c1, window.c2
            )));
        }
        self.window = Some(window);
        Ok(self)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_adjointed(&self) -> bool {
        self.adjointed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> &CoefficientSequence {
        &self.beta
    }

    pub fn mu(&self) -> &CoefficientSequence {
        &self.mu
    }

    pub fn alpha(&self) -> &CoefficientSequence {
        &self.alpha
    }

    pub fn window(&self) -> Option<GrowthWindow> {
        self.window
    }

    /// The formal adjoint.
    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        out.adjointed = !out.adjointed;
        out
    }

    /// The same mode operator with `β` replaced by `|β|` and `α` kept.
    pub fn gauged(&self) -> Result<Self> {
        let mut out = Self::from_alpha(self.sign, self.adjointed, self.n, modulus(&self.beta), self.alpha.clone())?;
        out.window = self.window;
        Ok(out)
    }

    pub fn name(&self) -> String {
        let sign = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        if self.adjointed {
            format!("(D_{}^{sign})*", self.n)
        } else {
            format!("D_{}^{sign}", self.n)
        }
    }

    /// Whether the recursion `D f = 0` has a nonzero solution.
    pub fn has_formal_kernel(&self) -> bool {
        matches!((self.sign, self.adjointed), (Sign::Plus, false) | (Sign::Minus, true))
    }

    /// Diagonal and off-diagonal coefficients at row `k`:
    /// `(D f)(k) = diag(k) f(k) + off(k) f(k + step)` with `step = ±1`.
    fn coefficients(&self, k: i64) -> (Complex64, Complex64, i64) {
        let n = self.n as i64;
        match (self.sign, self.adjointed) {
            (Sign::Plus, false) => (self.beta.eval(k + n), -self.alpha.eval(k), 1),
            (Sign::Minus, false) => (self.alpha.eval(k + n - 1), -self.beta.eval(k - 1), -1),
            (Sign::Plus, true) => (self.beta.eval(k + n).conj(), -self.alpha.eval(k - 1).conj(), -1),
            (Sign::Minus, true) => (self.alpha.eval(k + n - 1).conj(), -self.beta.eval(k).conj(), 1),
        }
    }

    /// `(D f)(k)` for a sequence given pointwise; `f` is taken to vanish at
    /// negative indices.
    pub fn apply(&self, f: impl Fn(i64) -> Complex64, k: i64) -> Complex64 {
        if k < 0 {
            return ZERO;
        }
        let (d, o, step) = self.coefficients(k);
        let next = k + step;
        let off = if next < 0 { ZERO } else { o * f(next) };
        d * f(k) + off
    }

    /// `D f` on `k < len` for a finitely supported `f`.
    pub fn apply_slice(&self, f: &[Complex64], len: usize) -> Vec<Complex64> {
        let at = |j: i64| f.get(j as usize).copied().unwrap_or(ZERO);
        (0..len as i64).map(|k| self.apply(at, k)).collect()
    }

    /// The compression `P_N D P_N`; rows below `N − 1` agree with the
    /// infinite operator on vectors supported in `[0, N)`.
    pub fn truncation(&self, size: usize) -> Truncation {
        let mut m = CMatrix::from_element(size, size, ZERO);
        for k in 0..size as i64 {
            let (d, o, step) = self.coefficients(k);
            m[(k as usize, k as usize)] = d;
            let j = k + step;
            if (0..size as i64).contains(&j) {
                m[(k as usize, j as usize)] = o;
            }
        }
        Truncation {
            size,
            matrix: m,
            boundary: Boundary::Compression,
        }
    }
}

fn check_index(sign: Sign, n: usize) -> Result<()> {
    if sign == Sign::Minus && n == 0 {
        return Err(Error::InvalidInput("minus modes start at n = 1".into()));
    }
    Ok(())
}

/// `(D f)(k)` for a coefficient sequence `f` (values at negative indices are
/// ignored).
pub fn apply_mode(op: &ModeOperator, f: &CoefficientSequence, k: i64) -> Complex64 {
    op.apply(|j| f.eval(j), k)
}

/// Generator of the one-dimensional formal kernel:
///
/// * `D_n^+`: `f(k) = ∏_{j<n} β(j+k) / μ(k)`,
/// * `(D_n^-)*`: `f(k) = μ̄(k+n−1) ∏_{j<n−1} β̄(j+k)`.
#[derive(Debug, Clone)]
pub struct KernelGenerator {
    op: ModeOperator,
}

impl KernelGenerator {
    pub fn operator(&self) -> &ModeOperator {
        &self.op
    }

    pub fn eval(&self, k: i64) -> Complex64 {
        if k < 0 {
            return ZERO;
        }
        let (beta, mu, n) = (&self.op.beta, &self.op.mu, self.op.n as i64);
        match self.op.sign {
            Sign::Plus => (0..n).map(|j| beta.eval(j + k)).product::<Complex64>() / mu.eval(k),
            Sign::Minus => mu.eval(k + n - 1).conj() * (0..n - 1).map(|j| beta.eval(j + k).conj()).product::<Complex64>(),
        }
    }

    /// `ln |f(k)|` for `k = 0..len`, accumulated without forming the products.
    pub fn log_abs_table(&self, len: usize) -> Vec<f64> {
        let n = self.op.n;
        let ln_beta: Vec<f64> = self.op.beta.table(len + n).iter().map(|b| b.norm().ln()).collect();
        let ln_mu: Vec<f64> = self.op.mu.log_table(len + n).iter().map(|(l, _)| *l).collect();
        (0..len)
            .map(|k| match self.op.sign {
                Sign::Plus => ln_beta[k..k + n].iter().sum::<f64>() - ln_mu[k],
                Sign::Minus => ln_mu[k + n - 1] + ln_beta[k..k + n - 1].iter().sum::<f64>(),
            })
            .collect()
    }

    pub fn to_sequence(&self) -> CoefficientSequence {
        let g = self.clone();
        CoefficientSequence::from_fn(move |k| g.eval(k))
    }
}

/// The formal kernel of `D_n^+` or `(D_n^-)*`; the other two operators have
/// none (their recursions force `f(0) = 0` and then `f ≡ 0`).
pub fn formal_kernel(op: &ModeOperator) -> Result<KernelGenerator> {
    if !op.has_formal_kernel() {
        return Err(Error::NoKernel(op.name()));
    }
    Ok(KernelGenerator { op: op.clone() })
}

/// `ln Σ_{k≤N} |f(k)|²` for the formal kernel, by log-sum-exp.
pub fn kernel_log_norm_partial(op: &ModeOperator, last: usize) -> Result<f64> {
    let logs = formal_kernel(op)?.log_abs_table(last + 1);
    Ok(log_sum_exp(logs.iter().map(|l| 2.0 * l)))
}

/// `Σ_{k≤N} |f(k)|²` for the formal kernel; overflows to an error rather than
/// to infinity (use [`kernel_log_norm_partial`] beyond that range).
pub fn kernel_norm_partial(op: &ModeOperator, last: usize) -> Result<f64> {
    let log = kernel_log_norm_partial(op, last)?;
    let v = log.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("kernel partial norm e^{log:.1} of {}", op.name())))
    }
}

/// Least-squares slope of `ln Σ_{k≤N} |f(k)|²` against `ln N` over the given
/// truncation sizes.
pub fn kernel_growth_exponent(op: &ModeOperator, sizes: &[usize]) -> Result<f64> {
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        points.push(((n as f64).ln(), kernel_log_norm_partial(op, n)?));
    }
    super::fit_slope(&points).ok_or_else(|| Error::InvalidInput("need two distinct truncation sizes".into()))
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let (mut max, mut acc) = (f64::NEG_INFINITY, 0.0);
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v > max {
            acc = acc * (max - v).exp() + 1.0;
            max = v;
        } else {
            acc += (v - max).exp();
        }
    }
    max + acc.ln()
}

/// Explicit inverse of a mode operator on a finitely supported `g`:
///
/// ```text
/// (D_n^+)^{-1} g(k)     = Σ_{j≥k} [β(k)⋯β(k+n−1) / β(j)⋯β(j+n)] μ(j)/μ(k) g(j)
/// (D_n^-)^{-1} g(k)     = Σ_{j≤k} [β(j)⋯β(j+n−2) / β(k)⋯β(k+n−1)] μ(j+n−1)/μ(k+n) g(j)
/// ((D_n^+)*)^{-1} g(k)  = Σ_{j≤k} [β̄(j)⋯β̄(j+n−1) / β̄(k)⋯β̄(k+n)] μ̄(k)/μ̄(j) g(j)
/// ((D_n^-)*)^{-1} g(k)  = Σ_{j≥k} [β̄(k)⋯β̄(k+n−2) / β̄(j)⋯β̄(j+n−1)] μ̄(k+n−1)/μ̄(j+n) g(j)
/// ```
///
/// Empty products are 1, which covers `n = 1` (and `n = 0` for plus modes).
/// The two upward sums return finitely supported solutions (the ones in
/// `c₀`); the downward sums are the unique solutions.
pub fn inverse_mode(op: &ModeOperator, g: &[Complex64]) -> CoefficientSequence {
    let (beta, mu) = (op.beta.clone(), op.mu.clone());
    let n = op.n as i64;
    let g: Vec<Complex64> = g.to_vec();
    let support = g.len() as i64;
    let conj = op.adjointed;
    let b = move |i: i64| if conj { beta.eval(i).conj() } else { beta.eval(i) };
    let m = move |i: i64| if conj { mu.eval(i).conj() } else { mu.eval(i) };
    let prod = move |from: i64, to: i64| (from..=to).map(&b).product::<Complex64>();
    match (op.sign, op.adjointed) {
        (Sign::Plus, false) => CoefficientSequence::from_fn(move |k| {
            (k.max(0)..support)
                .map(|j| prod(k, k + n - 1) / prod(j, j + n) * (m(j) / m(k)) * g[j as usize])
                .sum()
        }),
        (Sign::Minus, false) => CoefficientSequence::from_fn(move |k| {
            (0..=k.min(support - 1))
                .map(|j| prod(j, j + n - 2) / prod(k, k + n - 1) * (m(j + n - 1) / m(k + n)) * g[j as usize])
                .sum()
        }),
        (Sign::Plus, true) => CoefficientSequence::from_fn(move |k| {
            (0..=k.min(support - 1))
                .map(|j| prod(j, j + n - 1) / prod(k, k + n) * (m(k) / m(j)) * g[j as usize])
                .sum()
        }),
        (Sign::Minus, true) => CoefficientSequence::from_fn(move |k| {
            (k.max(0)..support)
                .map(|j| prod(k, k + n - 2) / prod(j, j + n - 1) * (m(k + n - 1) / m(j + n)) * g[j as usize])
                .sum()
        }),
    }
}

/// `max_k |D(D^{-1} g)(k) − g(k)| / max |g|` over `k < len`.
pub fn round_trip_defect(op: &ModeOperator, g: &[Complex64], len: usize) -> f64 {
    let f = inverse_mode(op, g);
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    (0..len as i64)
        .map(|k| {
            let target = g.get(k as usize).copied().unwrap_or(ZERO);
            (apply_mode(op, &f, k) - target).norm()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Outcome of the two-sided bound `1/(C(k+1)^{n₁}) ≤ |μ(k)| ≤ C(k+1)^{n₁}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuGrowth {
    pub holds: bool,
    pub first_violation: Option<usize>,
    pub checked: usize,
}

/// Checks the polynomial bound on `|μ(k)|` for `k < len`, in log form.
pub fn mu_growth_check(mu: &CoefficientSequence, n1: f64, c: f64, len: usize) -> MuGrowth {
    let ln_c = c.ln();
    let violation = mu.log_table(len).iter().enumerate().position(|(k, (l, _))| {
        let bound = ln_c + n1 * (k as f64 + 1.0).ln();
        !(l.abs() <= bound * (1.0 + 1e-14) + 1e-14)
    });
    MuGrowth {
        holds: violation.is_none(),
        first_violation: violation,
        checked: len,
    }
}

/// `max |V̄_out T_β V_in − T_{|β|}|` on a truncation, where the multipliers are
/// the gauge phase at the offsets of the input and output Fourier modes.
pub fn gauge_defect(op: &ModeOperator, size: usize) -> Result<f64> {
    let v = gauge_phase(op.beta())?.table(size + op.n + 2);
    let (in_off, out_off) = match op.sign {
        Sign::Plus => (op.n, op.n + 1),
        Sign::Minus => (0, 0),
    };
    let vin: Vec<Complex64> = (0..size).map(|k| v[k + in_off]).collect();
    let vout: Vec<Complex64> = (0..size).map(|k| v[k + out_off]).collect();
    let t = op.truncation(size).matrix;
    let gauged = op.gauged()?.truncation(size).matrix;
    let (left, right) = if op.adjointed { (vin, vout) } else { (vout, vin) };
    let left = linalg::diagonal(&left.iter().map(|z| z.conj()).collect::<Vec<_>>());
    let right = linalg::diagonal(&right);
    Ok(linalg::max_abs(&(left * t * right - gauged)))
}

/// Right multiplication by `w(K)^{1/2}`: the isometry from the weighted GNS
/// space onto the unweighted (Hilbert–Schmidt) space.
pub fn transfer_weight(f: &AlgebraElement, w: &CoefficientSequence) -> AlgebraElement {
    let root = w.map(|z| Complex64::new(z.re.sqrt(), 0.0));
    let mut out = AlgebraElement::zero();
    for (n, a) in f.modes() {
        // U^n a(K) w(K)^{1/2} and a(K) (U*)^n w(K)^{1/2} = a(K) w(K+n)^{1/2} (U*)^n
        let factor = if n >= 0 { root.clone() } else { root.shifted(-n) };
        out = out.add(&AlgebraElement::mode(n, a.mul(&factor)));
    }
    out
}

/// Hilbert–Schmidt norm `tr(f* f)^{1/2}` of an element with square-summable
/// coefficients.
pub fn hilbert_schmidt_norm(f: &AlgebraElement) -> Result<f64> {
    let mut total = 0.0;
    for (_, a) in f.modes() {
        let sq = a.map(|z| Complex64::new(z.norm_sqr(), 0.0));
        total += sum_sequence(&sq)?.re;
    }
    Ok(total.sqrt())
}

/// `|‖f‖_w − ‖f w(K)^{1/2}‖_HS|`.
pub fn weight_transfer_defect(space: &WeightedSpace, f: &AlgebraElement) -> Result<f64> {
    let weighted = GnsVector::Weighted {
        space: space.clone(),
        f: f.clone(),
    }
    .norm()?;
    let unweighted = hilbert_schmidt_norm(&transfer_weight(f, space.weight()))?;
    Ok((weighted - unweighted).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::Rng;
    use std::f64::consts::PI;

    fn seq(text: &str) -> CoefficientSequence {
        CoefficientSequence::parse(text).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn all_ops(n: usize, beta: &CoefficientSequence, mu: &CoefficientSequence) -> Vec<ModeOperator> {
        let mut out = Vec::new();
        for sign in [Sign::Plus, Sign::Minus] {
            for adj in [false, true] {
                out.push(ModeOperator::new(sign, adj, n.max(1), beta.clone(), mu.clone()).unwrap());
            }
        }
        out
    }

    #[test]
    fn mu_from_alpha_examples() {
        let beta = seq("k+1");
        let mu = mu_from_alpha(&beta, &beta).unwrap();
        assert!((0..50).all(|k| mu.eval(k) == ONE));
        let mu = mu_from_alpha(&beta, &seq("2*(k+1)")).unwrap();
        for k in 0..40 {
            assert!((mu.eval(k) - c(2f64.powi(k as i32))).norm() <= 1e-12 * 2f64.powi(k as i32));
        }
        let mu = mu_from_alpha(&beta, &seq("k+2")).unwrap();
        for k in 0..100 {
            assert!((mu.eval(k) - c(k as f64 + 1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn mu_from_alpha_names_first_zero() {
        let err = mu_from_alpha(&seq("k+1"), &seq("k")).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficient { name: "alpha", k: 0 });
        let err = mu_from_alpha(&seq("k-3"), &seq("1")).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficient { name: "beta", k: 3 });
        let err = mu_from_alpha(&seq("1"), &CoefficientSequence::from_values(vec![ONE, ONE], ZERO)).unwrap_err();
        assert_eq!(err, Error::ZeroCoefficient { name: "alpha", k: 2 });
    }

    #[test]
    fn unweight_examples() {
        let alpha = seq("k+1");
        let same = unweight(&alpha, &CoefficientSequence::real(3.0)).unwrap();
        assert!(same.approx_eq(&alpha, 1e-15));
        let t = unweight(&seq("1"), &seq("2^(-(k+1))")).unwrap();
        for k in 0..200 {
            assert!((t.eval(k) - c(2f64.sqrt())).norm() < 1e-12);
        }
        let t = unweight(&alpha, &seq("(k+1)^(-2)")).unwrap();
        for k in 0..200 {
            assert!((t.eval(k) - c(k as f64 + 2.0)).norm() < 1e-10);
        }
        assert_eq!(unweight(&alpha, &seq("1-k")).unwrap_err(), Error::NonpositiveWeight { k: 1 });
    }

    #[test]
    fn gauge_phase_examples() {
        let v = gauge_phase(&seq("k+1")).unwrap();
        assert!((0..100).all(|k| v.eval(k) == ONE));
        let v = gauge_phase(&seq("i*(k+1)")).unwrap();
        for k in 0..100 {
            let expected = Complex64::from_polar(1.0, k as f64 * PI / 2.0);
            assert!((v.eval(k) - expected).norm() < 1e-12);
        }
        let v = gauge_phase(&seq("-(k+1)")).unwrap();
        for k in 0..100 {
            assert!((v.eval(k) - c(if k % 2 == 0 { 1.0 } else { -1.0 })).norm() < 1e-12);
        }
        assert!(gauge_phase(&seq("k-2")).is_err());
    }

    #[test]
    fn gauge_conjugation_is_exact() {
        let beta = seq("(2+i)*(k+1) + exp(i*k)");
        let alpha = seq("k+2");
        for sign in [Sign::Plus, Sign::Minus] {
            for adj in [false, true] {
                let op = ModeOperator::from_alpha(sign, adj, 2, beta.clone(), alpha.clone()).unwrap();
                assert!(gauge_defect(&op, 40).unwrap() < 1e-10, "{}", op.name());
                let s1 = linalg::singular_values(&op.truncation(40).matrix);
                let s2 = linalg::singular_values(&op.gauged().unwrap().truncation(40).matrix);
                for (a, b) in s1.iter().zip(&s2) {
                    assert!((a - b).abs() < 1e-9 * (1.0 + a));
                }
            }
        }
    }

    #[test]
    fn apply_mode_examples() {
        let beta = seq("k+1");
        let mu = CoefficientSequence::one();
        let plus = ModeOperator::new(Sign::Plus, false, 1, beta.clone(), mu.clone()).unwrap();
        assert_eq!(apply_mode(&plus, &CoefficientSequence::one(), 0), c(1.0));
        let e0 = CoefficientSequence::indicator(0);
        for n in 1..4 {
            let minus = ModeOperator::new(Sign::Minus, false, n, beta.clone(), mu.clone()).unwrap();
            assert_eq!(apply_mode(&minus, &e0, 0), minus.alpha().eval(n as i64 - 1));
            let plus_adj = ModeOperator::new(Sign::Plus, true, n, beta.clone(), mu.clone()).unwrap();
            assert_eq!(apply_mode(&plus_adj, &e0, 0), beta.eval(n as i64).conj());
        }
    }

    #[test]
    fn adjoint_truncation_is_conjugate_transpose() {
        let beta = seq("(1+i)*k + 2");
        let mu = seq("k^2+1");
        for sign in [Sign::Plus, Sign::Minus] {
            let op = ModeOperator::new(sign, false, 2, beta.clone(), mu.clone()).unwrap();
            let t = op.truncation(12).matrix;
            let ta = op.adjoint().truncation(12).matrix;
            assert!(linalg::max_abs(&(t.adjoint() - ta)) < 1e-12);
        }
    }

    #[test]
    fn truncation_matches_action_in_the_interior() {
        let op = ModeOperator::new(Sign::Plus, false, 1, seq("k+1"), seq("k+1")).unwrap();
        let size = 10;
        let t = op.truncation(size).matrix;
        let f: Vec<Complex64> = (0..size).map(|k| c(k as f64 * 0.5 - 1.0)).collect();
        let exact = op.apply_slice(&f, size);
        let v = &t * nalgebra::DVector::from_column_slice(&f);
        for k in 0..size - 1 {
            assert!((v[k] - exact[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn formal_kernel_examples() {
        let one = CoefficientSequence::one();
        let op = ModeOperator::new(Sign::Plus, false, 1, seq("k+1"), one.clone()).unwrap();
        let f = formal_kernel(&op).unwrap();
        assert!((0..50).all(|k| f.eval(k) == c(k as f64 + 1.0)));
        let mu = seq("2^k");
        let op = ModeOperator::new(Sign::Plus, false, 0, seq("k+1"), mu.clone()).unwrap();
        let f = formal_kernel(&op).unwrap();
        assert!((0..50).all(|k| (f.eval(k) - 1.0 / mu.eval(k)).norm() < 1e-15));
        let op = ModeOperator::new(Sign::Plus, false, 2, seq("k+1"), seq("k+1")).unwrap();
        let f = formal_kernel(&op).unwrap();
        assert!((0..50).all(|k| (f.eval(k) - c(k as f64 + 2.0)).norm() < 1e-12));
        for (sign, adj) in [(Sign::Minus, false), (Sign::Plus, true)] {
            let op = ModeOperator::new(sign, adj, 1, seq("k+1"), one.clone()).unwrap();
            assert!(matches!(formal_kernel(&op), Err(Error::NoKernel(_))));
        }
    }

    #[test]
    fn formal_kernels_are_annihilated() {
        let mut rng = random::rng(17);
        for _ in 0..20 {
            let beta = CoefficientSequence::affine(c(rng.gen_range(0.5..3.0)), random::complex(&mut rng) + 2.0);
            let mu = CoefficientSequence::eventually(
                Vec::new(),
                crate::sequences::Poly::new(vec![ONE, random::complex(&mut rng) + 1.5, c(rng.gen_range(0.0..1.0))]),
            );
            let n = rng.gen_range(1..=4);
            for sign in [Sign::Plus, Sign::Minus] {
                let adj = sign == Sign::Minus;
                let op = ModeOperator::new(sign, adj, n, beta.clone(), mu.clone()).unwrap();
                let f = formal_kernel(&op).unwrap().to_sequence();
                for k in 0..200 {
                    let (d, _, step) = op.coefficients(k);
                    let scale = (d * f.eval(k)).norm() + f.eval(k + step).norm() * op.alpha().eval(k).norm();
                    assert!(apply_mode(&op, &f, k).norm() <= 1e-12 * scale, "{} at {k}", op.name());
                }
            }
        }
    }

    #[test]
    fn kernel_partial_norms() {
        let one = CoefficientSequence::one();
        let op = ModeOperator::new(Sign::Plus, false, 1, seq("k+1"), one.clone()).unwrap();
        assert!((kernel_norm_partial(&op, 10).unwrap() - 506.0).abs() < 1e-9);
        let op0 = ModeOperator::new(Sign::Plus, false, 0, seq("k+1"), one.clone()).unwrap();
        assert!((kernel_norm_partial(&op0, 99).unwrap() - 100.0).abs() < 1e-9);
        let geometric = ModeOperator::new(Sign::Plus, false, 0, seq("k+1"), seq("2^k")).unwrap();
        assert!((kernel_norm_partial(&geometric, 200).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let exponent = kernel_growth_exponent(&op, &[1_000, 10_000, 100_000]).unwrap();
        assert!((exponent - 3.0).abs() < 0.01, "{exponent}");
    }

    #[test]
    fn kernel_norms_survive_factorial_growth() {
        let op = ModeOperator::new(Sign::Minus, true, 1, seq("k+1"), seq("k+1")).unwrap();
        assert!(kernel_log_norm_partial(&op, 100_000).unwrap().is_finite());
        let fast = ModeOperator::from_alpha(Sign::Plus, false, 1, seq("1"), seq("(k+1)^(-1)")).unwrap();
        // 1/μ(k) = k!: the sum overflows f64 but its logarithm does not
        let log = kernel_log_norm_partial(&fast, 1000).unwrap();
        assert!(log.is_finite() && log > 709.0);
        assert!(matches!(kernel_norm_partial(&fast, 1000), Err(Error::Overflow(_))));
    }

    #[test]
    fn inverse_examples() {
        let one = CoefficientSequence::one();
        let op = ModeOperator::new(Sign::Minus, false, 1, seq("k+1"), one.clone()).unwrap();
        let f = inverse_mode(&op, &[ONE]);
        for k in 0..50 {
            assert!((f.eval(k) - c(1.0 / (k as f64 + 1.0))).norm() < 1e-15);
        }
        let e3: Vec<Complex64> = (0..4).map(|k| if k == 3 { ONE } else { ZERO }).collect();
        let g = op.apply_slice(&e3, 6);
        let back = inverse_mode(&op, &g);
        for k in 0..20 {
            assert!((back.eval(k) - e3.get(k as usize).copied().unwrap_or(ZERO)).norm() < 1e-14);
        }
        let adj = ModeOperator::new(Sign::Minus, true, 1, seq("k+1"), one).unwrap();
        assert!(round_trip_defect(&adj, &[ONE], 10) < 1e-15);
        // D_1^- with μ ≡ 1 and β = k+1 has α = k+1; the solution is 1/(k+1) at k = 0 only
        let f = inverse_mode(&adj, &[ONE]);
        assert_eq!(f.eval(0), c(1.0));
        assert_eq!(f.eval(1), ZERO);
    }

    #[test]
    fn inverse_round_trips_for_all_four_kinds() {
        let mut rng = random::rng(5);
        for _ in 0..10 {
            let beta = CoefficientSequence::affine(random::complex(&mut rng) + 1.5, random::complex(&mut rng) + 3.0);
            let mu = seq("1 + k/3 + k^2/7").mul(&CoefficientSequence::constant(ONE));
            let n = rng.gen_range(1..=4);
            let g: Vec<Complex64> = (0..16).map(|_| random::complex(&mut rng)).collect();
            for op in all_ops(n, &beta, &mu) {
                let d = round_trip_defect(&op, &g, 40);
                assert!(d < 1e-12, "{} defect {d}", op.name());
            }
            let plus0 = ModeOperator::new(Sign::Plus, false, 0, beta.clone(), mu.clone()).unwrap();
            assert!(round_trip_defect(&plus0, &g, 40) < 1e-12);
        }
    }

    #[test]
    fn mu_growth_examples() {
        assert!(mu_growth_check(&CoefficientSequence::one(), 0.0, 1.0, 1000).holds);
        assert!(mu_growth_check(&seq("k+1"), 1.0, 1.0, 1000).holds);
        assert!(mu_growth_check(&seq("(k+1)^(-1)"), 1.0, 1.0, 1000).holds);
        let mu = mu_from_alpha(&seq("k+1"), &seq("2*(k+1)")).unwrap();
        for (n1, c) in [(0.0, 1.0), (8.0, 1e6), (3.0, 10.0)] {
            let report = mu_growth_check(&mu, n1, c, 5000);
            assert!(!report.holds);
            let k = report.first_violation.unwrap();
            assert!(k as f64 * 2f64.ln() > c.ln() + n1 * (k as f64 + 1.0).ln());
        }
    }

    #[test]
    fn growth_window_estimates() {
        let op = ModeOperator::new(Sign::Plus, false, 1, seq("2*k+3"), CoefficientSequence::one())
            .unwrap()
            .with_growth_window(1000)
            .unwrap();
        let w = op.window().unwrap();
        assert!((w.c1 - 3.0).abs() < 1e-12);
        assert!((w.c2 - 2.001).abs() < 1e-12);
        let sqrt = ModeOperator::new(Sign::Plus, false, 1, seq("sqrt(k+1)"), CoefficientSequence::one()).unwrap();
        assert!(sqrt.with_growth_window(100).unwrap().window().unwrap().c2 < 0.11);
    }

    #[test]
    fn weight_transfer_is_isometric() {
        let space = WeightedSpace::new(seq("2^(-(k+1))")).unwrap();
        let mut rng = random::rng(9);
        for _ in 0..10 {
            let f = random::element(&mut rng, 3, 5);
            let defect = weight_transfer_defect(&space, &f).unwrap();
            assert!(defect < 1e-10, "{defect}");
        }
    }
}
