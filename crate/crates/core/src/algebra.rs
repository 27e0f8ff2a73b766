//! Normal-form arithmetic in the polynomial Toeplitz algebra.
//!
//! An element is a finite sum `Σ_{n>=0} U^n a_n^+(K) + Σ_{n>=1} a_n^-(K) (U*)^n`
//! where `U` is the unilateral shift and `a(K)` the diagonal operator with
//! symbol `a`. Mode `n >= 0` stores `a_n^+`, mode `-n` stores `a_n^-`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{CoefficientSequence, StructuralClass};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Finite Fourier sum in normal form.
#[derive(Clone, Default)]
pub struct AlgebraElement {
    modes: BTreeMap<i64, CoefficientSequence>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::diagonal(CoefficientSequence::one())
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::diagonal(CoefficientSequence::constant(c))
    }

    /// The diagonal operator `a(K)`.
    pub fn diagonal(a: CoefficientSequence) -> Self {
        Self::mode(0, a)
    }

    /// A single mode: `U^n a(K)` for `n >= 0`, `a(K)(U*)^{-n}` for `n < 0`.
    pub fn mode(n: i64, a: CoefficientSequence) -> Self {
        let mut out = Self::zero();
        out.add_mode(n, a);
        out
    }

    pub fn shift() -> Self {
        Self::shift_power(1)
    }

    pub fn shift_adjoint() -> Self {
        Self::shift_power(-1)
    }

    /// `U^n` for `n >= 0`, `(U*)^{-n}` for `n < 0`.
    pub fn shift_power(n: i64) -> Self {
        Self::mode(n, CoefficientSequence::one())
    }

    /// The rank-one projection `e_j(K)` onto `E_j`.
    pub fn projection(j: usize) -> Self {
        Self::diagonal(CoefficientSequence::indicator(j))
    }

    /// `P_{>=m} = U^m (U*)^m`.
    pub fn projection_from(m: usize) -> Self {
        Self::diagonal(CoefficientSequence::indicator_from(m))
    }

    fn add_mode(&mut self, n: i64, a: CoefficientSequence) {
        if a.is_structurally_zero() {
            return;
        }
        let entry = match self.modes.remove(&n) {
            Some(prev) => prev.add(&a),
            None => a,
        };
        if !entry.is_structurally_zero() {
            self.modes.insert(n, entry.normalized());
        }
    }

    /// Coefficient of mode `n`, zero if absent.
    pub fn coefficient(&self, n: i64) -> CoefficientSequence {
        self.modes.get(&n).cloned().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &CoefficientSequence)> {
        self.modes.iter().map(|(n, a)| (*n, a))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `|n|` among the stored modes.
    pub fn band(&self) -> usize {
        self.modes.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// True when every coefficient is eventually constant, i.e. the element
    /// lies in the polynomial algebra generated by `U` and `U*`.
    pub fn in_polynomial_algebra(&self) -> bool {
        self.modes
            .values()
            .all(|a| a.class() == StructuralClass::EventuallyConstant)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, a) in &other.modes {
            out.add_mode(*n, a.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for (n, a) in &self.modes {
            out.add_mode(*n, a.scale(s));
        }
        out
    }

    /// Normal form of the operator product `self · other`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&m, a) in &self.modes {
            for (&n, b) in &other.modes {
                let (mode, coeff) = mode_product(m, a, n, b);
                out.add_mode(mode, coeff);
            }
        }
        out
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.multiply(other).sub(&other.multiply(self))
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(), |acc, _| acc.multiply(self))
    }

    /// `(U^n a(K))* = ā(K)(U*)^n` and `(a(K)(U*)^n)* = U^n ā(K)`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (n, a) in &self.modes {
            out.add_mode(-n, a.conj());
        }
        out
    }

    /// The circle action: `ρ_θ(U) = e^{iθ} U`, so mode `n` gains `e^{inθ}`.
    pub fn rotate(&self, theta: f64) -> Self {
        let mut out = Self::zero();
        for (n, a) in &self.modes {
            out.add_mode(*n, a.scale(Complex64::from_polar(1.0, *n as f64 * theta)));
        }
        out
    }

    /// Circle average of the rotations: keeps mode 0 only.
    pub fn average(&self) -> Self {
        Self::diagonal(self.expectation())
    }

    /// Conditional expectation onto the diagonal: the mode-0 coefficient.
    pub fn expectation(&self) -> CoefficientSequence {
        self.coefficient(0)
    }

    /// Compression `P_N a P_N` in the basis `E_0..E_{N-1}`.
    ///
    /// For band `B`, entries with both indices below `N - B` are exact entries
    /// of the infinite matrix (in fact every entry of the compression is).
    pub fn to_matrix(&self, size: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(size, size, ZERO);
        for (&n, a) in &self.modes {
            let shift = n.unsigned_abs() as usize;
            if shift >= size {
                continue;
            }
            let values = a.table(size - shift);
            for (j, v) in values.into_iter().enumerate() {
                if n >= 0 {
                    // U^n a(K) E_j = a(j) E_{j+n}
                    m[(j + shift, j)] += v;
                } else {
                    // a(K)(U*)^n E_{j+n} = a(j) E_j
                    m[(j, j + shift)] += v;
                }
            }
        }
        m
    }

    /// Pointwise comparison of every mode.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<i64> =
            self.modes.keys().chain(other.modes.keys()).copied().collect();
        keys.into_iter()
            .all(|n| self.coefficient(n).approx_eq(&other.coefficient(n), tol))
    }

    /// Largest coefficient deviation over modes and `k <= last`.
    pub fn max_deviation(&self, other: &Self, last: i64) -> f64 {
        let diff = self.sub(other);
        diff.modes
            .values()
            .flat_map(|a| (0..=last).map(move |k| a.eval(k).norm()))
            .fold(0.0, f64::max)
    }

    /// Parses a textual element.
    ///
    /// Grammar: a sum of terms separated by `+`/`-`; each term is an optional
    /// numeric factor followed by factors joined by whitespace or `.`. Factors
    /// are `I`, `U`, `U*`, `U^n`, `U*^n`, `e_j` (projection onto `E_j`),
    /// `P_j` (projection onto `span{E_k : k >= j}`) and `[expr]` (the diagonal
    /// operator with the given coefficient expression).
    pub fn parse(text: &str) -> Result<Self> {
        ElementParser::new(text).parse()
    }
}

/// Product of a single mode `m` with coefficient `a` and a single mode `n`
/// with coefficient `b`, in normal form.
fn mode_product(
    m: i64,
    a: &CoefficientSequence,
    n: i64,
    b: &CoefficientSequence,
) -> (i64, CoefficientSequence) {
    match (m >= 0, n >= 0) {
        // U^m a U^n b = U^{m+n} a(K+n) b(K)
        (true, true) => (m + n, a.shifted(n).mul(b)),
        // a (U*)^m b (U*)^n = a(K) b(K+m) (U*)^{m+n}
        (false, false) => (m + n, a.mul(&b.shifted(-m))),
        // U^m (ab)(K) (U*)^n
        (true, false) => {
            let (m, n) = (m as usize, (-n) as usize);
            let c = a.mul(b);
            if m >= n {
                ((m - n) as i64, c.delayed(n))
            } else {
                (-((n - m) as i64), c.delayed(m))
            }
        }
        // a (U*)^m U^n b
        (false, true) => {
            let m = -m;
            if n >= m {
                (n - m, a.shifted(n - m).mul(b))
            } else {
                (n - m, a.mul(&b.shifted(m - n)))
            }
        }
    }
}

impl From<CoefficientSequence> for AlgebraElement {
    fn from(a: CoefficientSequence) -> Self {
        Self::diagonal(a)
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 0.0)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modes.is_empty() {
            return write!(f, "0");
        }
        for (i, (n, a)) in self.modes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match n {
                0 => write!(f, "[{a}]")?,
                1 => write!(f, "U [{a}]")?,
                -1 => write!(f, "[{a}] U*")?,
                n if *n > 1 => write!(f, "U^{n} [{a}]")?,
                n => write!(f, "[{a}] U*^{}", -n)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement({self})")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRecord {
    n: i64,
    coeff: CoefficientSequence,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRecord {
    modes: Vec<ModeRecord>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRecord {
            modes: self
                .modes
                .iter()
                .map(|(n, a)| ModeRecord { n: *n, coeff: a.clone() })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Record(ElementRecord),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Text(t) => AlgebraElement::parse(&t).map_err(serde::de::Error::custom),
            Repr::Record(r) => {
                let mut out = AlgebraElement::zero();
                for m in r.modes {
                    out.add_mode(m.n, m.coeff);
                }
                Ok(out)
            }
        }
    }
}

struct ElementParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ElementParser<'a> {
    fn new(src: &'a str) -> Self {
        ElementParser { src, pos: 0 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u64> {
        let digits: usize = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return self.err("expected an integer");
        }
        let v = self.rest()[..digits].parse().map_err(|_| Error::Parse {
            pos: self.pos,
            msg: "integer out of range".into(),
        })?;
        self.pos += digits;
        Ok(v)
    }

    fn number(&mut self) -> Option<f64> {
        let len = self
            .rest()
            .bytes()
            .take_while(|b| b.is_ascii_digit() || *b == b'.')
            .count();
        if len == 0 {
            return None;
        }
        let v = self.rest()[..len].parse().ok()?;
        self.pos += len;
        Some(v)
    }

    fn parse(mut self) -> Result<AlgebraElement> {
        let mut total = AlgebraElement::zero();
        let mut sign = ONE;
        self.skip_ws();
        if self.eat("-") {
            sign = -ONE;
        } else {
            self.eat("+");
        }
        loop {
            let term = self.term()?;
            total = total.add(&term.scale(sign));
            self.skip_ws();
            if self.rest().is_empty() {
                return Ok(total);
            }
            sign = if self.eat("+") {
                ONE
            } else if self.eat("-") {
                -ONE
            } else {
                return self.err("expected `+` or `-`");
            };
        }
    }

    fn term(&mut self) -> Result<AlgebraElement> {
        self.skip_ws();
        let mut acc = AlgebraElement::identity();
        let mut any = false;
        if let Some(c) = self.number() {
            let mut c = Complex64::new(c, 0.0);
            if self.eat("i") {
                c = Complex64::new(0.0, c.re);
            }
            acc = AlgebraElement::scalar(c);
            any = true;
        }
        loop {
            self.skip_ws();
            self.eat(".");
            self.skip_ws();
            let factor = match self.factor()? {
                Some(f) => f,
                None => break,
            };
            acc = acc.multiply(&factor);
            any = true;
        }
        if !any {
            return self.err("expected a term");
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Option<AlgebraElement>> {
        if self.eat("U*") {
            let p = if self.eat("^") { self.integer()? } else { 1 };
            return Ok(Some(AlgebraElement::shift_power(-(p as i64))));
        }
        if self.eat("U") {
            let p = if self.eat("^") { self.integer()? } else { 1 };
            return Ok(Some(AlgebraElement::shift_power(p as i64)));
        }
        if self.eat("I") {
            return Ok(Some(AlgebraElement::identity()));
        }
        if self.eat("e_") {
            let j = self.integer()?;
            return Ok(Some(AlgebraElement::projection(j as usize)));
        }
        if self.eat("P_") {
            let j = self.integer()?;
            return Ok(Some(AlgebraElement::projection_from(j as usize)));
        }
        if self.eat("[") {
            let close = match self.rest().find(']') {
                Some(c) => c,
                None => return self.err("unclosed `[`"),
            };
            let inner = &self.rest()[..close];
            let start = self.pos;
            let a = CoefficientSequence::parse(inner).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos: start + pos, msg },
                other => other,
            })?;
            self.pos += close + 1;
            return Ok(Some(AlgebraElement::diagonal(a)));
        }
        Ok(None)
    }
}
