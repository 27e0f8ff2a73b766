use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::expr::{BinOp, Expression};
use super::poly::Poly;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Length of the prefix table cached by running sums and products.
const RUNNING_TABLE: usize = 1 << 14;

/// Longest head turned into an indicator sum by [`CoefficientSequence::symbolic`].
const SYMBOLIC_HEAD: usize = 64;

/// Tail behaviour recorded as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralClass {
    EventuallyConstant,
    EventuallyAffine,
    /// Eventually a polynomial of the given degree (at least 2).
    EventuallyPolynomial(usize),
    General,
}

#[derive(Clone)]
enum Rule {
    /// `head[k]` for `k < head.len()`, then `tail(k)`.
    Eventual { head: Arc<[Complex64]>, tail: Poly },
    Expr(Arc<Expression>),
    Derived(Arc<dyn Fn(i64) -> Complex64 + Send + Sync>),
    Running(Arc<Running>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RunningKind {
    /// value(k) = Σ_{j<=k} term(j)
    Sum,
    /// value(0) = 1, value(k+1) = value(k) * term(k)
    Product,
}

struct Running {
    kind: RunningKind,
    term: CoefficientSequence,
    /// Sum: prefix values. Product: `(ln|value|, unit phase)`.
    sums: Vec<Complex64>,
    logs: Vec<(f64, Complex64)>,
}

impl Running {
    fn new(kind: RunningKind, term: CoefficientSequence) -> Self {
        let mut r = Running {
            kind,
            term,
            sums: Vec::new(),
            logs: Vec::new(),
        };
        match kind {
            RunningKind::Sum => r.sums = r.extend_sums(Vec::new(), RUNNING_TABLE),
            RunningKind::Product => r.logs = r.extend_logs(Vec::new(), RUNNING_TABLE),
        }
        r
    }

    fn extend_sums(&self, mut out: Vec<Complex64>, len: usize) -> Vec<Complex64> {
        let mut acc = out.last().copied().unwrap_or(ZERO);
        for k in out.len()..len {
            acc += self.term.eval(k as i64);
            out.push(acc);
        }
        out
    }

    fn extend_logs(&self, mut out: Vec<(f64, Complex64)>, len: usize) -> Vec<(f64, Complex64)> {
        if out.is_empty() && len > 0 {
            out.push((0.0, ONE));
        }
        let (mut log, mut phase) = *out.last().unwrap_or(&(0.0, ONE));
        for k in out.len()..len {
            let t = self.term.eval(k as i64 - 1);
            let r = t.norm();
            if r == 0.0 {
                log = f64::NEG_INFINITY;
            } else {
                log += r.ln();
                phase *= t / r;
            }
            out.push((log, phase));
        }
        out
    }

    fn value(&self, k: usize) -> Complex64 {
        match self.kind {
            RunningKind::Sum => {
                if k < self.sums.len() {
                    self.sums[k]
                } else {
                    self.extend_sums(self.sums.clone(), k + 1)[k]
                }
            }
            RunningKind::Product => {
                let (log, phase) = self.log_entry(k);
                if log == f64::NEG_INFINITY {
                    ZERO
                } else {
                    phase * log.exp()
                }
            }
        }
    }

    fn log_entry(&self, k: usize) -> (f64, Complex64) {
        if k < self.logs.len() {
            return self.logs[k];
        }
        // walk forward from the cached end without cloning the table
        let (mut log, mut phase) = *self.logs.last().unwrap();
        for j in self.logs.len()..=k {
            let t = self.term.eval(j as i64 - 1);
            let r = t.norm();
            if r == 0.0 {
                log = f64::NEG_INFINITY;
            } else {
                log += r.ln();
                phase *= t / r;
            }
        }
        (log, phase)
    }
}

/// A complex sequence on `k >= -1` with structural tail metadata.
///
/// The value at `k = -1` is a separate field, zero unless overridden; values
/// below `-1` are zero.
#[derive(Clone)]
pub struct CoefficientSequence {
    rule: Rule,
    at_minus_one: Complex64,
    source: Option<Arc<str>>,
}

impl CoefficientSequence {
    pub fn eventually(head: Vec<Complex64>, tail: Poly) -> Self {
        CoefficientSequence {
            rule: Rule::Eventual {
                head: head.into(),
                tail,
            },
            at_minus_one: ZERO,
            source: None,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::eventually(Vec::new(), Poly::constant(c))
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `slope * k + offset` for all `k >= 0`.
    pub fn affine(slope: Complex64, offset: Complex64) -> Self {
        Self::eventually(Vec::new(), Poly::affine(slope, offset))
    }

    /// Finite table of head values followed by a constant tail.
    pub fn from_values(head: Vec<Complex64>, tail: Complex64) -> Self {
        Self::eventually(head, Poly::constant(tail))
    }

    /// The indicator `e_j` of the single index `j`.
    pub fn indicator(j: usize) -> Self {
        let mut head = vec![ZERO; j + 1];
        head[j] = ONE;
        Self::from_values(head, ZERO)
    }

    /// The indicator of `{k >= m}`, i.e. the symbol of `P_{>=m}`.
    pub fn indicator_from(m: usize) -> Self {
        Self::from_values(vec![ZERO; m], ONE)
    }

    /// Arbitrary rule with no tail metadata.
    pub fn from_fn(f: impl Fn(i64) -> Complex64 + Send + Sync + 'static) -> Self {
        CoefficientSequence {
            rule: Rule::Derived(Arc::new(f)),
            at_minus_one: ZERO,
            source: None,
        }
    }

    /// Parses an expression in `k`. Eventually-polynomial expressions are
    /// stored with exact head/tail metadata; the text is kept for display.
    pub fn parse(text: &str) -> Result<Self> {
        let expr = Expression::parse(text)?;
        let mut seq = Self::from_expression(expr);
        seq.source = Some(text.trim().into());
        Ok(seq)
    }

    pub fn from_expression(expr: Expression) -> Self {
        let rule = match expr.eventual_polynomial() {
            Some((k0, tail)) => Rule::Eventual {
                head: (0..k0.max(0)).map(|k| expr.eval(k as f64)).collect(),
                tail,
            },
            None => Rule::Expr(Arc::new(expr)),
        };
        CoefficientSequence {
            rule,
            at_minus_one: ZERO,
            source: None,
        }
    }

    pub fn with_minus_one(mut self, value: Complex64) -> Self {
        self.at_minus_one = value;
        self
    }

    pub fn with_source(mut self, text: impl Into<Arc<str>>) -> Self {
        self.source = Some(text.into());
        self
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// An expression that evaluates to this sequence on `k >= 0`, when one is
    /// available: parsed and composed expressions, and eventually-polynomial
    /// sequences with a short head.
    pub fn symbolic(&self) -> Option<Expression> {
        match &self.rule {
            Rule::Expr(e) => Some((**e).clone()),
            Rule::Eventual { head, tail } if head.len() <= SYMBOLIC_HEAD => {
                let k = Expression::parse("k").expect("variable");
                let mut acc = Expression::literal(tail.coeff(0));
                let mut power = Expression::literal(ONE);
                for j in 1..=tail.degree() {
                    power = Expression::binary(BinOp::Mul, &power, &k);
                    let c = tail.coeff(j);
                    if c != ZERO {
                        let term = Expression::binary(BinOp::Mul, &Expression::literal(c), &power);
                        acc = Expression::binary(BinOp::Add, &acc, &term);
                    }
                }
                for (j, v) in head.iter().enumerate() {
                    let delta = v - tail.eval(j as f64);
                    if delta != ZERO {
                        let ind = Expression::parse(&format!("ind(k=={j})")).expect("indicator");
                        let term = Expression::binary(BinOp::Mul, &Expression::literal(delta), &ind);
                        acc = Expression::binary(BinOp::Add, &acc, &term);
                    }
                }
                Some(acc)
            }
            _ => None,
        }
    }

    pub fn eval(&self, k: i64) -> Complex64 {
        if k < -1 {
            return ZERO;
        }
        if k == -1 {
            return self.at_minus_one;
        }
        match &self.rule {
            Rule::Eventual { head, tail } => head
                .get(k as usize)
                .copied()
                .unwrap_or_else(|| tail.eval(k as f64)),
            Rule::Expr(e) => e.eval(k as f64),
            Rule::Derived(f) => f(k),
            Rule::Running(r) => r.value(k as usize),
        }
    }

    /// `ln |seq(k)|`, computed without overflow for running products.
    pub fn log_abs(&self, k: i64) -> f64 {
        match &self.rule {
            Rule::Running(r) if r.kind == RunningKind::Product && k >= 0 => r.log_entry(k as usize).0,
            _ => self.eval(k).norm().ln(),
        }
    }

    /// Values for `k = 0..len`.
    pub fn table(&self, len: usize) -> Vec<Complex64> {
        match &self.rule {
            Rule::Running(r) if r.kind == RunningKind::Sum => {
                let mut t = if len <= r.sums.len() {
                    r.sums[..len].to_vec()
                } else {
                    r.extend_sums(r.sums.clone(), len)
                };
                t.truncate(len);
                t
            }
            Rule::Running(_) => self
                .log_table(len)
                .into_iter()
                .map(|(l, p)| if l == f64::NEG_INFINITY { ZERO } else { p * l.exp() })
                .collect(),
            _ => (0..len as i64).map(|k| self.eval(k)).collect(),
        }
    }

    /// `(ln|seq(k)|, seq(k)/|seq(k)|)` for `k = 0..len`.
    pub fn log_table(&self, len: usize) -> Vec<(f64, Complex64)> {
        match &self.rule {
            Rule::Running(r) if r.kind == RunningKind::Product => {
                let mut t = if len <= r.logs.len() {
                    r.logs[..len].to_vec()
                } else {
                    r.extend_logs(r.logs.clone(), len)
                };
                t.truncate(len);
                t
            }
            _ => (0..len as i64)
                .map(|k| {
                    let v = self.eval(k);
                    let r = v.norm();
                    (r.ln(), if r == 0.0 { ONE } else { v / r })
                })
                .collect(),
        }
    }

    pub fn class(&self) -> StructuralClass {
        match &self.rule {
            Rule::Eventual { tail, .. } => match tail.degree() {
                0 => StructuralClass::EventuallyConstant,
                1 => StructuralClass::EventuallyAffine,
                d => StructuralClass::EventuallyPolynomial(d),
            },
            _ => StructuralClass::General,
        }
    }

    pub fn has_metadata(&self) -> bool {
        matches!(self.rule, Rule::Eventual { .. })
    }

    /// Domain constant `k0`: the tail rule holds for `k >= k0`.
    pub fn domain_constant(&self) -> Option<usize> {
        match &self.rule {
            Rule::Eventual { head, .. } => Some(head.len()),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&[Complex64]> {
        match &self.rule {
            Rule::Eventual { head, .. } => Some(head),
            _ => None,
        }
    }

    pub fn tail(&self) -> Option<&Poly> {
        match &self.rule {
            Rule::Eventual { tail, .. } => Some(tail),
            _ => None,
        }
    }

    /// Same sequence with the shortest head that still represents it.
    pub fn normalized(&self) -> Self {
        match &self.rule {
            Rule::Eventual { head, tail } => {
                let mut len = head.len();
                while len > 0 && head[len - 1] == tail.eval((len - 1) as f64) {
                    len -= 1;
                }
                let mut out = Self::eventually(head[..len].to_vec(), tail.clone());
                out.at_minus_one = self.at_minus_one;
                out.source = self.source.clone();
                out
            }
            _ => self.clone(),
        }
    }

    /// True when the sequence is zero on `k >= 0`, decided from metadata only.
    pub fn is_structurally_zero(&self) -> bool {
        match &self.rule {
            Rule::Eventual { head, tail } => tail.is_zero() && head.iter().all(|v| *v == ZERO),
            _ => false,
        }
    }

    /// Tail limit when the sequence is eventually constant.
    pub fn eventual_constant(&self) -> Option<Complex64> {
        match &self.rule {
            Rule::Eventual { tail, .. } if tail.degree() == 0 => Some(tail.coeff(0)),
            _ => None,
        }
    }

    /// `k ↦ seq(k) - seq(k-1)`.
    pub fn increments(&self) -> Self {
        let out = match &self.rule {
            Rule::Eventual { head, tail } => {
                let k0 = head.len() + 1;
                let head = (0..k0 as i64).map(|k| self.eval(k) - self.eval(k - 1)).collect();
                Self::eventually(head, tail.difference()).normalized()
            }
            _ => {
                let s = self.clone();
                Self::from_fn(move |k| s.eval(k) - s.eval(k - 1))
            }
        };
        out
    }

    /// `k ↦ Σ_{j=0}^{k} seq(j)`, with value 0 at `k = -1`.
    pub fn cumulative(&self) -> Self {
        match &self.rule {
            Rule::Eventual { head, tail } => {
                let k0 = head.len();
                let mut acc = ZERO;
                let sums: Vec<Complex64> = head
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc
                    })
                    .collect();
                let before = if k0 == 0 { ZERO } else { sums[k0 - 1] };
                let r = tail.antidifference();
                let offset = before - r.eval(k0 as f64 - 1.0);
                Self::eventually(sums, r.add(&Poly::constant(offset)))
            }
            _ => CoefficientSequence {
                rule: Rule::Running(Arc::new(Running::new(RunningKind::Sum, self.clone()))),
                at_minus_one: ZERO,
                source: None,
            },
        }
    }

    /// Running product: value 1 at `k = 0`, then `value(k+1) = value(k) * self(k)`.
    pub fn running_product(&self) -> Self {
        CoefficientSequence {
            rule: Rule::Running(Arc::new(Running::new(RunningKind::Product, self.clone()))),
            at_minus_one: ZERO,
            source: None,
        }
    }

    /// `k ↦ seq(k + p)`; the value at `-1` becomes `seq(p - 1)`.
    pub fn shifted(&self, p: i64) -> Self {
        if p == 0 {
            return self.clone();
        }
        let at_minus_one = self.eval(p - 1);
        let mut out = match &self.rule {
            Rule::Eventual { head, tail } => {
                let k0 = head.len() as i64;
                let new_k0 = (k0 - p).max(0);
                let head = (0..new_k0).map(|k| self.eval(k + p)).collect();
                Self::eventually(head, tail.shifted(p))
            }
            // forward shifts never reach the special index -1
            Rule::Expr(e) if p > 0 => Self::from_expression(e.shifted(p)),
            _ => {
                let s = self.clone();
                Self::from_fn(move |k| s.eval(k + p))
            }
        };
        out.at_minus_one = at_minus_one;
        out
    }

    /// `k ↦ seq(k - q)` for `k >= q` and zero below: the symbol of
    /// `U^q a(K) (U*)^q`.
    pub fn delayed(&self, q: usize) -> Self {
        if q == 0 {
            return self.clone();
        }
        let q = q as i64;
        match &self.rule {
            Rule::Eventual { head, tail } => {
                let k0 = head.len() as i64 + q;
                let head = (0..k0).map(|k| if k >= q { self.eval(k - q) } else { ZERO }).collect();
                Self::eventually(head, tail.shifted(-q))
            }
            _ => {
                let s = self.clone();
                Self::from_fn(move |k| if k >= q { s.eval(k - q) } else { ZERO })
            }
        }
    }

    fn zip(
        &self,
        other: &Self,
        op: fn(Complex64, Complex64) -> Complex64,
        poly: Option<fn(&Poly, &Poly) -> Poly>,
        symbol: Option<BinOp>,
    ) -> Self {
        let at_minus_one = op(self.at_minus_one, other.at_minus_one);
        let mut out = match (&self.rule, &other.rule, poly) {
            (Rule::Eventual { head: ha, tail: ta }, Rule::Eventual { head: hb, tail: tb }, Some(pf)) => {
                let k0 = ha.len().max(hb.len()) as i64;
                let head = (0..k0).map(|k| op(self.eval(k), other.eval(k))).collect();
                Self::eventually(head, pf(ta, tb))
            }
            _ => match (self.symbolic(), other.symbolic(), symbol) {
                (Some(x), Some(y), Some(sym)) => Self::from_expression(Expression::binary(sym, &x, &y)),
                _ => {
                    let (a, b) = (self.clone(), other.clone());
                    Self::from_fn(move |k| op(a.eval(k), b.eval(k)))
                }
            },
        };
        out.at_minus_one = at_minus_one;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b, Some(Poly::add), Some(BinOp::Add))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b, Some(Poly::sub), Some(BinOp::Sub))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b, Some(Poly::mul), Some(BinOp::Mul))
    }

    /// Pointwise quotient; never carries polynomial metadata.
    pub fn div(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a / b, None, Some(BinOp::Div))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.map_linear(s);
        out.at_minus_one = self.at_minus_one * s;
        out
    }

    fn map_linear(&self, s: Complex64) -> Self {
        match &self.rule {
            Rule::Eventual { head, tail } => {
                Self::eventually(head.iter().map(|v| v * s).collect(), tail.scale(s))
            }
            Rule::Expr(e) => Self::from_expression(Expression::binary(BinOp::Mul, &Expression::literal(s), e)),
            _ => {
                let a = self.clone();
                Self::from_fn(move |k| a.eval(k) * s)
            }
        }
    }

    pub fn conj(&self) -> Self {
        let mut out = match &self.rule {
            Rule::Eventual { head, tail } => {
                Self::eventually(head.iter().map(|v| v.conj()).collect(), tail.conj())
            }
            Rule::Expr(e) => Self::from_expression(e.conj()),
            _ => {
                let a = self.clone();
                Self::from_fn(move |k| a.eval(k).conj())
            }
        };
        out.at_minus_one = self.at_minus_one.conj();
        out
    }

    /// Pointwise map with no metadata, except that eventually constant input
    /// stays eventually constant.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        let at_minus_one = f(self.at_minus_one);
        let mut out = match &self.rule {
            Rule::Eventual { head, tail } if tail.degree() == 0 => {
                Self::from_values(head.iter().map(|v| f(*v)).collect(), f(tail.coeff(0)))
            }
            _ => {
                let a = self.clone();
                Self::from_fn(move |k| f(a.eval(k)))
            }
        };
        out.at_minus_one = at_minus_one;
        out
    }

    /// Pointwise agreement on `k = -1..=last` (structural when both carry metadata).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let last = match (&self.rule, &other.rule) {
            (Rule::Eventual { head: ha, tail: ta }, Rule::Eventual { head: hb, tail: tb }) => {
                let n = ta.coeffs().len().max(tb.coeffs().len());
                let tails = (0..n).all(|j| (ta.coeff(j) - tb.coeff(j)).norm() <= tol);
                if !tails {
                    return false;
                }
                ha.len().max(hb.len()) as i64 + 1
            }
            _ => 1000,
        };
        (-1..=last).all(|k| (self.eval(k) - other.eval(k)).norm() <= tol * (1.0 + self.eval(k).norm()))
    }

    /// Σ_{k>=0} seq(k), exact from metadata when eventually constant, otherwise
    /// partial sums until `tol`-Cauchy over a run of terms, within `budget`.
    pub fn series_sum(&self, tol: f64, budget: usize) -> Result<Complex64> {
        if let Rule::Eventual { head, tail } = &self.rule {
            if tail.is_zero() {
                return Ok(head.iter().sum());
            }
            return Err(Error::Divergent(format!("series of {self} has a nonzero tail")));
        }
        let mut sum = ZERO;
        let mut quiet = 0usize;
        for k in 0..budget {
            let t = self.eval(k as i64);
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::Divergent(format!("term {k} of {self} is not finite")));
            }
            sum += t;
            if t.norm() <= tol * sum.norm().max(f64::MIN_POSITIVE) {
                quiet += 1;
                if quiet >= 32 && k >= 64 {
                    return Ok(sum);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::Divergent(format!(
            "partial sums of {self} not Cauchy within a budget of {budget} terms"
        )))
    }
}

impl Default for CoefficientSequence {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(src) = &self.source {
            return write!(f, "{src}");
        }
        match &self.rule {
            Rule::Eventual { head, tail } => {
                write!(f, "[")?;
                for (i, v) in head.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "; tail")?;
                for (j, c) in tail.coeffs().iter().enumerate() {
                    write!(f, " {c}k^{j}")?;
                }
                write!(f, "]")
            }
            Rule::Expr(e) => write!(f, "{e}"),
            Rule::Derived(_) => write!(f, "<derived>"),
            Rule::Running(r) => match r.kind {
                RunningKind::Sum => write!(f, "cumsum({})", r.term),
                RunningKind::Product => write!(f, "cumprod({})", r.term),
            },
        }
    }
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoefficientSequence({self})")
    }
}
