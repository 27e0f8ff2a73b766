//! Textual coefficient expressions in the index variable `k`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | number 'i' | 'i' | 'k' | '(' expr ')'
//!         | ('sqrt' | 'log' | 'exp') '(' expr ')'
//!         | 'min' '(' expr ',' expr ')'
//!         | 'ind' '(' expr ('==' | '>=') expr ')'
//! ```
//!
//! `min` and `>=` compare real parts. `^` is right-associative.

use std::fmt;

use num_complex::Complex64;

use super::poly::Poly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Log,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Lit(Complex64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Ind(Cmp, Box<Expr>, Box<Expr>),
}

/// A parsed expression. Equality is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse {
                pos: p.tokens[p.pos].1,
                msg: "unexpected trailing input".into(),
            });
        }
        Ok(Expression { root })
    }

    pub fn from_ast(root: Expr) -> Self {
        Expression { root }
    }

    pub fn ast(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        eval(&self.root, k)
    }

    /// Exact eventual-polynomial structure, if the expression has one:
    /// `(k0, p)` such that the expression equals `p(k)` for every integer
    /// `k >= k0`.
    pub fn eventual_polynomial(&self) -> Option<(i64, Poly)> {
        shape(&self.root)
    }

    pub fn literal(c: Complex64) -> Self {
        Expression { root: Expr::Lit(c) }
    }

    pub fn binary(op: BinOp, a: &Expression, b: &Expression) -> Self {
        Expression {
            root: Expr::Bin(op, Box::new(a.root.clone()), Box::new(b.root.clone())),
        }
    }

    /// The expression `k ↦ e(k + p)`.
    pub fn shifted(&self, p: i64) -> Self {
        let by = Expr::Lit(Complex64::new(p as f64, 0.0));
        let arg = Expr::Bin(BinOp::Add, Box::new(Expr::Var), Box::new(by));
        Expression {
            root: map_tree(&self.root, &|e| match e {
                Expr::Var => Some(arg.clone()),
                _ => None,
            }),
        }
    }

    /// Conjugates every literal. This is the pointwise conjugate wherever no
    /// function argument crosses the negative real axis.
    pub fn conj(&self) -> Self {
        Expression {
            root: map_tree(&self.root, &|e| match e {
                Expr::Lit(c) => Some(Expr::Lit(c.conj())),
                _ => None,
            }),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.root)
    }
}

impl std::str::FromStr for Expression {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expression::parse(s)
    }
}

/// Rebuilds a tree, replacing every node for which `f` returns a value.
fn map_tree(e: &Expr, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
    if let Some(r) = f(e) {
        return r;
    }
    let m = |x: &Expr| Box::new(map_tree(x, f));
    match e {
        Expr::Var | Expr::Lit(_) => e.clone(),
        Expr::Neg(a) => Expr::Neg(m(a)),
        Expr::Bin(op, a, b) => Expr::Bin(*op, m(a), m(b)),
        Expr::Call(func, a) => Expr::Call(*func, m(a)),
        Expr::Min(a, b) => Expr::Min(m(a), m(b)),
        Expr::Ind(cmp, a, b) => Expr::Ind(*cmp, m(a), m(b)),
    }
}

fn eval(e: &Expr, k: f64) -> Complex64 {
    match e {
        Expr::Var => Complex64::new(k, 0.0),
        Expr::Lit(c) => *c,
        Expr::Neg(a) => -eval(a, k),
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval(a, k), eval(b, k));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => pow(x, y),
            }
        }
        Expr::Call(func, a) => {
            let x = eval(a, k);
            let real = x.im == 0.0;
            match func {
                Func::Sqrt if real && x.re >= 0.0 => Complex64::new(x.re.sqrt(), 0.0),
                Func::Sqrt => x.sqrt(),
                Func::Log if real && x.re > 0.0 => Complex64::new(x.re.ln(), 0.0),
                Func::Log => x.ln(),
                Func::Exp if real => Complex64::new(x.re.exp(), 0.0),
                Func::Exp => x.exp(),
            }
        }
        Expr::Min(a, b) => {
            let (x, y) = (eval(a, k), eval(b, k));
            if y.re < x.re {
                y
            } else {
                x
            }
        }
        Expr::Ind(cmp, a, b) => {
            let (x, y) = (eval(a, k), eval(b, k));
            let hit = match cmp {
                Cmp::Eq => x == y,
                Cmp::Ge => x.re >= y.re,
            };
            Complex64::new(if hit { 1.0 } else { 0.0 }, 0.0)
        }
    }
}

fn pow(x: Complex64, y: Complex64) -> Complex64 {
    if y.im == 0.0 {
        if y.re.fract() == 0.0 && y.re.abs() <= i32::MAX as f64 {
            return x.powi(y.re as i32);
        }
        if x.im == 0.0 && x.re > 0.0 {
            return Complex64::new(x.re.powf(y.re), 0.0);
        }
    }
    if x == Complex64::new(0.0, 0.0) {
        return x;
    }
    x.powc(y)
}

fn constant(c: Complex64) -> Option<(i64, Poly)> {
    Some((0, Poly::constant(c)))
}

fn shape(e: &Expr) -> Option<(i64, Poly)> {
    match e {
        Expr::Var => Some((0, Poly::affine(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)))),
        Expr::Lit(c) => constant(*c),
        Expr::Neg(a) => shape(a).map(|(k0, p)| (k0, p.scale(Complex64::new(-1.0, 0.0)))),
        Expr::Bin(op, a, b) => {
            let (ka, pa) = shape(a)?;
            let (kb, pb) = shape(b)?;
            let k0 = ka.max(kb);
            match op {
                BinOp::Add => Some((k0, pa.add(&pb))),
                BinOp::Sub => Some((k0, pa.sub(&pb))),
                BinOp::Mul => Some((k0, pa.mul(&pb))),
                BinOp::Div => {
                    if pb.degree() == 0 && !pb.is_zero() {
                        Some((k0, pa.scale(pb.coeff(0).inv())))
                    } else {
                        None
                    }
                }
                BinOp::Pow => {
                    if pb.degree() != 0 {
                        return None;
                    }
                    let y = pb.coeff(0);
                    if pa.degree() == 0 {
                        return Some((k0, Poly::constant(pow(pa.coeff(0), y))));
                    }
                    if y.im == 0.0 && y.re.fract() == 0.0 && (0.0..=16.0).contains(&y.re) {
                        Some((k0, pa.pow(y.re as u32)))
                    } else {
                        None
                    }
                }
            }
        }
        Expr::Call(func, a) => {
            let (k0, p) = shape(a)?;
            if p.degree() != 0 {
                return None;
            }
            let v = eval(&Expr::Call(*func, Box::new(Expr::Lit(p.coeff(0)))), 0.0);
            Some((k0, Poly::constant(v)))
        }
        Expr::Min(a, b) => {
            let (ka, pa) = shape(a)?;
            let (kb, pb) = shape(b)?;
            let diff = Poly::new(pa.sub(&pb).coeffs().iter().map(|c| Complex64::new(c.re, 0.0)).collect());
            let k0 = ka.max(kb).max(diff.root_free_from());
            // eval returns `a` on ties, so `a` wins unless Re(b) is eventually smaller.
            if diff.is_zero() || diff.leading().re < 0.0 {
                Some((k0, pa))
            } else {
                Some((k0, pb))
            }
        }
        Expr::Ind(cmp, a, b) => {
            let (ka, pa) = shape(a)?;
            let (kb, pb) = shape(b)?;
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            match cmp {
                Cmp::Eq => {
                    let diff = pa.sub(&pb);
                    let k0 = ka.max(kb).max(diff.root_free_from());
                    Some((k0, Poly::constant(if diff.is_zero() { one } else { zero })))
                }
                Cmp::Ge => {
                    let diff = Poly::new(pa.sub(&pb).coeffs().iter().map(|c| Complex64::new(c.re, 0.0)).collect());
                    let k0 = ka.max(kb).max(diff.root_free_from());
                    let hit = diff.is_zero() || diff.leading().re > 0.0;
                    Some((k0, Poly::constant(if hit { one } else { zero })))
                }
            }
        }
    }
}

fn write_lit(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    match (c.re, c.im) {
        (re, im) if im == 0.0 => {
            if re < 0.0 || (re == 0.0 && re.is_sign_negative()) {
                write!(f, "(-{:?})", -re)
            } else {
                write!(f, "{:?}", re)
            }
        }
        (re, im) if re == 0.0 => {
            if im < 0.0 {
                write!(f, "(-{:?}i)", -im)
            } else {
                write!(f, "{:?}i", im)
            }
        }
        (re, im) => {
            let sign = if im < 0.0 { '-' } else { '+' };
            if re < 0.0 {
                write!(f, "((-{:?}){}{:?}i)", -re, sign, im.abs())
            } else {
                write!(f, "({:?}{}{:?}i)", re, sign, im.abs())
            }
        }
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var => write!(f, "k"),
        Expr::Lit(c) => write_lit(f, *c),
        Expr::Neg(a) => {
            write!(f, "(-")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Expr::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            };
            write!(f, "(")?;
            write_expr(f, a)?;
            write!(f, " {sym} ")?;
            write_expr(f, b)?;
            write!(f, ")")
        }
        Expr::Call(func, a) => {
            let name = match func {
                Func::Sqrt => "sqrt",
                Func::Log => "log",
                Func::Exp => "exp",
            };
            write!(f, "{name}(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Expr::Min(a, b) => {
            write!(f, "min(")?;
            write_expr(f, a)?;
            write!(f, ", ")?;
            write_expr(f, b)?;
            write!(f, ")")
        }
        Expr::Ind(cmp, a, b) => {
            write!(f, "ind(")?;
            write_expr(f, a)?;
            write!(f, "{}", if *cmp == Cmp::Eq { "==" } else { ">=" })?;
            write_expr(f, b)?;
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    EqEq,
    GtEq,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        let start = i;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when followed by digits, so `2e` is rejected rather than misread
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            let imaginary = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric());
            if imaginary {
                i += 1;
                out.push((Tok::Imag(value), start));
            } else {
                out.push((Tok::Num(value), start));
            }
            continue;
        }
        if ch.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let two = text.get(i..i + 2);
        let tok = match (ch, two) {
            (_, Some("==")) => {
                i += 1;
                Tok::EqEq
            }
            (_, Some(">=")) => {
                i += 1;
                Tok::GtEq
            }
            ('+', _) => Tok::Plus,
            ('-', _) => Tok::Minus,
            ('*', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('^', _) => Tok::Caret,
            ('(', _) => Tok::LParen,
            (')', _) => Tok::RParen,
            (',', _) => Tok::Comma,
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        };
        i += 1;
        out.push((tok, start));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .or_else(|| self.tokens.last().map(|(_, p)| p + 1))
            .unwrap_or(0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Lit(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Lit(Complex64::new(0.0, v))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "k" => Ok(Expr::Var),
                "i" => Ok(Expr::Lit(Complex64::new(0.0, 1.0))),
                "sqrt" | "log" | "exp" => {
                    let func = match name.as_str() {
                        "sqrt" => Func::Sqrt,
                        "log" => Func::Log,
                        _ => Func::Exp,
                    };
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                "min" => {
                    self.expect(Tok::LParen, "`(` after min")?;
                    let a = self.expr()?;
                    self.expect(Tok::Comma, "`,` in min")?;
                    let b = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Min(Box::new(a), Box::new(b)))
                }
                "ind" => {
                    self.expect(Tok::LParen, "`(` after ind")?;
                    let a = self.expr()?;
                    let cmp = match self.peek() {
                        Some(Tok::EqEq) => Cmp::Eq,
                        Some(Tok::GtEq) => Cmp::Ge,
                        _ => return self.err("expected `==` or `>=` in ind"),
                    };
                    self.pos += 1;
                    let b = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Ind(cmp, Box::new(a), Box::new(b)))
                }
                other => {
                    self.pos -= 1;
                    self.err(format!("unknown identifier `{other}`"))
                }
            },
            _ => {
                self.pos -= 1;
                self.err("expected a number, `k`, `(` or a function")
            }
        }
    }
}
