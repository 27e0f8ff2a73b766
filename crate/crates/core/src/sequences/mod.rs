//! Coefficient sequences on `k >= -1` with structural tail metadata, and the
//! expression grammar used to define them in configuration files.

mod expr;
mod limits;
mod poly;
mod seq;

pub use expr::{BinOp, Cmp, Expr, Expression, Func};
pub use limits::{limit_class, LimitClass, LimitReport};
pub use poly::Poly;
pub use seq::{CoefficientSequence, StructuralClass};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Serialized form: an expression string, or an explicit head/tail record.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SeqRepr {
    Text(String),
    Record(SeqRecord),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeqRecord {
    #[serde(default)]
    head: Vec<Complex64>,
    /// Tail polynomial coefficients in increasing degree.
    #[serde(default)]
    tail: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    minus_one: Complex64,
}

fn is_zero(c: &Complex64) -> bool {
    *c == Complex64::new(0.0, 0.0)
}

impl Serialize for CoefficientSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let at_minus_one = self.eval(-1);
        if let (Some(src), true) = (self.source(), is_zero(&at_minus_one)) {
            return SeqRepr::Text(src.to_string()).serialize(serializer);
        }
        match (self.head(), self.tail()) {
            (Some(head), Some(tail)) => SeqRepr::Record(SeqRecord {
                head: head.to_vec(),
                tail: tail.coeffs().to_vec(),
                minus_one: at_minus_one,
            })
            .serialize(serializer),
            _ => match self.symbolic() {
                Some(e) if is_zero(&at_minus_one) => SeqRepr::Text(e.to_string()).serialize(serializer),
                _ => Err(serde::ser::Error::custom(format!(
                "sequence {self} has neither source text nor finite metadata"
                ))),
            },
        }
    }
}

impl<'de> Deserialize<'de> for CoefficientSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match SeqRepr::deserialize(deserializer)? {
            SeqRepr::Text(text) => CoefficientSequence::parse(&text).map_err(serde::de::Error::custom),
            SeqRepr::Record(r) => {
                Ok(CoefficientSequence::eventually(r.head, Poly::new(r.tail)).with_minus_one(r.minus_one))
            }
        }
    }
}
