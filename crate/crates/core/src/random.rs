//! Seeded generators of random test data.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::AlgebraElement;
use crate::sequences::CoefficientSequence;

/// Deterministic generator used by property suites and the CLI `--seed` flag.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Eventually constant sequence with domain constant at most `max_k0`.
pub fn eventually_constant(rng: &mut impl Rng, max_k0: usize) -> CoefficientSequence {
    let k0 = rng.gen_range(0..=max_k0);
    let head = (0..k0).map(|_| complex(rng)).collect();
    CoefficientSequence::from_values(head, complex(rng))
}

/// Random element of the polynomial algebra: every mode in `-band..=band` is
/// present with probability one half (at least one mode is always present).
pub fn element(rng: &mut impl Rng, band: usize, max_k0: usize) -> AlgebraElement {
    let band = band as i64;
    let mut out = AlgebraElement::zero();
    while out.is_zero() {
        for n in -band..=band {
            if rng.gen_bool(0.5) {
                out = out.add(&AlgebraElement::mode(n, eventually_constant(rng, max_k0)));
            }
        }
    }
    out
}
