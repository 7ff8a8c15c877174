//! Level-by-level FPP of finite-type groups from fixed-point statistics of
//! the label classes.
//!
//! One step maps `p` to `(1/|C|) Σ_{τ∈C} [1 − (1−p)^{fix τ}]`. Values stay
//! exact until a denominator outgrows [`EXACT_BITS`]; from then on each
//! value is a rigorous dyadic enclosure `[lo, hi]` on a grid of
//! `2^-GRID_BITS`. The step map is increasing on `[0, 1]`, so rounding
//! `lo` down and `hi` up keeps the true value inside.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::rational_text;
use crate::group::FiniteTypeSpec;

/// Denominator size (bits) beyond which exact values give way to enclosures.
pub const EXACT_BITS: u64 = 4096;
/// Enclosure grid resolution in bits.
pub const GRID_BITS: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Exact {
        #[serde(with = "rational_text")]
        value: BigRational,
    },
    Enclosure {
        #[serde(with = "rational_text")]
        lo: BigRational,
        #[serde(with = "rational_text")]
        hi: BigRational,
    },
}

impl Bound {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Bound::Exact { value } => Some(value),
            Bound::Enclosure { .. } => None,
        }
    }

    pub fn lo(&self) -> &BigRational {
        match self {
            Bound::Exact { value } => value,
            Bound::Enclosure { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &BigRational {
        match self {
            Bound::Exact { value } => value,
            Bound::Enclosure { hi, .. } => hi,
        }
    }

    /// Midpoint as a float, for display.
    pub fn approx(&self) -> f64 {
        (super::to_f64(self.lo()) + super::to_f64(self.hi())) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionValue {
    pub level: usize,
    pub value: Bound,
    /// Per-coset values `q_n(c)` in the order of `label_classes`; a single
    /// entry for iterated wreath products.
    pub classes: Vec<Bound>,
}

/// `counts[f]` = number of labels in the class with exactly `f` fixed points.
fn fix_histogram(spec: &FiniteTypeSpec, class: &[u16]) -> Vec<u64> {
    let d = spec.degree();
    let t = d.table();
    let mut counts = vec![0u64; d.get() + 1];
    for &r in class {
        counts[t.fixed_points(r)] += 1;
    }
    counts
}

fn step(hist: &[u64], p: &BigRational) -> BigRational {
    let total: u64 = hist.iter().sum();
    let miss = BigRational::one() - p;
    let mut acc = BigRational::zero();
    let mut power = BigRational::one();
    for &c in hist {
        // power = (1-p)^f
        if c != 0 {
            acc += (BigRational::one() - &power) * BigInt::from(c);
        }
        power *= &miss;
    }
    acc / BigInt::from(total)
}

fn grid(v: &BigRational, round_up: bool) -> BigRational {
    let scale = BigInt::one() << GRID_BITS;
    let scaled = v.numer() * &scale;
    let (q, r) = scaled.div_rem(v.denom());
    let q = if round_up && !r.is_zero() { q + 1 } else { q };
    BigRational::new(q, scale)
}

fn advance(hist: &[u64], b: &Bound) -> Bound {
    match b {
        Bound::Exact { value } => {
            let next = step(hist, value);
            if next.denom().bits() > EXACT_BITS {
                Bound::Enclosure {
                    lo: grid(&next, false),
                    hi: grid(&next, true),
                }
            } else {
                Bound::Exact { value: next }
            }
        }
        Bound::Enclosure { lo, hi } => Bound::Enclosure {
            lo: grid(&step(hist, lo), false),
            hi: grid(&step(hist, hi), true),
        },
    }
}

fn average(bounds: &[Bound]) -> Bound {
    let k = BigInt::from(bounds.len());
    if bounds.iter().all(|b| b.exact().is_some()) {
        let s: BigRational = bounds.iter().map(|b| b.lo().clone()).sum();
        return Bound::Exact { value: s / k };
    }
    let lo: BigRational = bounds.iter().map(|b| b.lo().clone()).sum();
    let hi: BigRational = bounds.iter().map(|b| b.hi().clone()).sum();
    Bound::Enclosure {
        lo: lo / &k,
        hi: hi / k,
    }
}

/// `p_1 .. p_N` (with per-coset channels) for a finite-type group.
pub fn fpp_finite_type_recursion(spec: &FiniteTypeSpec, max_level: usize) -> Vec<RecursionValue> {
    let hists: Vec<Vec<u64>> = spec.label_classes().iter().map(|c| fix_histogram(spec, c)).collect();
    let mut current: Vec<Bound> = vec![
        Bound::Exact {
            value: BigRational::one()
        };
        hists.len()
    ];
    let mut out = Vec::with_capacity(max_level);
    for level in 1..=max_level {
        current = hists.iter().zip(&current).map(|(h, b)| advance(h, b)).collect();
        out.push(RecursionValue {
            level,
            value: average(&current),
            classes: current.clone(),
        });
    }
    debug_assert!(out.iter().all(|v| !v.value.lo().is_negative()));
    out
}
