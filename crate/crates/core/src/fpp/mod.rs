//! Fixed-point proportions.
//!
//! Everything here is computed on the finite quotients `π_n(G)`, so the
//! numbers are those of the closure of `G` in `Aut(T)`; the two groups have
//! the same fixed-point proportion.

mod probes;
mod recursion;
mod sampling;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::portrait::fixed_leaf_count;
use crate::quotient::{enumerate_quotient, LevelQuotient};

pub use probes::{
    conditional_fixation, cylinder_independence_check, wilson_interval, ConditionalMethod, ConditionalReport,
    IndependenceReport, WILSON_Z,
};
pub use recursion::{fpp_finite_type_recursion, Bound, RecursionValue, EXACT_BITS, GRID_BITS};
pub use sampling::{fpp_mc, sample_finite_type, sample_portraits, McEstimate, McParams};

/// Serializes a rational as `"num/den"` (or `"num"` when integral).
pub mod rational_text {
    use num_rational::BigRational;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub mod option {
        use num_rational::BigRational;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.to_string()),
                None => s.serialize_none(),
            }
        }
    }
}

pub(crate) fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// How a quantity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Full enumeration of the relevant quotient.
    Exact {
        element_limit: usize,
    },
    MonteCarlo(McParams),
    /// Enumeration when it fits under the limit, otherwise Monte Carlo if
    /// sampling parameters are given.
    Auto {
        element_limit: usize,
        mc: Option<McParams>,
    },
}

impl Evaluation {
    pub(crate) fn element_limit(&self) -> Option<usize> {
        match *self {
            Evaluation::Exact { element_limit } | Evaluation::Auto { element_limit, .. } => Some(element_limit),
            Evaluation::MonteCarlo(_) => None,
        }
    }

    pub(crate) fn mc(&self) -> Option<McParams> {
        match *self {
            Evaluation::MonteCarlo(p) => Some(p),
            Evaluation::Auto { mc, .. } => mc,
            Evaluation::Exact { .. } => None,
        }
    }
}

/// Proportion of elements of the quotient with a fixed leaf.
pub fn fpp_of_quotient(q: &LevelQuotient) -> BigRational {
    let hits = count_matching(q, |labels| fixed_leaf_count(q.degree(), q.level(), labels) > 0);
    BigRational::new(BigInt::from(hits), BigInt::from(q.order()))
}

/// Exact `FPP_n(G)` by enumerating `π_n(G)`.
pub fn fpp_exact(group: &Group, n: usize, element_limit: usize) -> Result<BigRational> {
    Ok(fpp_of_quotient(&enumerate_quotient(group, n, element_limit)?))
}

pub(crate) fn count_matching(q: &LevelQuotient, pred: impl Fn(&[u16]) -> bool + Sync) -> usize {
    (0..q.order())
        .into_par_iter()
        .fold(
            || (0usize, Vec::new()),
            |(n, mut buf), i| {
                q.ranks_into(i, &mut buf);
                (n + pred(&buf) as usize, buf)
            },
        )
        .map(|(n, _)| n)
        .sum()
}

/// Distribution of `X_n`, the number of fixed vertices on level `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct XnHistogram {
    pub level: usize,
    /// True for a population count over `π_n(G)`, false for samples.
    pub exact: bool,
    pub total: u64,
    pub counts: BTreeMap<usize, u64>,
}

impl XnHistogram {
    pub fn frequencies(&self) -> BTreeMap<usize, f64> {
        self.counts
            .iter()
            .map(|(&r, &c)| (r, c as f64 / self.total as f64))
            .collect()
    }

    pub fn exact_frequencies(&self) -> BTreeMap<usize, BigRational> {
        self.counts
            .iter()
            .map(|(&r, &c)| (r, BigRational::new(c.into(), self.total.into())))
            .collect()
    }

    fn from_values(level: usize, exact: bool, values: impl Iterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
            total += 1;
        }
        XnHistogram {
            level,
            exact,
            total,
            counts,
        }
    }
}

/// Histogram of `X_n` over a quotient.
pub fn xn_of_quotient(q: &LevelQuotient) -> XnHistogram {
    let values: Vec<usize> = (0..q.order())
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            q.ranks_into(i, buf);
            fixed_leaf_count(q.degree(), q.level(), buf)
        })
        .collect();
    XnHistogram::from_values(q.level(), true, values.into_iter())
}

pub fn xn_distribution(group: &Group, n: usize, eval: Evaluation) -> Result<XnHistogram> {
    if let Some(limit) = eval.element_limit() {
        match enumerate_quotient(group, n, limit) {
            Ok(q) => return Ok(xn_of_quotient(&q)),
            Err(e @ Error::LimitExceeded { .. }) if eval.mc().is_none() => return Err(e),
            Err(Error::LimitExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let params = eval
        .mc()
        .ok_or_else(|| Error::InvalidParameter("sampling needs a seed".into()))?;
    let d = group.degree();
    let samples = sample_portraits(group, n, params);
    Ok(XnHistogram::from_values(
        n,
        false,
        samples.iter().map(|p| fixed_leaf_count(d, n, p.ranks())),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FppMode {
    Exact,
    Mc,
    Recursion,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Recursion,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FppEntry {
    pub level: usize,
    pub provenance: Provenance,
    #[serde(with = "rational_text::option")]
    pub exact: Option<BigRational>,
    /// Rigorous bracket from the finite-type recursion once exact values get
    /// too large.
    pub enclosure: Option<Bound>,
    pub mc: Option<McEstimate>,
    pub quotient_order: Option<u64>,
}

impl FppEntry {
    /// Best point value: exact, enclosure midpoint or MC estimate.
    pub fn approx(&self) -> f64 {
        if let Some(v) = &self.exact {
            to_f64(v)
        } else if let Some(b) = &self.enclosure {
            b.approx()
        } else {
            self.mc.map_or(f64::NAN, |m| m.estimate)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FppSeries {
    pub group: String,
    pub mode: FppMode,
    pub entries: Vec<FppEntry>,
}

impl FppSeries {
    /// Exact values at consecutive levels never increase.
    pub fn exact_non_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| match (&w[0].exact, &w[1].exact) {
            (Some(a), Some(b)) => b <= a,
            _ => true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FppConfig {
    pub max_level: usize,
    pub mode: FppMode,
    pub element_limit: usize,
    pub mc: Option<McParams>,
}

impl FppConfig {
    pub fn new(max_level: usize, mode: FppMode) -> Self {
        FppConfig {
            max_level,
            mode,
            element_limit: crate::quotient::DEFAULT_ELEMENT_LIMIT,
            mc: None,
        }
    }
}

/// `fpp_report_with` using plain enumeration for quotients.
pub fn fpp_report(group: &Group, config: &FppConfig) -> Result<FppSeries> {
    fpp_report_with(group, config, &mut |n| {
        enumerate_quotient(group, n, config.element_limit)
    })
}

/// FPP series for levels `1..=max_level`. `quotients(n)` supplies `π_n(G)`
/// (possibly from a cache). Auto mode enumerates while it fits, then
/// continues with the recursion for finite-type groups or Monte Carlo.
pub fn fpp_report_with(
    group: &Group,
    config: &FppConfig,
    quotients: &mut dyn FnMut(usize) -> Result<LevelQuotient>,
) -> Result<FppSeries> {
    let mc_params = || {
        config
            .mc
            .ok_or_else(|| Error::InvalidParameter("Monte Carlo needs an explicit seed".into()))
    };
    let recursion = || -> Result<Vec<RecursionValue>> {
        let spec = group
            .finite_type()
            .ok_or_else(|| Error::InvalidParameter("recursion needs a finite-type group".into()))?;
        Ok(fpp_finite_type_recursion(spec, config.max_level))
    };
    let exact_entry = |q: &LevelQuotient| FppEntry {
        level: q.level(),
        provenance: Provenance::Exact,
        exact: Some(fpp_of_quotient(q)),
        enclosure: None,
        mc: None,
        quotient_order: Some(q.order() as u64),
    };
    let recursion_entry = |v: RecursionValue| FppEntry {
        level: v.level,
        provenance: Provenance::Recursion,
        exact: v.value.exact().cloned(),
        enclosure: v.value.exact().is_none().then_some(v.value),
        mc: None,
        quotient_order: None,
    };
    let mc_entry = |n: usize, p: McParams| -> Result<FppEntry> {
        Ok(FppEntry {
            level: n,
            provenance: Provenance::MonteCarlo,
            exact: None,
            enclosure: None,
            mc: Some(fpp_mc(group, n, p)?),
            quotient_order: None,
        })
    };

    let mut entries = Vec::with_capacity(config.max_level);
    match config.mode {
        FppMode::Exact => {
            for n in 1..=config.max_level {
                entries.push(exact_entry(&quotients(n)?));
            }
        }
        FppMode::Recursion => entries.extend(recursion()?.into_iter().map(recursion_entry)),
        FppMode::Mc => {
            let p = mc_params()?;
            for n in 1..=config.max_level {
                entries.push(mc_entry(n, p)?);
            }
        }
        FppMode::Auto => {
            let mut n = 1;
            while n <= config.max_level {
                match quotients(n) {
                    Ok(q) => entries.push(exact_entry(&q)),
                    Err(Error::LimitExceeded { .. }) => break,
                    Err(e) => return Err(e),
                }
                n += 1;
            }
            if n <= config.max_level {
                if group.finite_type().is_some() {
                    entries.extend(recursion()?.into_iter().skip(n - 1).map(recursion_entry));
                } else {
                    let p = mc_params()?;
                    for level in n..=config.max_level {
                        entries.push(mc_entry(level, p)?);
                    }
                }
            }
        }
    }
    Ok(FppSeries {
        group: group.name(),
        mode: config.mode,
        entries,
    })
}
