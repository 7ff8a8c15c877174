//! Conditional fixation of the fixed-point process and independence of
//! cylinder events under sections.

use hashbrown::HashSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::sampling::sample_map;
use super::{count_matching, rational_text, to_f64, Evaluation};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::portrait::{fixed_counts_by_level, Portrait, Vertex};
use crate::quotient::{enumerate_quotient, LevelQuotient, DEFAULT_ELEMENT_LIMIT};

/// Width of the Wilson interval in standard deviations.
pub const WILSON_Z: f64 = 3.0;

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalMethod {
    Exact,
    MonteCarlo,
}

/// Estimate of `μ(X_{n+m} = r | X_n = r)` next to the bound `1 − 1/|π_m|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub method: ConditionalMethod,
    #[serde(with = "rational_text::option")]
    pub exact: Option<BigRational>,
    pub estimate: f64,
    /// Binomial standard error of the ratio (0 when exact).
    pub std_error: f64,
    /// Wilson interval at [`WILSON_Z`] (degenerate when exact).
    pub interval: (f64, f64),
    /// Elements (or samples) with `X_n = r`.
    pub conditioning: u64,
    /// Of those, the ones with `X_{n+m} = r` as well.
    pub joint: u64,
    pub population: u64,
    pub quotient_order_m: u64,
    #[serde(with = "rational_text")]
    pub bound: BigRational,
    /// Exact value at most the bound, or estimate at most bound + 3σ.
    pub within_bound: bool,
}

pub fn conditional_fixation(
    group: &Group,
    n: usize,
    m: usize,
    r: usize,
    eval: Evaluation,
) -> Result<ConditionalReport> {
    let limit = eval.element_limit().unwrap_or(DEFAULT_ELEMENT_LIMIT);
    let order_m = enumerate_quotient(group, m, limit)?.order() as u64;
    let bound = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(order_m));
    let d = group.degree();
    let depth = n + m;
    let classify = |labels: &[u16]| {
        let c = fixed_counts_by_level(d, depth, labels);
        (c[n] == r, c[n] == r && c[depth] == r)
    };

    let mut exact_q = None;
    if let Some(l) = eval.element_limit() {
        match enumerate_quotient(group, depth, l) {
            Ok(q) => exact_q = Some(q),
            Err(e @ Error::LimitExceeded { .. }) if eval.mc().is_none() => return Err(e),
            Err(Error::LimitExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let (method, cond, joint, population) = match &exact_q {
        Some(q) => {
            let cond = count_matching(q, |l| classify(l).0) as u64;
            let joint = count_matching(q, |l| classify(l).1) as u64;
            (ConditionalMethod::Exact, cond, joint, q.order() as u64)
        }
        None => {
            let params = eval
                .mc()
                .ok_or_else(|| Error::InvalidParameter("Monte Carlo needs an explicit seed".into()))?;
            let flags = sample_map(group, depth, params, classify);
            let cond = flags.iter().filter(|f| f.0).count() as u64;
            let joint = flags.iter().filter(|f| f.1).count() as u64;
            (ConditionalMethod::MonteCarlo, cond, joint, params.samples as u64)
        }
    };
    if cond == 0 {
        return Err(Error::EmptyCondition);
    }
    let p = joint as f64 / cond as f64;
    let report = match method {
        ConditionalMethod::Exact => {
            let v = BigRational::new(joint.into(), cond.into());
            ConditionalReport {
                n,
                m,
                r,
                method,
                estimate: to_f64(&v),
                std_error: 0.0,
                interval: (to_f64(&v), to_f64(&v)),
                within_bound: v <= bound,
                exact: Some(v),
                conditioning: cond,
                joint,
                population,
                quotient_order_m: order_m,
                bound,
            }
        }
        ConditionalMethod::MonteCarlo => {
            let se = (p * (1.0 - p) / cond as f64).sqrt();
            ConditionalReport {
                n,
                m,
                r,
                method,
                exact: None,
                estimate: p,
                std_error: se,
                interval: wilson_interval(joint, cond, WILSON_Z),
                conditioning: cond,
                joint,
                population,
                quotient_order_m: order_m,
                within_bound: p <= to_f64(&bound) + 3.0 * se,
                bound,
            }
        }
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub m: usize,
    pub vertex: Vertex,
    #[serde(with = "rational_text")]
    pub lhs: BigRational,
    #[serde(with = "rational_text")]
    pub rhs: BigRational,
    pub equal: bool,
}

fn pattern_set(q: &LevelQuotient, level: usize, patterns: &[Portrait], what: &str) -> Result<HashSet<Vec<u8>>> {
    let width = q.degree().internal_vertices(level) * q.degree().label_width();
    let present: HashSet<&[u8]> = (0..q.order()).map(|i| &q.body(i)[..width]).collect();
    let mut out = HashSet::new();
    for p in patterns {
        if p.degree() != q.degree() || p.depth() != level {
            return Err(Error::InvalidParameter(format!(
                "{what} patterns must be depth-{level} portraits"
            )));
        }
        let body = p.body();
        if !present.contains(body.as_slice()) {
            return Err(Error::InvalidParameter(format!(
                "{what} pattern is not in the level-{level} quotient"
            )));
        }
        out.insert(body);
    }
    Ok(out)
}

/// Compares `μ(C_A ∩ φ_v^{-1}(C_B))` with `μ(C_A) μ(C_B)` exactly over
/// `π_{n+m}(G)`: `A` constrains the depth-`n` truncation, `B` the depth-`m`
/// section at the level-`n` vertex `v`.
pub fn cylinder_independence_check(
    group: &Group,
    n: usize,
    m: usize,
    v: &Vertex,
    a: &[Portrait],
    b: &[Portrait],
    element_limit: usize,
) -> Result<IndependenceReport> {
    v.check(group.degree())?;
    if v.depth() != n {
        return Err(Error::InvalidParameter(format!("vertex must lie on level {n}")));
    }
    let q = enumerate_quotient(group, n + m, element_limit)?;
    cylinder_independence_on(&q, n, m, v, a, b)
}

pub(crate) fn cylinder_independence_on(
    q: &LevelQuotient,
    n: usize,
    m: usize,
    v: &Vertex,
    a: &[Portrait],
    b: &[Portrait],
) -> Result<IndependenceReport> {
    let d = q.degree();
    let a_set = pattern_set(q, n, a, "A")?;
    // B lives in π_m, which is the depth-m truncation of π_{n+m}.
    let b_set = pattern_set(q, m, b, "B")?;
    let width_n = d.internal_vertices(n) * d.label_width();
    let hits = (0..q.order())
        .filter(|&i| {
            a_set.contains(&q.body(i)[..width_n]) && {
                let s = q.element(i).section(v).expect("vertex checked");
                b_set.contains(&s.body())
            }
        })
        .count();
    let lhs = BigRational::new(hits.into(), q.order().into());
    let rhs = BigRational::new(a_set.len().into(), q.truncation_order(n).into())
        * BigRational::new(b_set.len().into(), q.truncation_order(m).into());
    Ok(IndependenceReport {
        n,
        m,
        vertex: v.clone(),
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}
