//! Numerics for post-critically finite polynomials: the parameter of the
//! exceptional family, the orbifold Euler characteristic, and the
//! level-transitivity of generator products.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::engine::{Letter, Word};
use crate::error::{Error, Result};
use crate::group::Group;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexParameter {
    pub re: f64,
    pub im: f64,
    pub branch: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterResiduals {
    /// `|f(a/d) − a/d|`
    pub fixed_point: f64,
    /// `|f′(a)|`
    pub critical_a: f64,
    /// `|f′(a/d)|`
    pub critical_a_over_d: f64,
    /// `|f(0)|`
    pub zero: f64,
}

impl ParameterResiduals {
    pub fn max(&self) -> f64 {
        self.fixed_point
            .max(self.critical_a)
            .max(self.critical_a_over_d)
            .max(self.zero)
    }
}

impl ComplexParameter {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `f(z) = z (z − a)^{d−1}`.
    pub fn f(&self, z: Complex64) -> Complex64 {
        z * (z - self.value()).powu(self.degree as u32 - 1)
    }

    /// `f′(z) = (z − a)^{d−2} (d z − a)`.
    pub fn f_prime(&self, z: Complex64) -> Complex64 {
        let a = self.value();
        (z - a).powu(self.degree as u32 - 2) * (z * self.degree as f64 - a)
    }

    pub fn residuals(&self) -> ParameterResiduals {
        let a = self.value();
        let c = a / self.degree as f64;
        ParameterResiduals {
            fixed_point: (self.f(c) - c).norm(),
            critical_a: self.f_prime(a).norm(),
            critical_a_over_d: self.f_prime(c).norm(),
            zero: self.f(Complex64::zero()).norm(),
        }
    }
}

/// `a = ζ d / (1 − d)` with `ζ = exp(2πi·branch/(d−1))`. The polynomial
/// `f(z) = z (z − a)^{d−1}` then has critical points `a` and `a/d`, fixes 0,
/// and `f(a/d) = a/d` because `(a (1 − d)/d)^{d−1} = ζ^{d−1} = 1`.
pub fn exceptional_parameter(d: usize, branch: usize) -> Result<ComplexParameter> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "exceptional family needs d >= 3, got {d}"
        )));
    }
    if branch >= d - 1 {
        return Err(Error::InvalidParameter(format!("branch must be below {}", d - 1)));
    }
    let zeta = Complex64::from_polar(1.0, 2.0 * PI * branch as f64 / (d - 1) as f64);
    let a = zeta * (d as f64 / (1.0 - d as f64));
    Ok(ComplexParameter {
        re: a.re,
        im: a.im,
        branch,
        degree: d,
    })
}

/// Local degree `ν` at a post-critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Nu {
    Finite(u64),
    Infinite,
}

/// `χ = 2 − Σ (1 − 1/ν)`, with `1/∞ = 0`. Always a finite rational.
pub fn hyperbolicity_chi(nu: &[Nu]) -> Result<BigRational> {
    let mut chi = BigRational::from_integer(BigInt::from(2));
    for v in nu {
        chi -= match *v {
            Nu::Infinite => BigRational::one(),
            Nu::Finite(0) => return Err(Error::InvalidParameter("nu must be at least 1".into())),
            Nu::Finite(k) => BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(k)),
        };
    }
    Ok(chi)
}

fn is_single_cycle(action: &[u32]) -> bool {
    let mut x = 0usize;
    for step in 1..=action.len() {
        x = action[x] as usize;
        if x == 0 {
            return step == action.len();
        }
    }
    false
}

fn product_transitive(group: &Group, order: &[usize], n: usize) -> Result<bool> {
    let engine = group.engine().ok_or(Error::NeedsGenerators)?;
    let word = Word::from_letters(order.iter().map(|&g| Letter::new(g, false)).collect());
    let p = engine.evaluate(&word, n);
    Ok(is_single_cycle(&p.level_action(n)?))
}

/// Whether `g_1 ⋯ g_ℓ` acts on level `n` as one `d^n`-cycle.
pub fn product_of_generators_transitive(group: &Group, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("level must be at least 1".into()));
    }
    let l = group
        .engine()
        .ok_or(Error::NeedsGenerators)?
        .presentation()
        .generator_count();
    product_transitive(group, &(0..l).collect::<Vec<_>>(), n)
}

/// Same check for every ordering of the generators.
pub fn product_of_generators_transitive_all_orders(group: &Group, n: usize) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidParameter("level must be at least 1".into()));
    }
    let l = group
        .engine()
        .ok_or(Error::NeedsGenerators)?
        .presentation()
        .generator_count();
    let mut order: Vec<usize> = (0..l).collect();
    // Heap's algorithm.
    let mut c = vec![0usize; l];
    if !product_transitive(group, &order, n)? {
        return Ok(false);
    }
    let mut i = 0;
    while i < l {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            if !product_transitive(group, &order, n)? {
                return Ok(false);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GroupPresentation;
    use crate::zoo::build_zoo_group;

    #[test]
    fn parameter_residuals() {
        for d in 3..=6 {
            let mut seen: Vec<Complex64> = Vec::new();
            for b in 0..d - 1 {
                let a = exceptional_parameter(d, b).unwrap();
                assert!(a.residuals().max() <= 1e-9, "d={d} b={b} {:?}", a.residuals());
                assert!(seen.iter().all(|s| (s - a.value()).norm() > 1e-6));
                seen.push(a.value());
            }
        }
        assert!(exceptional_parameter(2, 0).is_err());
        assert!(exceptional_parameter(4, 3).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let a = exceptional_parameter(5, 2).unwrap();
        let z = Complex64::new(0.3, -0.7);
        let h = 1e-6;
        let numeric = (a.f(z + h) - a.f(z - h)) / (2.0 * h);
        assert!((numeric - a.f_prime(z)).norm() < 1e-5);
    }

    #[test]
    fn chi_values() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(hyperbolicity_chi(&[]).unwrap(), r(2, 1));
        for d in 3..10u64 {
            let chi = hyperbolicity_chi(&[Nu::Finite(d - 1), Nu::Infinite, Nu::Infinite]).unwrap();
            assert_eq!(chi, -(r(1, 1) - r(1, d as i64 - 1)));
            assert!(chi < BigRational::zero());
        }
        assert_eq!(hyperbolicity_chi(&[Nu::Finite(2), Nu::Finite(2)]).unwrap(), r(1, 1));
        assert!(hyperbolicity_chi(&[Nu::Finite(0)]).is_err());
    }

    #[test]
    fn generator_products() {
        let e = build_zoo_group("exceptional:d=3").unwrap();
        for n in 1..=6 {
            assert!(product_of_generators_transitive_all_orders(&e.group, n).unwrap());
        }
        let c = build_zoo_group("chebyshev2").unwrap();
        for n in 1..=8 {
            assert!(product_of_generators_transitive(&c.group, n).unwrap());
        }
        let trivial = Group::from_presentation(GroupPresentation::parse("degree 2\ngen a = (a, 1) ()\n").unwrap());
        assert!(!product_of_generators_transitive(&trivial, 1).unwrap());
        let w = build_zoo_group("wreath:sym2").unwrap();
        assert!(matches!(
            product_of_generators_transitive(&w.group, 1),
            Err(Error::NeedsGenerators)
        ));
    }
}
