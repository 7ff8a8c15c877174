//! Finite permutation groups, finite-type groups defined by allowed labels,
//! and [`Group`], the common input of the quotient and FPP layers.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::engine::{Engine, GroupPresentation};
use crate::error::{Error, Result};
use crate::perm::{Degree, Perm};
use crate::portrait::Portrait;

/// A subgroup of `Sym(d)` given by generators, with its element list (ranks,
/// sorted) precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGroup {
    degree: Degree,
    generators: Vec<Perm>,
    elements: Vec<u16>,
}

impl PermGroup {
    pub fn new(degree: Degree, generators: Vec<Perm>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch {
                left: degree.get(),
                right: g.degree().get(),
            });
        }
        let t = degree.table();
        let mut seen = vec![false; t.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0u16]);
        let mut elements = vec![0u16];
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = t.mul(g.rank(), x);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    elements.push(y);
                    queue.push_back(y);
                }
            }
        }
        elements.sort_unstable();
        Ok(PermGroup {
            degree,
            generators,
            elements,
        })
    }

    pub fn symmetric(degree: Degree) -> Self {
        let d = degree.get();
        let mut gens = vec![Perm::from_cycles(degree, &[vec![1, 2]]).unwrap()];
        if d > 2 {
            gens.push(Perm::from_cycles(degree, &[(1..=d).collect()]).unwrap());
        }
        PermGroup::new(degree, gens).unwrap()
    }

    /// `Alt(d)`, generated by the 3-cycles `(1 2 k)`.
    pub fn alternating(degree: Degree) -> Self {
        let gens = (3..=degree.get())
            .map(|k| Perm::from_cycles(degree, &[vec![1, 2, k]]).unwrap())
            .collect();
        PermGroup::new(degree, gens).unwrap()
    }

    pub fn cyclic(degree: Degree) -> Self {
        let gens = vec![Perm::from_cycles(degree, &[(1..=degree.get()).collect()]).unwrap()];
        PermGroup::new(degree, gens).unwrap()
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    /// Sorted ranks of all elements.
    pub fn elements(&self) -> &[u16] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, rank: u16) -> bool {
        self.elements.binary_search(&rank).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.elements.iter().all(|&r| other.contains(r))
    }

    pub fn is_normal_in(&self, other: &PermGroup) -> bool {
        let t = self.degree.table();
        self.is_subgroup_of(other)
            && other.generators.iter().all(|g| {
                let (r, ri) = (g.rank(), t.inverse(g.rank()));
                self.elements.iter().all(|&q| self.contains(t.mul(t.mul(r, q), ri)))
            })
    }

    pub fn is_transitive(&self) -> bool {
        let t = self.degree.table();
        let d = self.degree.get();
        let mut seen = vec![false; d];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for g in &self.generators {
                let y = t.image(g.rank(), x);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Left cosets `cQ` of `self = Q` in `parent`, each sorted; the list is
    /// ordered by least element.
    pub fn cosets_in(&self, parent: &PermGroup) -> Vec<Vec<u16>> {
        let t = self.degree.table();
        let mut assigned = vec![false; t.len()];
        let mut out = Vec::new();
        for &c in parent.elements() {
            if assigned[c as usize] {
                continue;
            }
            let mut coset: Vec<u16> = self.elements.iter().map(|&q| t.mul(c, q)).collect();
            coset.sort_unstable();
            for &x in &coset {
                assigned[x as usize] = true;
            }
            out.push(coset);
        }
        out
    }
}

impl fmt::Display for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str(">")
    }
}

/// A closed subgroup of `Aut(T)` cut out by conditions on labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiniteTypeSpec {
    /// Every label lies in `P`.
    IteratedWreath { p: PermGroup },
    /// All labels lie in one common coset `cQ` of `Q ⊴ P`.
    CosetType { q: PermGroup, p: PermGroup },
}

impl FiniteTypeSpec {
    pub fn iterated_wreath(p: PermGroup) -> Self {
        FiniteTypeSpec::IteratedWreath { p }
    }

    pub fn coset_type(q: PermGroup, p: PermGroup) -> Result<Self> {
        if q.degree() != p.degree() {
            return Err(Error::DegreeMismatch {
                left: q.degree().get(),
                right: p.degree().get(),
            });
        }
        if q.order() == 1 {
            return Err(Error::InvalidParameter("coset type needs a nontrivial Q".into()));
        }
        if !q.is_normal_in(&p) {
            return Err(Error::InvalidParameter(format!("{q} is not a normal subgroup of {p}")));
        }
        Ok(FiniteTypeSpec::CosetType { q, p })
    }

    pub fn degree(&self) -> Degree {
        match self {
            FiniteTypeSpec::IteratedWreath { p } => p.degree(),
            FiniteTypeSpec::CosetType { p, .. } => p.degree(),
        }
    }

    /// Allowed label sets; every element uses labels from exactly one of them.
    pub fn label_classes(&self) -> Vec<Vec<u16>> {
        match self {
            FiniteTypeSpec::IteratedWreath { p } => vec![p.elements().to_vec()],
            FiniteTypeSpec::CosetType { q, p } => q.cosets_in(p),
        }
    }

    /// Generators of the depth-`n` quotient: single-vertex labels from the
    /// label-changing subgroup, plus (coset type) constant labelings by the
    /// generators of `P`.
    pub fn level_generators(&self, n: usize) -> Vec<Portrait> {
        let d = self.degree();
        let internal = d.internal_vertices(n);
        let local = match self {
            FiniteTypeSpec::IteratedWreath { p } => p.generators(),
            FiniteTypeSpec::CosetType { q, .. } => q.generators(),
        };
        let mut out = Vec::new();
        for v in 0..internal {
            for g in local {
                let mut labels = vec![0u16; internal];
                labels[v] = g.rank();
                out.push(Portrait::from_ranks(d, n, labels));
            }
        }
        if let FiniteTypeSpec::CosetType { p, .. } = self {
            for g in p.generators() {
                out.push(Portrait::from_ranks(d, n, vec![g.rank(); internal]));
            }
        }
        out.retain(|p| !p.is_identity());
        out
    }

    pub fn describe(&self) -> String {
        match self {
            FiniteTypeSpec::IteratedWreath { p } => format!("iterated wreath product over {p}"),
            FiniteTypeSpec::CosetType { q, p } => format!("coset type over {q} in {p}"),
        }
    }
}

/// A group given either by a self-similar presentation or as a finite-type
/// closed subgroup.
#[derive(Debug, Clone)]
pub enum Group {
    Presented(Arc<Engine>),
    FiniteType(FiniteTypeSpec),
}

impl Group {
    pub fn from_presentation(p: GroupPresentation) -> Self {
        Group::Presented(Arc::new(Engine::new(p)))
    }

    pub fn degree(&self) -> Degree {
        match self {
            Group::Presented(e) => e.presentation().degree(),
            Group::FiniteType(s) => s.degree(),
        }
    }

    pub fn engine(&self) -> Option<&Engine> {
        match self {
            Group::Presented(e) => Some(e),
            Group::FiniteType(_) => None,
        }
    }

    pub fn finite_type(&self) -> Option<&FiniteTypeSpec> {
        match self {
            Group::Presented(_) => None,
            Group::FiniteType(s) => Some(s),
        }
    }

    /// Portraits generating `π_n(G)`.
    pub fn level_generators(&self, n: usize) -> Vec<Portrait> {
        match self {
            Group::Presented(e) => e.generator_portraits(n).iter().map(|p| (**p).clone()).collect(),
            Group::FiniteType(s) => s.level_generators(n),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Group::Presented(e) => e.presentation().metadata.name.clone(),
            Group::FiniteType(s) => s.describe(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: usize) -> Degree {
        Degree::new(d).unwrap()
    }

    #[test]
    fn standard_groups_have_expected_orders() {
        assert_eq!(PermGroup::symmetric(deg(4)).order(), 24);
        assert_eq!(PermGroup::alternating(deg(4)).order(), 12);
        assert_eq!(PermGroup::alternating(deg(3)).order(), 3);
        assert_eq!(PermGroup::cyclic(deg(5)).order(), 5);
        assert_eq!(PermGroup::symmetric(deg(2)).order(), 2);
        assert!(PermGroup::cyclic(deg(5)).is_transitive());
    }

    #[test]
    fn normality() {
        let s3 = PermGroup::symmetric(deg(3));
        let a3 = PermGroup::alternating(deg(3));
        assert!(a3.is_normal_in(&s3));
        let t = PermGroup::new(deg(3), vec![Perm::parse_cycles(deg(3), "(1 2)").unwrap()]).unwrap();
        assert!(!t.is_normal_in(&s3));
        assert!(FiniteTypeSpec::coset_type(t, s3.clone()).is_err());
        let cosets = a3.cosets_in(&s3);
        assert_eq!(cosets.len(), 2);
        assert_eq!(cosets[0][0], 0);
    }

    #[test]
    fn coset_generators_preserve_the_coset_condition() {
        let spec = FiniteTypeSpec::coset_type(PermGroup::alternating(deg(3)), PermGroup::symmetric(deg(3))).unwrap();
        let classes = spec.label_classes();
        for g in spec.level_generators(2) {
            let class = classes.iter().position(|c| c.contains(&g.ranks()[0])).unwrap();
            assert!(g.ranks().iter().all(|r| classes[class].contains(r)));
        }
    }
}
