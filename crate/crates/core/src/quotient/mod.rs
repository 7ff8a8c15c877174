//! Finite quotients `π_n(G)`: enumeration, subgroup closure, stabilizers,
//! and the finite-level checks built on them.

mod cache;

pub use cache::{cache_key, CACHE_MAGIC};
mod checks;

use std::hash::BuildHasher;

use hashbrown::HashTable;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;

pub use checks::{
    check_fractality, check_fractality_with, check_martingale_condition, check_martingale_condition_with,
    is_level_transitive, CheckRoute, FractalProperty, FractalityOutcome, FractalityReport, MartingaleLevel,
    MartingaleReport, TransitivityReport, VertexVerdict,
};

use crate::engine::{Letter, Word};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::perm::Degree;
use crate::portrait::{compose_ranks, Portrait};

/// Default cap on `|π_n(G)|` during enumeration.
pub const DEFAULT_ELEMENT_LIMIT: usize = 5_000_000;

const NO_PARENT: u32 = u32::MAX;
/// Frontier elements expanded per parallel batch.
const BATCH: usize = 1 << 16;
const TASK: usize = 256;

/// `π_n(G)` as a sorted list of canonical bodies with a witness table:
/// element `i` equals `gen[i] · parent[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelQuotient {
    degree: Degree,
    level: usize,
    width: usize,
    bodies: Vec<u8>,
    parents: Vec<u32>,
    gens: Vec<u16>,
    /// Whether `gens` index presentation generators, so witness words exist.
    has_words: bool,
    source: String,
}

fn ranks_from_body(degree: Degree, body: &[u8], out: &mut Vec<u16>) {
    out.clear();
    if degree.label_width() == 1 {
        out.extend(body.iter().map(|&b| b as u16));
    } else {
        out.extend(body.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
    }
}

fn body_from_ranks(degree: Degree, ranks: &[u16], out: &mut Vec<u8>) {
    if degree.label_width() == 1 {
        out.extend(ranks.iter().map(|&r| r as u8));
    } else {
        for &r in ranks {
            out.extend_from_slice(&r.to_be_bytes());
        }
    }
}

/// Breadth-first closure of `generators` under left multiplication.
/// `has_words` marks generators as the presentation's, in order.
pub(crate) fn enumerate_from_generators(
    degree: Degree,
    level: usize,
    generators: &[Portrait],
    element_limit: usize,
    has_words: bool,
    source: &str,
) -> Result<LevelQuotient> {
    let labels = degree.internal_vertices(level);
    let width = labels * degree.label_width();
    let gen_ranks: Vec<&[u16]> = generators.iter().map(|g| g.ranks()).collect();
    let hasher = FxBuildHasher;
    if width == 0 {
        return Ok(LevelQuotient {
            degree,
            level,
            width,
            bodies: Vec::new(),
            parents: vec![NO_PARENT],
            gens: vec![0],
            has_words,
            source: source.to_string(),
        });
    }

    let mut bodies: Vec<u8> = vec![0; width];
    let mut parents = vec![NO_PARENT];
    let mut gens = vec![0u16];
    let mut table: HashTable<u32> = HashTable::new();
    table.insert_unique(hasher.hash_one(&bodies[..]), 0, |&i| {
        hasher.hash_one(&bodies[i as usize * width..(i as usize + 1) * width])
    });

    let mut start = 0usize;
    while start < parents.len() && !gen_ranks.is_empty() {
        let end = parents.len();
        let mut lo = start;
        while lo < end {
            let hi = (lo + BATCH).min(end);
            let arena = &bodies;
            let products: Vec<Vec<u8>> = (lo..hi)
                .step_by(TASK)
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|t0| {
                    let t1 = (t0 + TASK).min(hi);
                    let mut out = Vec::with_capacity((t1 - t0) * gen_ranks.len() * width);
                    let mut q = Vec::with_capacity(labels);
                    let mut prod = vec![0u16; labels];
                    let mut img = Vec::new();
                    for i in t0..t1 {
                        ranks_from_body(degree, &arena[i * width..(i + 1) * width], &mut q);
                        for g in &gen_ranks {
                            compose_ranks(degree, g, &q, &mut prod, &mut img);
                            body_from_ranks(degree, &prod, &mut out);
                        }
                    }
                    out
                })
                .collect();
            let mut parent = lo;
            for chunk in products {
                for per_elem in chunk.chunks_exact(gen_ranks.len() * width) {
                    for (g, body) in per_elem.chunks_exact(width).enumerate() {
                        let h = hasher.hash_one(body);
                        let found = table
                            .find(h, |&i| &bodies[i as usize * width..(i as usize + 1) * width] == body)
                            .is_some();
                        if !found {
                            let idx = parents.len() as u32;
                            bodies.extend_from_slice(body);
                            parents.push(parent as u32);
                            gens.push(g as u16);
                            table.insert_unique(h, idx, |&i| {
                                hasher.hash_one(&bodies[i as usize * width..(i as usize + 1) * width])
                            });
                            if parents.len() > element_limit {
                                return Err(Error::LimitExceeded {
                                    level,
                                    limit: element_limit,
                                    partial: parents.len(),
                                });
                            }
                        }
                    }
                    parent += 1;
                }
            }
            lo = hi;
        }
        start = end;
    }
    drop(table);

    let count = parents.len();
    let mut order: Vec<u32> = (0..count as u32).collect();
    order.par_sort_unstable_by(|&a, &b| {
        bodies[a as usize * width..(a as usize + 1) * width].cmp(&bodies[b as usize * width..(b as usize + 1) * width])
    });
    let mut position = vec![0u32; count];
    for (pos, &old) in order.iter().enumerate() {
        position[old as usize] = pos as u32;
    }
    let mut sorted = Vec::with_capacity(bodies.len());
    let mut sorted_parents = Vec::with_capacity(count);
    let mut sorted_gens = Vec::with_capacity(count);
    for &old in &order {
        let old = old as usize;
        sorted.extend_from_slice(&bodies[old * width..(old + 1) * width]);
        let p = parents[old];
        sorted_parents.push(if p == NO_PARENT {
            NO_PARENT
        } else {
            position[p as usize]
        });
        sorted_gens.push(gens[old]);
    }
    Ok(LevelQuotient {
        degree,
        level,
        width,
        bodies: sorted,
        parents: sorted_parents,
        gens: sorted_gens,
        has_words,
        source: source.to_string(),
    })
}

/// Enumerates `π_n(G)` by breadth-first search from the identity,
/// multiplying by generator portraits on the left.
pub fn enumerate_quotient(group: &Group, n: usize, element_limit: usize) -> Result<LevelQuotient> {
    if element_limit == 0 {
        return Err(Error::InvalidParameter("element_limit must be at least 1".into()));
    }
    let gens = group.level_generators(n);
    enumerate_from_generators(
        group.degree(),
        n,
        &gens,
        element_limit,
        matches!(group, Group::Presented(_)),
        &group.name(),
    )
}

impl LevelQuotient {
    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `|π_n(G)|`.
    pub fn order(&self) -> usize {
        self.parents.len()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Bytes per canonical body.
    pub fn body_width(&self) -> usize {
        self.width
    }

    pub fn body(&self, i: usize) -> &[u8] {
        &self.bodies[i * self.width..(i + 1) * self.width]
    }

    pub fn element(&self, i: usize) -> Portrait {
        Portrait::from_body(self.degree, self.level, self.body(i)).expect("stored bodies are valid")
    }

    pub(crate) fn ranks_into(&self, i: usize, out: &mut Vec<u16>) {
        ranks_from_body(self.degree, self.body(i), out);
    }

    pub fn iter(&self) -> impl Iterator<Item = Portrait> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }

    pub fn index_of_body(&self, body: &[u8]) -> Option<usize> {
        if body.len() != self.width {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.order());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.body(mid).cmp(body) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn index_of(&self, p: &Portrait) -> Option<usize> {
        if p.degree() != self.degree || p.depth() != self.level {
            return None;
        }
        self.index_of_body(&p.body())
    }

    pub fn contains(&self, p: &Portrait) -> bool {
        self.index_of(p).is_some()
    }

    /// A generator word for element `i`, when the quotient came from a
    /// presentation.
    pub fn witness_word(&self, i: usize) -> Option<Word> {
        if !self.has_words {
            return None;
        }
        let mut letters = Vec::new();
        let mut cur = i;
        while self.parents[cur] != NO_PARENT {
            letters.push(Letter::new(self.gens[cur] as usize, false));
            cur = self.parents[cur] as usize;
        }
        Some(Word::from_letters(letters))
    }

    pub fn has_witness_words(&self) -> bool {
        self.has_words
    }

    /// `|π_k(G)|` for `k ≤ n`, counted as distinct truncations.
    pub fn truncation_order(&self, k: usize) -> usize {
        let w = self.degree.internal_vertices(k.min(self.level)) * self.degree.label_width();
        if self.order() == 0 {
            return 0;
        }
        1 + (1..self.order())
            .filter(|&i| self.body(i)[..w] != self.body(i - 1)[..w])
            .count()
    }

    /// Smallest subset containing the identity and `seeds`, closed under
    /// composition, as sorted indices.
    pub fn subgroup_closure(&self, seeds: &[Portrait]) -> Result<Vec<usize>> {
        for s in seeds {
            if !self.contains(s) {
                return Err(Error::NotInQuotient);
            }
        }
        let closure = enumerate_from_generators(self.degree, self.level, seeds, self.order(), false, "")?;
        let mut out: Vec<usize> = (0..closure.order())
            .map(|i| {
                self.index_of_body(closure.body(i))
                    .expect("closure stays inside the quotient")
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Indices of elements whose depth-`k` truncation is trivial.
    pub fn level_stabilizer(&self, k: usize) -> Vec<usize> {
        let w = self.degree.internal_vertices(k.min(self.level)) * self.degree.label_width();
        (0..self.order())
            .filter(|&i| self.body(i)[..w].iter().all(|&b| b == 0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GroupPresentation;
    use crate::group::{FiniteTypeSpec, PermGroup};
    use crate::perm::Perm;

    const GRIGORCHUK: &str =
        "degree 2\ngen a = (1, 1) (1 2)\ngen b = (a, c) ()\ngen c = (a, d) ()\ngen d = (1, b) ()\n";
    const EXC3: &str = "degree 3\ngen g0 = (g0, 1, 1) (2 3)\ngen g1 = (g1, 1, 1) (1 2)\n";

    fn presented(text: &str) -> Group {
        Group::from_presentation(GroupPresentation::parse(text).unwrap())
    }

    fn wreath2() -> Group {
        Group::FiniteType(FiniteTypeSpec::iterated_wreath(PermGroup::symmetric(
            Degree::new(2).unwrap(),
        )))
    }

    #[test]
    fn grigorchuk_orders() {
        let g = presented(GRIGORCHUK);
        let orders: Vec<usize> = (1..=4)
            .map(|n| enumerate_quotient(&g, n, DEFAULT_ELEMENT_LIMIT).unwrap().order())
            .collect();
        assert_eq!(orders, vec![2, 8, 128, 4096]);
    }

    #[test]
    fn wreath_sym2_is_full() {
        let q = enumerate_quotient(&wreath2(), 2, 100).unwrap();
        assert_eq!(q.order(), 8);
        assert_eq!(q.level_stabilizer(1).len(), 4);
        assert_eq!(q.level_stabilizer(0).len(), 8);
        assert_eq!(q.truncation_order(1), 2);
    }

    #[test]
    fn limit_is_reported() {
        let g = presented(GRIGORCHUK);
        match enumerate_quotient(&g, 3, 100) {
            Err(Error::LimitExceeded {
                level: 3,
                limit: 100,
                partial,
            }) => assert!(partial > 100),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn witness_words_evaluate_to_their_elements() {
        let g = presented(GRIGORCHUK);
        let e = g.engine().unwrap();
        let q = enumerate_quotient(&g, 3, 1000).unwrap();
        for i in 0..q.order() {
            let w = q.witness_word(i).unwrap();
            assert_eq!(e.evaluate(&w, 3), q.element(i));
        }
        // Sorted storage.
        assert!((1..q.order()).all(|i| q.body(i - 1) < q.body(i)));
        assert_eq!(q.index_of(&Portrait::identity(q.degree(), 3)), Some(0));
    }

    #[test]
    fn subgroup_closure_examples() {
        let g = presented(EXC3);
        let q = enumerate_quotient(&g, 1, 100).unwrap();
        assert_eq!(q.order(), 6);
        let d = q.degree();
        let t = Portrait::from_labels(d, 1, &[Perm::parse_cycles(d, "(2 3)").unwrap()]).unwrap();
        assert_eq!(q.subgroup_closure(&[t]).unwrap().len(), 2);
        assert_eq!(q.subgroup_closure(&[]).unwrap(), vec![0]);
        let gens = g.level_generators(1);
        assert_eq!(q.subgroup_closure(&gens).unwrap().len(), 6);
    }

    #[test]
    fn stabilizer_index_matches_lower_quotient() {
        let g = presented(GRIGORCHUK);
        let q4 = enumerate_quotient(&g, 4, 10_000).unwrap();
        for k in 0..4 {
            let q_k = enumerate_quotient(&g, k, 10_000).unwrap();
            assert_eq!(q4.order() / q4.level_stabilizer(k).len(), q_k.order());
            assert_eq!(q4.truncation_order(k), q_k.order());
        }
    }
}
