//! Level-transitivity, the fractality hierarchy and the martingale criterion,
//! checked on finite quotients.
//!
//! Two routes are available. The direct route enumerates `π_{k+m}(G)` and
//! filters stabilizers. The Schreier route only enumerates `π_k(G)` (or the
//! orbit of a vertex), lifts a transversal to depth `k+m`, and closes the
//! sections of the Schreier generators inside `Aut(T^m)`; it needs a
//! presentation so that generators at different depths correspond.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{enumerate_from_generators, enumerate_quotient, LevelQuotient, NO_PARENT};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::portrait::{Portrait, Vertex};

/// Printed with every fractality report.
pub const FINITE_LEVEL_NOTE: &str = "finite-level check on the profinite closure: a failure disproves the \
property for G and its closure, a pass only covers the checked levels";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalProperty {
    Fractal,
    StronglyFractal,
    SuperStronglyFractal,
}

impl FractalProperty {
    /// Stabilizer levels examined for a bound `k_max`.
    pub fn stabilizer_levels(self, k_max: usize) -> Vec<usize> {
        match self {
            FractalProperty::StronglyFractal => vec![1],
            _ => (1..=k_max).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckRoute {
    /// Schreier for presentations, direct for finite-type groups.
    Auto,
    Direct,
    Schreier,
}

impl CheckRoute {
    fn resolve(self, group: &Group) -> Result<CheckRoute> {
        match (self, group) {
            (CheckRoute::Auto, Group::Presented(_)) => Ok(CheckRoute::Schreier),
            (CheckRoute::Auto, Group::FiniteType(_)) => Ok(CheckRoute::Direct),
            (CheckRoute::Schreier, Group::FiniteType(_)) => Err(Error::NeedsGenerators),
            (r, _) => Ok(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexVerdict {
    pub stabilizer_level: usize,
    pub vertex: Vertex,
    pub surjective: bool,
    pub image_order: usize,
    /// An element of `π_m(G)` that is not a section, when not surjective.
    pub missing: Option<Portrait>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalityOutcome {
    PassUpToBound,
    FailWithWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractalityReport {
    pub property: FractalProperty,
    pub stabilizer_levels: Vec<usize>,
    pub target_level: usize,
    pub target_order: usize,
    pub route: CheckRoute,
    pub verdicts: Vec<VertexVerdict>,
    pub outcome: FractalityOutcome,
    pub note: String,
}

impl FractalityReport {
    pub fn passed(&self) -> bool {
        self.outcome == FractalityOutcome::PassUpToBound
    }

    /// The first failing vertex.
    pub fn witness(&self) -> Option<&VertexVerdict> {
        self.verdicts.iter().find(|v| !v.surjective)
    }
}

pub fn check_fractality(
    group: &Group,
    property: FractalProperty,
    k_max: usize,
    m: usize,
    element_limit: usize,
) -> Result<FractalityReport> {
    check_fractality_with(group, property, k_max, m, element_limit, CheckRoute::Auto)
}

/// For each required stabilizer level `k` and vertex `v` of level `k`,
/// compares the depth-`m` sections at `v` of the relevant stabilizer with
/// `π_m(G)`.
pub fn check_fractality_with(
    group: &Group,
    property: FractalProperty,
    k_max: usize,
    m: usize,
    element_limit: usize,
    route: CheckRoute,
) -> Result<FractalityReport> {
    if k_max == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "stabilizer and target levels must be at least 1".into(),
        ));
    }
    let route = route.resolve(group)?;
    let target = enumerate_quotient(group, m, element_limit)?;
    let levels = property.stabilizer_levels(k_max);
    let d = group.degree();
    let mut verdicts = Vec::new();
    for &k in &levels {
        match route {
            CheckRoute::Direct => {
                let q = enumerate_quotient(group, k + m, element_limit)?;
                let stab = q.level_stabilizer(k);
                for pos in 0..d.pow(k) {
                    let v = Vertex::from_level_position(d, k, pos);
                    let mut image: HashSet<Vec<u8>> = HashSet::new();
                    let members: Box<dyn Iterator<Item = usize>> = match property {
                        FractalProperty::Fractal => Box::new(0..q.order()),
                        _ => Box::new(stab.iter().copied()),
                    };
                    for i in members {
                        let p = q.element(i);
                        if property == FractalProperty::Fractal && p.apply(&v)? != v {
                            continue;
                        }
                        image.insert(p.section_at(k, pos).body());
                    }
                    verdicts.push(verdict(k, v, &target, image.len(), |b| image.contains(b)));
                }
            }
            _ if property == FractalProperty::Fractal => {
                for pos in 0..d.pow(k) {
                    let gens = vertex_stabilizer_generators(group, k, pos, m);
                    let mut seeds = SectionSeeds::default();
                    seeds.extend(gens.iter().map(|g| g.section_at(k, pos)));
                    let closure = enumerate_from_generators(d, m, &seeds.list, element_limit, false, "")?;
                    let v = Vertex::from_level_position(d, k, pos);
                    verdicts.push(verdict(k, v, &target, closure.order(), |b| {
                        closure.index_of_body(b).is_some()
                    }));
                }
            }
            _ => {
                // A subset of St(k) whose sections already generate π_m is
                // enough for a pass, so generators are drawn in growing batches.
                let mut stream = SchreierStream::new(group, k, m, element_limit)?;
                let count = d.pow(k);
                let mut seeds: Vec<SectionSeeds> = vec![SectionSeeds::default(); count];
                let mut level_verdicts: Vec<Option<VertexVerdict>> = vec![None; count];
                let mut batch = 16;
                loop {
                    let fresh = stream.next_batch(batch);
                    let exhausted = stream.exhausted();
                    for pos in 0..count {
                        if level_verdicts[pos].as_ref().is_some_and(|v| v.surjective) {
                            continue;
                        }
                        seeds[pos].extend(fresh.iter().map(|g| g.section_at(k, pos)));
                        let closure = enumerate_from_generators(d, m, &seeds[pos].list, element_limit, false, "")?;
                        if closure.order() == target.order() || exhausted {
                            let v = Vertex::from_level_position(d, k, pos);
                            level_verdicts[pos] = Some(verdict(k, v, &target, closure.order(), |b| {
                                closure.index_of_body(b).is_some()
                            }));
                        }
                    }
                    if level_verdicts.iter().all(Option::is_some) {
                        break;
                    }
                    batch *= 4;
                }
                verdicts.extend(level_verdicts.into_iter().map(Option::unwrap));
            }
        }
    }
    let outcome = if verdicts.iter().all(|v| v.surjective) {
        FractalityOutcome::PassUpToBound
    } else {
        FractalityOutcome::FailWithWitness
    };
    Ok(FractalityReport {
        property,
        stabilizer_levels: levels,
        target_level: m,
        target_order: target.order(),
        route,
        verdicts,
        outcome,
        note: FINITE_LEVEL_NOTE.to_string(),
    })
}

fn verdict(
    k: usize,
    vertex: Vertex,
    target: &LevelQuotient,
    image_order: usize,
    contains: impl Fn(&[u8]) -> bool,
) -> VertexVerdict {
    let surjective = image_order == target.order();
    let missing = if surjective {
        None
    } else {
        (0..target.order())
            .find(|&i| !contains(target.body(i)))
            .map(|i| target.element(i))
    };
    VertexVerdict {
        stabilizer_level: k,
        vertex,
        surjective,
        image_order,
        missing,
    }
}

/// Distinct nontrivial section portraits.
#[derive(Debug, Clone, Default)]
struct SectionSeeds {
    list: Vec<Portrait>,
    seen: HashSet<Vec<u16>>,
}

impl SectionSeeds {
    fn extend(&mut self, sections: impl Iterator<Item = Portrait>) {
        for s in sections {
            if !s.is_identity() && self.seen.insert(s.ranks().to_vec()) {
                self.list.push(s);
            }
        }
    }
}

/// Depth-`k+m` portraits of Schreier generators `rep(s·t)^-1 · s · t` of
/// `St_G(k)`, where the transversal `t` runs over lifts of the elements of
/// `π_k(G)` along their witness words.
struct SchreierStream {
    qk: LevelQuotient,
    gens: Vec<Portrait>,
    lifts: HashMap<usize, Portrait>,
    depth: usize,
    prefix: usize,
    next: usize,
    seen: HashSet<Vec<u16>>,
}

impl SchreierStream {
    fn new(group: &Group, k: usize, m: usize, element_limit: usize) -> Result<Self> {
        if group.engine().is_none() {
            return Err(Error::NeedsGenerators);
        }
        let d = group.degree();
        Ok(SchreierStream {
            qk: enumerate_quotient(group, k, element_limit)?,
            gens: group.level_generators(k + m),
            lifts: HashMap::new(),
            depth: k + m,
            prefix: d.internal_vertices(k) * d.label_width(),
            next: 0,
            seen: HashSet::new(),
        })
    }

    fn exhausted(&self) -> bool {
        self.next >= self.qk.order()
    }

    fn lift(&mut self, i: usize) -> Portrait {
        let mut chain = Vec::new();
        let mut c = i;
        while !self.lifts.contains_key(&c) {
            if self.qk.parents[c] == NO_PARENT {
                self.lifts.insert(c, Portrait::identity(self.qk.degree(), self.depth));
                break;
            }
            chain.push(c);
            c = self.qk.parents[c] as usize;
        }
        for &c in chain.iter().rev() {
            let parent = &self.lifts[&(self.qk.parents[c] as usize)];
            let l = self.gens[self.qk.gens[c] as usize].compose(parent).unwrap();
            self.lifts.insert(c, l);
        }
        self.lifts[&i].clone()
    }

    /// New generators from the next `count` transversal elements.
    fn next_batch(&mut self, count: usize) -> Vec<Portrait> {
        let mut out = Vec::new();
        let end = (self.next + count).min(self.qk.order());
        for i in self.next..end {
            let t = self.lift(i);
            for s in 0..self.gens.len() {
                let st = self.gens[s].compose(&t).unwrap();
                let rep = self
                    .qk
                    .index_of_body(&st.body()[..self.prefix])
                    .expect("truncations of group elements lie in the quotient");
                let g = self.lift(rep).invert().compose(&st).unwrap();
                if !g.is_identity() && self.seen.insert(g.ranks().to_vec()) {
                    out.push(g);
                }
            }
        }
        self.next = end;
        out
    }
}

/// Depth-`k+m` portraits of Schreier generators of the stabilizer of the
/// level-`k` vertex at position `pos`, with the orbit as transversal.
fn vertex_stabilizer_generators(group: &Group, k: usize, pos: usize, m: usize) -> Vec<Portrait> {
    let gens = group.level_generators(k + m);
    let actions: Vec<Vec<u32>> = gens.iter().map(|g| g.level_action(k).unwrap()).collect();
    let mut lift: HashMap<usize, Portrait> = HashMap::new();
    lift.insert(pos, Portrait::identity(group.degree(), k + m));
    let mut order = vec![pos];
    let mut queue = VecDeque::from([pos]);
    while let Some(u) = queue.pop_front() {
        for (s, act) in gens.iter().zip(&actions) {
            let w = act[u] as usize;
            if !lift.contains_key(&w) {
                let l = s.compose(&lift[&u]).unwrap();
                lift.insert(w, l);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for &u in &order {
        for (s, act) in gens.iter().zip(&actions) {
            let w = act[u] as usize;
            let g = lift[&w].invert().compose(&s.compose(&lift[&u]).unwrap()).unwrap();
            if !g.is_identity() && seen.insert(g.body()) {
                out.push(g);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MartingaleLevel {
    pub level: usize,
    pub vertices: usize,
    pub transitive: bool,
    pub failing_vertex: Option<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MartingaleReport {
    pub route: CheckRoute,
    pub levels: Vec<MartingaleLevel>,
    pub holds: bool,
}

pub fn check_martingale_condition(group: &Group, max_level: usize, element_limit: usize) -> Result<MartingaleReport> {
    check_martingale_condition_with(group, max_level, element_limit, CheckRoute::Auto)
}

/// For `n ≤ max_level` and every `v` of level `n-1`: is the action of
/// `St_G(n-1)` on the children of `v` transitive?
pub fn check_martingale_condition_with(
    group: &Group,
    max_level: usize,
    element_limit: usize,
    route: CheckRoute,
) -> Result<MartingaleReport> {
    if max_level == 0 {
        return Err(Error::InvalidParameter("level bound must be at least 1".into()));
    }
    let route = route.resolve(group)?;
    let d = group.degree();
    let mut levels = Vec::new();
    for n in 1..=max_level {
        let base = d.internal_vertices(n - 1);
        let count = d.pow(n - 1);
        let failing = match route {
            CheckRoute::Direct => {
                let q = enumerate_quotient(group, n, element_limit)?;
                let mut ranks = Vec::new();
                let mut sets: Vec<HashSet<u16>> = vec![HashSet::new(); count];
                for i in q.level_stabilizer(n - 1) {
                    q.ranks_into(i, &mut ranks);
                    for (pos, set) in sets.iter_mut().enumerate() {
                        set.insert(ranks[base + pos]);
                    }
                }
                (0..count).find(|&pos| !transitive_on_letters(d, sets[pos].iter().copied()))
            }
            _ => {
                let mut stream = SchreierStream::new(group, n - 1, 1, element_limit)?;
                let mut sets: Vec<HashSet<u16>> = vec![HashSet::new(); count];
                let mut batch = 16;
                loop {
                    for g in stream.next_batch(batch) {
                        for (pos, set) in sets.iter_mut().enumerate() {
                            set.insert(g.ranks()[base + pos]);
                        }
                    }
                    let failing = (0..count).find(|&pos| !transitive_on_letters(d, sets[pos].iter().copied()));
                    if failing.is_none() || stream.exhausted() {
                        break failing;
                    }
                    batch *= 4;
                }
            }
        }
        .map(|pos| Vertex::from_level_position(d, n - 1, pos));
        levels.push(MartingaleLevel {
            level: n,
            vertices: d.pow(n - 1),
            transitive: failing.is_none(),
            failing_vertex: failing,
        });
    }
    let holds = levels.iter().all(|l| l.transitive);
    Ok(MartingaleReport { route, levels, holds })
}

/// Whether the permutations with the given ranks generate a transitive group.
fn transitive_on_letters(d: crate::perm::Degree, ranks: impl Iterator<Item = u16>) -> bool {
    let t = d.table();
    let ranks: Vec<u16> = ranks.collect();
    let mut seen = vec![false; d.get()];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for &r in &ranks {
            let y = t.image(r, x);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitivityReport {
    /// Orbit size of the first vertex on levels `1..=n`.
    pub orbit_sizes: Vec<usize>,
    pub transitive: bool,
}

/// Orbit of the leftmost vertex under the generators on each level up to `n`.
pub fn is_level_transitive(group: &Group, n: usize) -> Result<TransitivityReport> {
    let d = group.degree();
    let gens = group.level_generators(n);
    let mut orbit_sizes = Vec::with_capacity(n);
    for level in 1..=n {
        let actions: Vec<Vec<u32>> = gens.iter().map(|g| g.level_action(level)).collect::<Result<_>>()?;
        let mut seen = vec![false; d.pow(level)];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut size = 1;
        while let Some(u) = stack.pop() {
            for act in &actions {
                let w = act[u] as usize;
                if !seen[w] {
                    seen[w] = true;
                    size += 1;
                    stack.push(w);
                }
            }
        }
        orbit_sizes.push(size);
    }
    let transitive = orbit_sizes.iter().enumerate().all(|(j, &s)| s == d.pow(j + 1));
    Ok(TransitivityReport {
        orbit_sizes,
        transitive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GroupPresentation;
    use crate::group::{FiniteTypeSpec, PermGroup};
    use crate::perm::Degree;
    use crate::quotient::DEFAULT_ELEMENT_LIMIT;

    const GRIGORCHUK: &str =
        "degree 2\ngen a = (1, 1) (1 2)\ngen b = (a, c) ()\ngen c = (a, d) ()\ngen d = (1, b) ()\n";
    const ADDING: &str = "degree 2\ngen a = (a, 1) (1 2)\n";

    fn presented(text: &str) -> Group {
        Group::from_presentation(GroupPresentation::parse(text).unwrap())
    }

    #[test]
    fn grigorchuk_ssf_both_routes() {
        let g = presented(GRIGORCHUK);
        for route in [CheckRoute::Direct, CheckRoute::Schreier] {
            let r = check_fractality_with(
                &g,
                FractalProperty::SuperStronglyFractal,
                2,
                2,
                DEFAULT_ELEMENT_LIMIT,
                route,
            )
            .unwrap();
            assert!(r.passed(), "{route:?}");
            assert_eq!(r.verdicts.len(), 2 + 4);
            assert_eq!(r.target_order, 8);
        }
    }

    #[test]
    fn routes_agree_on_image_orders() {
        let g = presented(GRIGORCHUK);
        for property in [FractalProperty::Fractal, FractalProperty::StronglyFractal] {
            let a = check_fractality_with(&g, property, 2, 1, 10_000, CheckRoute::Direct).unwrap();
            let b = check_fractality_with(&g, property, 2, 1, 10_000, CheckRoute::Schreier).unwrap();
            assert_eq!(a.verdicts, b.verdicts);
        }
    }

    #[test]
    fn adding_machine_is_strongly_fractal() {
        // St(1) = <a^2> and a^2 = (a, a), so both child sections give <a>.
        let g = presented(ADDING);
        let r = check_fractality(&g, FractalProperty::StronglyFractal, 1, 2, 1000).unwrap();
        assert!(r.passed());
        assert_eq!(r.target_order, 4);
        let m = check_martingale_condition(&g, 2, 1000).unwrap();
        assert!(m.holds);
    }

    #[test]
    fn trivial_root_group_fails_martingale_and_transitivity() {
        let g = presented("degree 2\ngen a = (a, a) ()\n");
        let t = is_level_transitive(&g, 1).unwrap();
        assert!(!t.transitive);
        assert_eq!(t.orbit_sizes, vec![1]);
        let m = check_martingale_condition(&g, 1, 10).unwrap();
        assert!(!m.holds);
        assert_eq!(m.levels[0].failing_vertex, Some(Vertex::root()));
    }

    #[test]
    fn wreath_martingale_direct() {
        let g = Group::FiniteType(FiniteTypeSpec::iterated_wreath(PermGroup::symmetric(
            Degree::new(2).unwrap(),
        )));
        let m = check_martingale_condition(&g, 4, DEFAULT_ELEMENT_LIMIT).unwrap();
        assert!(m.holds);
        assert_eq!(m.route, CheckRoute::Direct);
        assert!(check_martingale_condition_with(&g, 2, 100, CheckRoute::Schreier).is_err());
    }

    #[test]
    fn grigorchuk_transitive() {
        let t = is_level_transitive(&presented(GRIGORCHUK), 4).unwrap();
        assert_eq!(t.orbit_sizes, vec![2, 4, 8, 16]);
        assert!(t.transitive);
    }
}
