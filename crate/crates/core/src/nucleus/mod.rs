//! Nucleus of a contracting self-similar group, the subset `N₁` of nucleus
//! elements that reproduce themselves at a fixed vertex, the number of
//! fixed boundary ends of nucleus elements, and the null-FPP criterion that
//! combines them with transitivity and the martingale condition.

mod graph;

use std::collections::{HashMap, VecDeque};

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::engine::{Engine, Equality, EqualityCaps, Letter, Word};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::portrait::Vertex;
use crate::quotient::{check_martingale_condition, is_level_transitive, MartingaleReport, TransitivityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NucleusCaps {
    /// Rounds of the product-and-section iteration.
    pub depth_cap: usize,
    /// Largest number of distinct elements kept.
    pub pair_cap: usize,
    pub equality: EqualityCaps,
}

impl Default for NucleusCaps {
    fn default() -> Self {
        NucleusCaps {
            depth_cap: 30,
            pair_cap: 20_000,
            equality: EqualityCaps::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NucleusStatus {
    ContractingWithNucleus,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NucleusElement {
    #[serde(skip)]
    pub word: Word,
    /// The representative word in the presentation's notation.
    #[serde(rename = "word")]
    pub text: String,
    /// Hex SHA-256 of the canonical encoding of the digest-depth portrait.
    pub digest: String,
    #[serde(skip)]
    root: u16,
}

/// `from|_letter = to`, indices into the element list, letters 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectionEdge {
    pub from: usize,
    pub letter: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCount {
    Zero,
    Finite(u64),
    Infinite,
}

impl Serialize for EndCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EndCount::Zero => s.serialize_str("zero"),
            EndCount::Finite(k) => s.serialize_str(&format!("finite({k})")),
            EndCount::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct N1Entry {
    pub element: usize,
    /// A nonempty vertex `v` with `g(v) = v` and `g|_v = g`.
    pub witness: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedEndVerdict {
    pub element: usize,
    pub classification: EndCount,
    /// A reachable branching vertex on a cycle (for `Infinite`), given as
    /// the element index and the fixed-letter path leading to it.
    pub branching: Option<(usize, Vertex)>,
    /// Prefixes of the fixed ends up to where they enter their cycle (for
    /// `Finite`).
    pub paths: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NucleusReport {
    pub status: NucleusStatus,
    /// Why the computation is inconclusive.
    pub reason: Option<String>,
    pub degree: usize,
    pub digest_depth: usize,
    pub elements: Vec<NucleusElement>,
    pub section_graph: Vec<SectionEdge>,
    pub n1: Vec<N1Entry>,
    pub end_counts: Vec<EndCount>,
}

/// Smallest depth `D` with `d^D ≥ 256`, used for portrait digests.
pub fn digest_depth(d: usize) -> usize {
    let mut depth = 0;
    let mut leaves = 1usize;
    while leaves < 256 {
        leaves *= d;
        depth += 1;
    }
    depth
}

/// Distinct elements with lazily computed first-level sections.
struct Store<'a> {
    engine: &'a Engine,
    caps: NucleusCaps,
    depth: usize,
    words: Vec<Word>,
    digests: Vec<[u8; 32]>,
    buckets: HashMap<[u8; 32], Vec<usize>>,
    sections: Vec<Option<Vec<usize>>>,
    problem: Option<String>,
}

impl<'a> Store<'a> {
    fn new(engine: &'a Engine, caps: NucleusCaps) -> Self {
        Store {
            engine,
            caps,
            depth: digest_depth(engine.presentation().degree().get()),
            words: Vec::new(),
            digests: Vec::new(),
            buckets: HashMap::new(),
            sections: Vec::new(),
            problem: None,
        }
    }

    fn digest(&self, w: &Word) -> [u8; 32] {
        Sha256::digest(self.engine.evaluate(w, self.depth).encode()).into()
    }

    /// Index of the element `w`, inserting it when new. `None` once a cap
    /// binds.
    fn intern(&mut self, w: Word) -> Option<usize> {
        let w = self.engine.normalize(&w);
        let digest = self.digest(&w);
        if let Some(bucket) = self.buckets.get(&digest) {
            for &i in bucket {
                match self.engine.equal_elements(&w, &self.words[i], self.caps.equality) {
                    Equality::Equal => return Some(i),
                    Equality::NotEqual { .. } => {}
                    Equality::Unknown => {
                        let text = self.engine.presentation().format_word(&w);
                        let other = self.engine.presentation().format_word(&self.words[i]);
                        self.problem
                            .get_or_insert(format!("equality of `{text}` and `{other}` undecided within caps"));
                    }
                }
            }
        }
        if self.words.len() >= self.caps.pair_cap {
            self.problem
                .get_or_insert(format!("more than {} distinct elements", self.caps.pair_cap));
            return None;
        }
        let i = self.words.len();
        self.words.push(w);
        self.digests.push(digest);
        self.buckets.entry(digest).or_default().push(i);
        self.sections.push(None);
        Some(i)
    }

    fn sections_of(&mut self, i: usize) -> Option<Vec<usize>> {
        if let Some(s) = &self.sections[i] {
            return Some(s.clone());
        }
        let words = self.engine.first_level_sections(&self.words[i]);
        let mut out = Vec::with_capacity(words.len());
        for w in words {
            out.push(self.intern(w)?);
        }
        self.sections[i] = Some(out.clone());
        Some(out)
    }

    /// Closure of `seeds` under first-level sections, in discovery order.
    fn section_closure(&mut self, seeds: &[usize]) -> Option<Vec<usize>> {
        let mut member = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &s in seeds {
            if member.insert(s, ()).is_none() {
                order.push(s);
                queue.push_back(s);
            }
        }
        while let Some(i) = queue.pop_front() {
            for t in self.sections_of(i)? {
                if member.insert(t, ()).is_none() {
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        Some(order)
    }

    /// Elements of the section-closed set `set` reachable from a cycle of
    /// its section graph, in the order of `set`.
    fn cycle_reachable(&self, set: &[usize]) -> Vec<usize> {
        let local: HashMap<usize, usize> = set.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let adj: Vec<Vec<usize>> = set
            .iter()
            .map(|&i| self.sections[i].as_ref().unwrap().iter().map(|t| local[t]).collect())
            .collect();
        let cyc = graph::on_cycle(&adj);
        let reach = graph::reachable(&adj, (0..set.len()).filter(|&j| cyc[j]));
        set.iter()
            .enumerate()
            .filter(|(j, _)| reach[*j])
            .map(|(_, &i)| i)
            .collect()
    }
}

/// Iterates `N ← cycle-reachable part of the section closure of N ∪ N·N`
/// from the generators, their inverses and the identity until stable.
pub fn compute_nucleus(group: &Group, caps: NucleusCaps) -> Result<NucleusReport> {
    let engine = group.engine().ok_or(Error::NeedsGenerators)?;
    if caps.depth_cap == 0 || caps.pair_cap == 0 {
        return Err(Error::InvalidParameter("nucleus caps must be at least 1".into()));
    }
    let pres = engine.presentation();
    let d = pres.degree();
    let mut store = Store::new(engine, caps);

    let mut seeds = vec![Word::empty()];
    for g in 0..pres.generator_count() {
        seeds.push(Word::from_letters(vec![Letter::new(g, false)]));
    }
    for g in 0..pres.generator_count() {
        seeds.push(Word::from_letters(vec![Letter::new(g, true)]));
    }

    let mut nucleus: Option<Vec<usize>> = None;
    let mut stable = false;
    for _ in 0..caps.depth_cap {
        let words: Vec<Word> = match &nucleus {
            None => seeds.clone(),
            Some(n) => {
                let mut w: Vec<Word> = n.iter().map(|&i| store.words[i].clone()).collect();
                for &g in n {
                    for &h in n {
                        w.push(store.words[g].mul(&store.words[h]));
                    }
                }
                w
            }
        };
        let mut idx = Vec::with_capacity(words.len());
        for w in words {
            match store.intern(w) {
                Some(i) => idx.push(i),
                None => break,
            }
        }
        let Some(closure) = (if store.problem.is_none() {
            store.section_closure(&idx)
        } else {
            None
        }) else {
            break;
        };
        if store.problem.is_some() {
            break;
        }
        let next = store.cycle_reachable(&closure);
        if let Some(prev) = &nucleus {
            let mut a = prev.clone();
            let mut b = next.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a == b {
                stable = true;
                break;
            }
        }
        nucleus = Some(next);
    }

    let reason = match (&store.problem, stable) {
        (Some(p), _) => Some(p.clone()),
        (None, false) => Some(format!("not stable after {} rounds", caps.depth_cap)),
        (None, true) => None,
    };
    let members = nucleus.unwrap_or_default();
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let elements: Vec<NucleusElement> = members
        .iter()
        .map(|&i| {
            let w = store.words[i].clone();
            NucleusElement {
                text: pres.format_word(&w),
                digest: store.digests[i].iter().map(|b| format!("{b:02x}")).collect(),
                root: engine.root_perm(&w).rank(),
                word: w,
            }
        })
        .collect();
    let mut section_graph = Vec::new();
    if reason.is_none() {
        for (j, &i) in members.iter().enumerate() {
            for (x, &target) in store.sections[i].as_ref().unwrap().iter().enumerate() {
                section_graph.push(SectionEdge {
                    from: j,
                    letter: x + 1,
                    to: local[&target],
                });
            }
        }
    }
    let mut report = NucleusReport {
        status: if reason.is_none() {
            NucleusStatus::ContractingWithNucleus
        } else {
            NucleusStatus::Inconclusive
        },
        reason,
        degree: d.get(),
        digest_depth: store.depth,
        elements,
        section_graph,
        n1: Vec::new(),
        end_counts: Vec::new(),
    };
    if report.status == NucleusStatus::ContractingWithNucleus {
        report.n1 = n1_set(&report)?;
        report.end_counts = (0..report.elements.len())
            .map(|g| fixed_boundary_count(&report, g).map(|v| v.classification))
            .collect::<Result<_>>()?;
    }
    Ok(report)
}

impl NucleusReport {
    /// Edges `g → g|_x` for letters `x` fixed by `g`, as `(letter, target)`.
    pub fn fixed_letter_graph(&self) -> Vec<Vec<(usize, usize)>> {
        let d = crate::perm::Degree::new(self.degree).expect("valid degree");
        let t = d.table();
        let mut adj = vec![Vec::new(); self.elements.len()];
        for e in &self.section_graph {
            if t.image(self.elements[e.from].root, e.letter - 1) == e.letter - 1 {
                adj[e.from].push((e.letter, e.to));
            }
        }
        adj
    }

    pub fn index_of_text(&self, text: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.text == text)
    }

    fn require_conclusive(&self) -> Result<()> {
        match self.status {
            NucleusStatus::ContractingWithNucleus => Ok(()),
            NucleusStatus::Inconclusive => Err(Error::InconclusiveNucleus),
        }
    }
}

/// Elements on a directed cycle of the fixed-letter graph, each with the
/// letters of a shortest such cycle.
pub fn n1_set(report: &NucleusReport) -> Result<Vec<N1Entry>> {
    report.require_conclusive()?;
    let adj = report.fixed_letter_graph();
    let mut out = Vec::new();
    for g in 0..adj.len() {
        // Breadth-first search for the shortest walk from g back to g.
        let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([g]);
        let mut found = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &(x, w) in &adj[u] {
                if w == g {
                    found = Some((u, x));
                    break 'bfs;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                    e.insert((u, x));
                    queue.push_back(w);
                }
            }
        }
        if let Some((last, x)) = found {
            let mut letters = vec![x];
            let mut cur = last;
            while cur != g {
                let (p, y) = prev[&cur];
                letters.push(y);
                cur = p;
            }
            letters.reverse();
            out.push(N1Entry {
                element: g,
                witness: Vertex::new(&letters)?,
            });
        }
    }
    Ok(out)
}

/// Number of ends `x₁x₂⋯` fixed by the nucleus element `g`: infinite
/// fixed-letter walks from `g`.
pub fn fixed_boundary_count(report: &NucleusReport, g: usize) -> Result<FixedEndVerdict> {
    report.require_conclusive()?;
    if g >= report.elements.len() {
        return Err(Error::NotInNucleus);
    }
    let adj = report.fixed_letter_graph();
    let n = adj.len();
    // Greatest subset in which every vertex keeps an outgoing edge.
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for v in 0..n {
            if alive[v] && !adj[v].iter().any(|&(_, w)| alive[w]) {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let pruned: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|v| {
            if alive[v] {
                adj[v].iter().copied().filter(|&(_, w)| alive[w]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    if !alive[g] {
        return Ok(FixedEndVerdict {
            element: g,
            classification: EndCount::Zero,
            branching: None,
            paths: Vec::new(),
        });
    }
    let plain: Vec<Vec<usize>> = pruned.iter().map(|e| e.iter().map(|&(_, w)| w).collect()).collect();
    let cyc = graph::on_cycle(&plain);

    // Walk the reachable part from g, remembering one path to each vertex.
    let mut path_to: HashMap<usize, Vec<usize>> = HashMap::from([(g, Vec::new())]);
    let mut queue = VecDeque::from([g]);
    while let Some(u) = queue.pop_front() {
        if cyc[u] && pruned[u].len() >= 2 {
            return Ok(FixedEndVerdict {
                element: g,
                classification: EndCount::Infinite,
                branching: Some((u, Vertex::new(&path_to[&u])?)),
                paths: Vec::new(),
            });
        }
        for &(x, w) in &pruned[u] {
            if !path_to.contains_key(&w) {
                let mut p = path_to[&u].clone();
                p.push(x);
                path_to.insert(w, p);
                queue.push_back(w);
            }
        }
    }
    // Every reachable cycle is a simple loop; each end is a finite path from
    // g into one of them.
    let mut paths = Vec::new();
    let mut stack = vec![(g, Vec::<usize>::new())];
    while let Some((u, prefix)) = stack.pop() {
        if cyc[u] {
            paths.push(Vertex::new(&prefix)?);
            continue;
        }
        for &(x, w) in pruned[u].iter().rev() {
            let mut p = prefix.clone();
            p.push(x);
            stack.push((w, p));
        }
    }
    Ok(FixedEndVerdict {
        element: g,
        classification: EndCount::Finite(paths.len() as u64),
        branching: None,
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JonesConfig {
    pub nucleus: NucleusCaps,
    /// Levels checked for transitivity and the martingale condition.
    pub levels: usize,
    pub element_limit: usize,
}

impl Default for JonesConfig {
    fn default() -> Self {
        JonesConfig {
            nucleus: NucleusCaps::default(),
            levels: 3,
            element_limit: crate::quotient::DEFAULT_ELEMENT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum JonesVerdict {
    Holds,
    FailsWithWitness { witness: String, reason: String },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JonesReport {
    #[serde(flatten)]
    pub verdict: JonesVerdict,
    pub nucleus: NucleusReport,
    pub transitivity: Option<TransitivityReport>,
    pub martingale: Option<MartingaleReport>,
}

/// The null-FPP criterion: a contracting group, level-transitive with the
/// martingale property, whose `N₁` elements all fix infinitely many ends.
/// Checks run in that order of cost: nucleus, `N₁` ends, transitivity,
/// martingale.
pub fn check_jones_condition(group: &Group, config: JonesConfig) -> Result<JonesReport> {
    let nucleus = compute_nucleus(group, config.nucleus)?;
    let mut report = JonesReport {
        verdict: JonesVerdict::Holds,
        nucleus,
        transitivity: None,
        martingale: None,
    };
    if let Some(reason) = &report.nucleus.reason {
        report.verdict = JonesVerdict::Inconclusive {
            reason: format!("nucleus: {reason}"),
        };
        return Ok(report);
    }
    for entry in &report.nucleus.n1 {
        let count = report.nucleus.end_counts[entry.element];
        if count != EndCount::Infinite {
            let text = report.nucleus.elements[entry.element].text.clone();
            report.verdict = JonesVerdict::FailsWithWitness {
                reason: format!("element `{text}` of N1 fixes {} boundary ends", end_count_text(count)),
                witness: text,
            };
            return Ok(report);
        }
    }
    let transitivity = is_level_transitive(group, config.levels)?;
    if !transitivity.transitive {
        let level = transitivity
            .orbit_sizes
            .iter()
            .enumerate()
            .position(|(j, &s)| s != group.degree().pow(j + 1))
            .unwrap()
            + 1;
        report.verdict = JonesVerdict::FailsWithWitness {
            witness: format!("level {level}"),
            reason: format!("not transitive on level {level}"),
        };
        report.transitivity = Some(transitivity);
        return Ok(report);
    }
    report.transitivity = Some(transitivity);
    let martingale = check_martingale_condition(group, config.levels, config.element_limit)?;
    if let Some(level) = martingale.levels.iter().find(|l| !l.transitive) {
        let v = level.failing_vertex.clone().unwrap_or_default();
        report.verdict = JonesVerdict::FailsWithWitness {
            witness: v.to_string(),
            reason: format!(
                "level stabilizer {} is not transitive below vertex {v}",
                level.level - 1
            ),
        };
    }
    report.martingale = Some(martingale);
    Ok(report)
}

fn end_count_text(c: EndCount) -> String {
    match c {
        EndCount::Zero => "no".into(),
        EndCount::Finite(k) => format!("only {k}"),
        EndCount::Infinite => "infinitely many".into(),
    }
}
