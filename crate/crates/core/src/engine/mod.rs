//! Symbolic layer over a [`GroupPresentation`]: evaluation of words to
//! portraits, symbolic sections, and the coinductive equality test.

mod presentation;
mod word;

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

pub use presentation::{GeneratorRecursion, GroupPresentation, PresentationMetadata};
pub use word::{Letter, Reducer, Word};

use crate::perm::Perm;
use crate::portrait::{compose_ranks, Portrait, Vertex};

/// Caps for [`Engine::equal_elements`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualityCaps {
    /// Deepest section level explored.
    pub depth_cap: usize,
    /// Largest number of distinct section states explored.
    pub pair_cap: usize,
}

impl Default for EqualityCaps {
    fn default() -> Self {
        EqualityCaps {
            depth_cap: 30,
            pair_cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Equality {
    Equal,
    /// The elements already differ on level `level`.
    NotEqual {
        level: usize,
    },
    Unknown,
}

/// Largest power probed when detecting generator orders.
const ORDER_PROBE: usize = 12;

type MemoKey = (usize, bool, usize);

/// A presentation together with the memoized generator portraits and the
/// word normal form derived from detected generator orders.
#[derive(Debug)]
pub struct Engine {
    presentation: Arc<GroupPresentation>,
    memo: RwLock<HashMap<MemoKey, Arc<Portrait>>>,
    reducer: Reducer,
}

impl Engine {
    pub fn new(presentation: GroupPresentation) -> Self {
        let presentation = Arc::new(presentation);
        let count = presentation.generator_count();
        let mut engine = Engine {
            presentation,
            memo: RwLock::new(HashMap::new()),
            reducer: Reducer::new(count),
        };
        engine.detect_orders();
        engine
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn shared_presentation(&self) -> Arc<GroupPresentation> {
        Arc::clone(&self.presentation)
    }

    pub fn reducer(&self) -> &Reducer {
        &self.reducer
    }

    /// Records `g^k = 1` for every generator where the bisimulation proves it
    /// for some small `k`; used to shorten words in normal forms.
    fn detect_orders(&mut self) {
        let caps = EqualityCaps {
            depth_cap: 16,
            pair_cap: 2_000,
        };
        for g in 0..self.presentation.generator_count() {
            let w = Word::generator(g);
            for k in 1..=ORDER_PROBE {
                if self.is_identity(&w.pow(k), caps) == Equality::Equal {
                    self.reducer.set_order(g, k as u32);
                    break;
                }
            }
        }
    }

    /// Order of a generator if it was detected to be at most 12.
    pub fn generator_order(&self, g: usize) -> Option<u32> {
        self.reducer.order(g)
    }

    pub fn normalize(&self, w: &Word) -> Word {
        self.reducer.normalize(w)
    }

    /// Depth-`depth` portrait of a single generator or inverse.
    pub fn letter_portrait(&self, letter: Letter, depth: usize) -> Arc<Portrait> {
        let key = (letter.generator, letter.inverse, depth);
        if let Some(p) = self.memo.read().unwrap().get(&key) {
            return Arc::clone(p);
        }
        let pres = &self.presentation;
        let d = pres.degree();
        let portrait = if depth == 0 {
            Portrait::identity(d, 0)
        } else if letter.inverse {
            self.letter_portrait(letter.inv(), depth).invert()
        } else {
            let g = &pres.generators()[letter.generator];
            let children: Vec<Portrait> = g.sections.iter().map(|s| self.evaluate(s, depth - 1)).collect();
            let refs: Vec<&Portrait> = children.iter().collect();
            Portrait::from_root_and_children(&g.root, &refs).expect("validated presentation")
        };
        let portrait = Arc::new(portrait);
        self.memo
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| Arc::clone(&portrait));
        portrait
    }

    pub fn generator_portraits(&self, depth: usize) -> Vec<Arc<Portrait>> {
        (0..self.presentation.generator_count())
            .map(|g| self.letter_portrait(Letter::new(g, false), depth))
            .collect()
    }

    /// `π_depth(w)`.
    pub fn evaluate(&self, w: &Word, depth: usize) -> Portrait {
        let d = self.presentation.degree();
        let mut acc = Portrait::identity(d, depth);
        if depth == 0 {
            return acc;
        }
        let mut out = vec![0u16; acc.ranks().len()];
        let mut img = Vec::new();
        // acc = l1 · l2 ⋯ lk, built from the right.
        for &l in w.letters().iter().rev() {
            let p = self.letter_portrait(l, depth);
            compose_ranks(d, p.ranks(), acc.ranks(), &mut out, &mut img);
            acc = Portrait::from_ranks(d, depth, std::mem::take(&mut out));
            out = vec![0u16; acc.ranks().len()];
        }
        acc
    }

    /// Root permutation of a word.
    pub fn root_perm(&self, w: &Word) -> Perm {
        let d = self.presentation.degree();
        let t = d.table();
        let mut rank = 0u16;
        for &l in w.letters().iter().rev() {
            rank = t.mul(self.letter_root_rank(l), rank);
        }
        Perm::from_rank(d, rank)
    }

    fn letter_root_rank(&self, l: Letter) -> u16 {
        let r = self.presentation.generators()[l.generator].root.rank();
        if l.inverse {
            self.presentation.degree().table().inverse(r)
        } else {
            r
        }
    }

    /// Section of `w` at the 0-based letter `x`, unreduced.
    fn section_letter(&self, w: &Word, x: usize) -> Word {
        let t = self.presentation.degree().table();
        let gens = self.presentation.generators();
        let mut parts: Vec<Word> = Vec::with_capacity(w.len());
        let mut y = x;
        for &l in w.letters().iter().rev() {
            let g = &gens[l.generator];
            if l.inverse {
                let rinv = t.inverse(g.root.rank());
                let pre = t.image(rinv, y);
                parts.push(g.sections[pre].inverse());
                y = pre;
            } else {
                parts.push(g.sections[y].clone());
                y = t.image(g.root.rank(), y);
            }
        }
        let mut letters = Vec::new();
        for p in parts.into_iter().rev() {
            letters.extend(p.into_letters());
        }
        Word::from_letters(letters)
    }

    /// A word for the section of `w` at `v`, in normal form.
    pub fn section_word(&self, w: &Word, v: &Vertex) -> Word {
        let mut cur = self.reducer.normalize(w);
        for x in v.letters() {
            cur = self.reducer.normalize(&self.section_letter(&cur, x - 1));
        }
        cur
    }

    /// Normalized sections of `w` at every first-level letter (0-based order).
    pub fn first_level_sections(&self, w: &Word) -> Vec<Word> {
        (0..self.presentation.degree().get())
            .map(|x| self.reducer.normalize(&self.section_letter(w, x)))
            .collect()
    }

    /// Image of the 0-based first-level letter `x` under `w`.
    pub fn letter_image(&self, w: &Word, x: usize) -> usize {
        self.root_perm(w).raw()[x] as usize
    }

    /// Decides `w1 = w2` by exploring the sections of `w1 · w2^-1`.
    pub fn equal_elements(&self, w1: &Word, w2: &Word, caps: EqualityCaps) -> Equality {
        self.is_identity(&w1.mul(&w2.inverse()), caps)
    }

    /// Coinductive identity test. States are words up to rotation (conjugate
    /// states are trivial together); the explored set is a proof of triviality
    /// when every state has trivial root permutation and all sections of
    /// states are again states.
    pub fn is_identity(&self, w: &Word, caps: EqualityCaps) -> Equality {
        let d = self.presentation.degree().get();
        let start = self.reducer.cyclic_normalize(w);
        if start.is_empty() {
            return Equality::Equal;
        }
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back((start, 0usize));
        let mut capped = false;
        while let Some((state, depth)) = queue.pop_front() {
            if !self.root_perm(&state).is_identity() {
                return Equality::NotEqual { level: depth + 1 };
            }
            if capped {
                continue;
            }
            if depth >= caps.depth_cap {
                capped = true;
                continue;
            }
            for x in 0..d {
                let s = self.reducer.cyclic_normalize(&self.section_letter(&state, x));
                if s.is_empty() || seen.contains(&s) {
                    continue;
                }
                if seen.len() >= caps.pair_cap {
                    capped = true;
                    break;
                }
                seen.insert(s.clone());
                queue.push_back((s, depth + 1));
            }
        }
        if capped {
            Equality::Unknown
        } else {
            Equality::Equal
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Degree;

    const GRIGORCHUK: &str =
        "degree 2\ngen a = (1, 1) (1 2)\ngen b = (a, c) ()\ngen c = (a, d) ()\ngen d = (1, b) ()\n";
    const BASILICA: &str = "degree 2\ngen a = (1, b) ()\ngen b = (1, a) (1 2)\n";
    const OB: &str = "degree 2\ngen a = (1, b) ()\ngen b = (1, a) (1 2)\ngen c = (1, 1) (1 2)\n";
    const GGS3: &str = "degree 3\ngen a = (1, 1, 1) (1 2 3)\ngen b = (a, a a, b) ()\n";
    const EXC3: &str = "degree 3\ngen g0 = (g0, 1, 1) (2 3)\ngen g1 = (g1, 1, 1) (1 2)\n";

    fn engine(text: &str) -> Engine {
        Engine::new(GroupPresentation::parse(text).unwrap())
    }

    #[test]
    fn evaluates_grigorchuk_generators() {
        let e = engine(GRIGORCHUK);
        let a = e.evaluate(&e.presentation().parse_word("a").unwrap(), 1);
        assert_eq!(a.root_label().to_string(), "(1 2)");
        let b = e.evaluate(&e.presentation().parse_word("b").unwrap(), 2);
        assert_eq!(b.fixed_leaves(), 2);
        let v = Vertex::new(&[1, 1]).unwrap();
        let a2 = e.evaluate(&e.presentation().parse_word("a").unwrap(), 2);
        assert_eq!(a2.apply(&v).unwrap(), Vertex::new(&[2, 1]).unwrap());
    }

    #[test]
    fn grigorchuk_bc_is_d() {
        let e = engine(GRIGORCHUK);
        let p = e.presentation();
        for n in 1..=5 {
            let bc = e
                .evaluate(&p.parse_word("b").unwrap(), n)
                .compose(&e.evaluate(&p.parse_word("c").unwrap(), n))
                .unwrap();
            assert_eq!(bc, e.evaluate(&p.parse_word("d").unwrap(), n));
        }
        let verdict = e.equal_elements(
            &p.parse_word("b c").unwrap(),
            &p.parse_word("d").unwrap(),
            EqualityCaps::default(),
        );
        assert_eq!(verdict, Equality::Equal);
        for g in 0..4 {
            assert_eq!(e.generator_order(g), Some(2));
        }
    }

    #[test]
    fn basilica_sections() {
        let e = engine(BASILICA);
        let p = e.presentation();
        let a = p.parse_word("a").unwrap();
        let s = e.section_word(&a, &Vertex::new(&[2]).unwrap());
        assert_eq!(p.format_word(&s), "b");
        let pa = e.evaluate(&a, 3);
        assert_eq!(pa.section(&Vertex::new(&[2]).unwrap()).unwrap(), e.evaluate(&s, 2));
        assert!(e
            .section_word(&Word::empty(), &Vertex::new(&[1, 2]).unwrap())
            .is_empty());
        assert_eq!(
            e.equal_elements(&a, &p.parse_word("b").unwrap(), EqualityCaps::default()),
            Equality::NotEqual { level: 1 }
        );
        assert_eq!(e.generator_order(0), None);
        assert_eq!(e.generator_order(1), None);
    }

    #[test]
    fn ob_c_has_order_two() {
        let e = engine(OB);
        let p = e.presentation();
        let verdict = e.equal_elements(&p.parse_word("c c").unwrap(), &Word::empty(), EqualityCaps::default());
        assert_eq!(verdict, Equality::Equal);
    }

    #[test]
    fn ggs_last_section_of_b_is_b() {
        let e = engine(GGS3);
        let p = e.presentation();
        let b = p.parse_word("b").unwrap();
        assert_eq!(p.format_word(&e.section_word(&b, &Vertex::new(&[3]).unwrap())), "b");
        // a a is normalized to a^-1 once the order of a is known.
        assert_eq!(p.format_word(&e.section_word(&b, &Vertex::new(&[2]).unwrap())), "a^-1");
        assert_eq!(e.generator_order(0), Some(3));
        assert_eq!(e.generator_order(1), Some(3));
    }

    #[test]
    fn exceptional_product_is_three_cycle() {
        let e = engine(EXC3);
        let w = e.presentation().parse_word("g0 g1").unwrap();
        let p = e.evaluate(&w, 1);
        assert_eq!(p.fixed_leaves(), 0);
        assert_eq!(p.root_label().to_string(), "(1 3 2)");
        assert_eq!(e.root_perm(&w), p.root_label());
    }

    #[test]
    fn unknown_when_caps_bind() {
        let e = engine(BASILICA);
        let p = e.presentation();
        // a^64 and 1 agree on the first 6 levels; a tiny depth cap cannot tell.
        let caps = EqualityCaps {
            depth_cap: 2,
            pair_cap: 100,
        };
        assert_eq!(
            e.equal_elements(&p.parse_word("a").unwrap().pow(64), &Word::empty(), caps),
            Equality::Unknown
        );
        let verdict = e.equal_elements(
            &p.parse_word("a").unwrap().pow(64),
            &Word::empty(),
            EqualityCaps::default(),
        );
        assert!(matches!(verdict, Equality::NotEqual { level } if level > 3));
    }

    #[test]
    fn memo_is_consistent_across_depths() {
        let e = engine(GRIGORCHUK);
        let d = Degree::new(2).unwrap();
        for g in 0..4 {
            let deep = e.letter_portrait(Letter::new(g, false), 5);
            for n in 0..5 {
                assert_eq!(deep.truncate(n).unwrap(), *e.letter_portrait(Letter::new(g, false), n));
            }
        }
        assert_eq!(*e.letter_portrait(Letter::new(0, false), 0), Portrait::identity(d, 0));
    }
}
