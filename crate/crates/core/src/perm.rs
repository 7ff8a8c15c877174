//! Permutations of the alphabet `{1, ..., d}` and the per-degree rank table
//! used to store portrait labels as fixed-width indices.
//!
//! Letters are 1-based at the public surface (constructors, `Display`) and
//! 0-based internally. Ranks are lexicographic on the image sequence, so rank
//! 0 is always the identity.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported tree degree; `8!` still fits a `u16` rank.
pub const MAX_DEGREE: usize = 8;

/// Arity of the regular rooted tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Degree(u8);

impl Degree {
    pub fn new(d: usize) -> Result<Self> {
        if (2..=MAX_DEGREE).contains(&d) {
            Ok(Degree(d as u8))
        } else {
            Err(Error::UnsupportedDegree(d))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn table(self) -> &'static PermTable {
        static TABLES: [OnceLock<PermTable>; MAX_DEGREE + 1] = [const { OnceLock::new() }; MAX_DEGREE + 1];
        TABLES[self.get()].get_or_init(|| PermTable::build(self.get()))
    }

    /// `d^k`
    pub fn pow(self, k: usize) -> usize {
        self.get().pow(k as u32)
    }

    /// Number of vertices of depth `< n`, i.e. `(d^n - 1)/(d - 1)`.
    pub fn internal_vertices(self, n: usize) -> usize {
        (self.pow(n) - 1) / (self.get() - 1)
    }

    /// Bytes per label in the canonical encoding.
    pub fn label_width(self) -> usize {
        if self.table().len() <= 256 {
            1
        } else {
            2
        }
    }
}

impl TryFrom<usize> for Degree {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Degree::new(d)
    }
}

impl From<Degree> for usize {
    fn from(d: Degree) -> usize {
        d.get()
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A bijection of `{1, ..., d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u8>,
}

impl Perm {
    pub fn identity(d: Degree) -> Self {
        Perm {
            images: (0..d.get() as u8).collect(),
        }
    }

    /// Builds a permutation from 1-based images: `images[i-1]` is the image of `i`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let d = images.len();
        Degree::new(d)?;
        let mut seen = vec![false; d];
        let mut out = Vec::with_capacity(d);
        for &x in images {
            if x == 0 || x > d || seen[x - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection of 1..={d}"
                )));
            }
            seen[x - 1] = true;
            out.push((x - 1) as u8);
        }
        Ok(Perm { images: out })
    }

    /// Builds a permutation from 1-based cycles, e.g. `[[1, 2], [3, 4, 5]]`.
    pub fn from_cycles(d: Degree, cycles: &[Vec<usize>]) -> Result<Self> {
        let n = d.get();
        let mut images: Vec<u8> = (0..n as u8).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for &x in cycle {
                if x == 0 || x > n {
                    return Err(Error::InvalidPermutation(format!("point {x} out of range 1..={n}")));
                }
                if used[x - 1] {
                    return Err(Error::InvalidPermutation(format!("point {x} appears twice")));
                }
                used[x - 1] = true;
            }
            for (i, &x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                images[x - 1] = (y - 1) as u8;
            }
        }
        Ok(Perm { images })
    }

    /// Parses cycle notation such as `(1 2)(3 4 5)` or `()`.
    pub fn parse_cycles(d: Degree, text: &str) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::InvalidPermutation(format!("expected `(` in `{text}`")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::InvalidPermutation(format!("unclosed cycle in `{text}`")))?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::InvalidPermutation(format!("bad point `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !points.is_empty() {
                cycles.push(points);
            }
            rest = body[close + 1..].trim_start();
        }
        Perm::from_cycles(d, &cycles)
    }

    pub fn from_rank(d: Degree, rank: u16) -> Self {
        Perm {
            images: d.table().images(rank).to_vec(),
        }
    }

    pub fn degree(&self) -> Degree {
        Degree(self.images.len() as u8)
    }

    /// Image of the 1-based letter `x`.
    pub fn image(&self, x: usize) -> usize {
        self.images[x - 1] as usize + 1
    }

    /// 0-based image table.
    pub fn raw(&self) -> &[u8] {
        &self.images
    }

    pub fn rank(&self) -> u16 {
        self.degree().table().rank_of(&self.images)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.images.len(), other.images.len());
        Perm {
            images: other.images.iter().map(|&x| self.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0u8; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            out[x as usize] = i as u8;
        }
        Perm { images: out }
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &x)| *i == x as usize)
            .count()
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn order(&self) -> usize {
        self.cycles().iter().map(|c| c.len()).fold(1, num_integer::lcm)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            f.write_str("(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// All `d!` permutations in lexicographic order with the derived lookup
/// tables used by portrait arithmetic.
#[derive(Debug)]
pub struct PermTable {
    degree: usize,
    count: usize,
    images: Vec<u8>,
    inverse: Vec<u16>,
    fixed: Vec<u8>,
    // Full multiplication table when `d! <= 720`.
    mul: Option<Vec<u16>>,
    factorials: Vec<usize>,
}

impl PermTable {
    fn build(d: usize) -> Self {
        let factorials: Vec<usize> = (0..=d)
            .scan(1usize, |acc, k| {
                if k > 0 {
                    *acc *= k;
                }
                Some(*acc)
            })
            .collect();
        let count = factorials[d];
        let mut images = Vec::with_capacity(count * d);
        let mut current: Vec<u8> = (0..d as u8).collect();
        loop {
            images.extend_from_slice(&current);
            if !next_permutation(&mut current) {
                break;
            }
        }
        debug_assert_eq!(images.len(), count * d);
        let mut table = PermTable {
            degree: d,
            count,
            images,
            inverse: Vec::new(),
            fixed: Vec::new(),
            mul: None,
            factorials,
        };
        let mut inverse = Vec::with_capacity(count);
        let mut fixed = Vec::with_capacity(count);
        let mut scratch = vec![0u8; d];
        for r in 0..count {
            let img = table.images(r as u16);
            for (i, &x) in img.iter().enumerate() {
                scratch[x as usize] = i as u8;
            }
            inverse.push(table.rank_of(&scratch));
            fixed.push(img.iter().enumerate().filter(|(i, &x)| *i == x as usize).count() as u8);
        }
        table.inverse = inverse;
        table.fixed = fixed;
        if count <= 720 {
            let mut mul = Vec::with_capacity(count * count);
            for a in 0..count {
                for b in 0..count {
                    let ia = table.images(a as u16);
                    let ib = table.images(b as u16);
                    for (i, &x) in ib.iter().enumerate() {
                        scratch[i] = ia[x as usize];
                    }
                    mul.push(table.rank_of(&scratch));
                }
            }
            table.mul = Some(mul);
        }
        table
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn images(&self, rank: u16) -> &[u8] {
        let r = rank as usize * self.degree;
        &self.images[r..r + self.degree]
    }

    #[inline]
    pub fn image(&self, rank: u16, x: usize) -> usize {
        self.images[rank as usize * self.degree + x] as usize
    }

    #[inline]
    pub fn inverse(&self, rank: u16) -> u16 {
        self.inverse[rank as usize]
    }

    #[inline]
    pub fn fixed_points(&self, rank: u16) -> usize {
        self.fixed[rank as usize] as usize
    }

    /// Rank of `a ∘ b` (apply `b`, then `a`).
    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        match &self.mul {
            Some(table) => table[a as usize * self.count + b as usize],
            None => {
                let ia = self.images(a);
                let ib = self.images(b);
                let mut buf = [0u8; MAX_DEGREE];
                for (i, &x) in ib.iter().enumerate() {
                    buf[i] = ia[x as usize];
                }
                self.rank_of(&buf[..self.degree])
            }
        }
    }

    /// Lexicographic rank via the Lehmer code.
    pub fn rank_of(&self, images: &[u8]) -> u16 {
        let d = self.degree;
        let mut rank = 0usize;
        for i in 0..d {
            let smaller = images[i + 1..].iter().filter(|&&y| y < images[i]).count();
            rank += smaller * self.factorials[d - 1 - i];
        }
        rank as u16
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
