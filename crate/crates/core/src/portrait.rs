//! Depth-`n` truncated tree automorphisms.
//!
//! A portrait stores one label per vertex of depth `< n` in breadth-first
//! order, which for a complete `d`-ary tree is the heap layout: the root is
//! index 0 and the children of index `i` are `d*i + 1 ..= d*i + d`. The first
//! vertex of level `k` sits at `(d^k - 1)/(d - 1)`. Labels are stored as
//! permutation ranks (see [`PermTable`](crate::perm::PermTable)).
//!
//! Products follow the left-action convention: `p.compose(&q)` applies `q`
//! first, so `label_{pq}(v) = label_p(q(v)) ∘ label_q(v)`.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::perm::{Degree, Perm};

const ENCODING_VERSION: u8 = 1;
const HEADER_LEN: usize = 6;

/// A vertex of the tree as a word over the 1-based alphabet `{1, ..., d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Vertex {
    letters: Vec<u8>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex::default()
    }

    pub fn new(letters: &[usize]) -> Result<Self> {
        letters
            .iter()
            .map(|&x| {
                if x == 0 || x > crate::perm::MAX_DEGREE {
                    Err(Error::LetterOutOfRange {
                        letter: x,
                        degree: crate::perm::MAX_DEGREE,
                    })
                } else {
                    Ok(x as u8)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(|letters| Vertex { letters })
    }

    /// The `pos`-th vertex (0-based, left to right) of level `level`.
    pub fn from_level_position(d: Degree, level: usize, mut pos: usize) -> Self {
        let mut letters = vec![0u8; level];
        for slot in letters.iter_mut().rev() {
            *slot = (pos % d.get()) as u8 + 1;
            pos /= d.get();
        }
        Vertex { letters }
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters.iter().map(|&x| x as usize)
    }

    pub fn child(&self, x: usize) -> Vertex {
        let mut letters = self.letters.clone();
        letters.push(x as u8);
        Vertex { letters }
    }

    pub fn check(&self, d: Degree) -> Result<()> {
        match self.letters.iter().find(|&&x| x as usize > d.get()) {
            Some(&x) => Err(Error::LetterOutOfRange {
                letter: x as usize,
                degree: d.get(),
            }),
            None => Ok(()),
        }
    }

    /// Left-to-right position inside its level.
    pub fn level_position(&self, d: Degree) -> usize {
        self.letters.iter().fold(0, |acc, &x| acc * d.get() + (x as usize - 1))
    }

    /// Breadth-first index of the vertex.
    pub fn index(&self, d: Degree) -> usize {
        d.internal_vertices(self.depth()) + self.level_position(d)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Portrait {
    degree: Degree,
    depth: usize,
    labels: Vec<u16>,
}

impl fmt::Debug for Portrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Portrait(d={}, n={}, [", self.degree, self.depth)?;
        for (i, &r) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", Perm::from_rank(self.degree, r))?;
        }
        f.write_str("])")
    }
}

/// Serialized as degree, depth and breadth-first labels in cycle notation.
impl Serialize for Portrait {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let labels: Vec<String> = self
            .labels
            .iter()
            .map(|&r| Perm::from_rank(self.degree, r).to_string())
            .collect();
        let mut st = serializer.serialize_struct("Portrait", 3)?;
        st.serialize_field("degree", &self.degree.get())?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("labels", &labels)?;
        st.end()
    }
}

impl Portrait {
    pub fn identity(degree: Degree, depth: usize) -> Self {
        Portrait {
            degree,
            depth,
            labels: vec![0; degree.internal_vertices(depth)],
        }
    }

    pub fn from_labels(degree: Degree, depth: usize, labels: &[Perm]) -> Result<Self> {
        let expected = degree.internal_vertices(depth);
        if labels.len() != expected {
            return Err(Error::MalformedEncoding(format!(
                "expected {expected} labels for depth {depth}, got {}",
                labels.len()
            )));
        }
        let mut ranks = Vec::with_capacity(expected);
        for p in labels {
            if p.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree.get(),
                    right: p.degree().get(),
                });
            }
            ranks.push(p.rank());
        }
        Ok(Portrait {
            degree,
            depth,
            labels: ranks,
        })
    }

    /// Trusted constructor from permutation ranks.
    pub fn from_ranks(degree: Degree, depth: usize, labels: Vec<u16>) -> Self {
        debug_assert_eq!(labels.len(), degree.internal_vertices(depth));
        Portrait { degree, depth, labels }
    }

    /// The portrait `(c_1, ..., c_d) root`: root label `root`, subtree `x`
    /// carrying `children[x-1]`. All children must share degree and depth.
    pub fn from_root_and_children(root: &Perm, children: &[&Portrait]) -> Result<Self> {
        let degree = root.degree();
        let d = degree.get();
        if children.len() != d {
            return Err(Error::MalformedEncoding(format!(
                "expected {d} children, got {}",
                children.len()
            )));
        }
        let child_depth = children[0].depth;
        for c in children {
            if c.degree != degree {
                return Err(Error::DegreeMismatch {
                    left: d,
                    right: c.degree.get(),
                });
            }
            if c.depth != child_depth {
                return Err(Error::DepthMismatch {
                    left: child_depth,
                    right: c.depth,
                });
            }
        }
        let depth = child_depth + 1;
        let mut labels = vec![0u16; degree.internal_vertices(depth)];
        labels[0] = root.rank();
        for level in 0..child_depth {
            let width = degree.pow(level);
            let src = degree.internal_vertices(level);
            let dst = degree.internal_vertices(level + 1);
            for (x, c) in children.iter().enumerate() {
                labels[dst + x * width..dst + (x + 1) * width].copy_from_slice(&c.labels[src..src + width]);
            }
        }
        Ok(Portrait { degree, depth, labels })
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ranks(&self) -> &[u16] {
        &self.labels
    }

    pub fn root_label(&self) -> Perm {
        if self.depth == 0 {
            Perm::identity(self.degree)
        } else {
            Perm::from_rank(self.degree, self.labels[0])
        }
    }

    pub fn label(&self, v: &Vertex) -> Result<Perm> {
        v.check(self.degree)?;
        if v.depth() >= self.depth {
            return Err(Error::VertexTooDeep {
                vertex_depth: v.depth(),
                depth: self.depth,
            });
        }
        Ok(Perm::from_rank(self.degree, self.labels[v.index(self.degree)]))
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&r| r == 0)
    }

    fn check_compatible(&self, other: &Portrait) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree.get(),
                right: other.degree.get(),
            });
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch {
                left: self.depth,
                right: other.depth,
            });
        }
        Ok(())
    }

    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        v.check(self.degree)?;
        if v.depth() > self.depth {
            return Err(Error::VertexTooDeep {
                vertex_depth: v.depth(),
                depth: self.depth,
            });
        }
        let t = self.degree.table();
        let d = self.degree.get();
        let mut idx = 0usize;
        let mut out = Vec::with_capacity(v.depth());
        for x in v.letters() {
            let x = x - 1;
            out.push(t.image(self.labels[idx], x) as u8 + 1);
            idx = d * idx + 1 + x;
        }
        Ok(Vertex { letters: out })
    }

    /// Product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        self.check_compatible(other)?;
        let mut out = vec![0u16; self.labels.len()];
        let mut img = Vec::new();
        compose_ranks(self.degree, &self.labels, &other.labels, &mut out, &mut img);
        Ok(Portrait {
            degree: self.degree,
            depth: self.depth,
            labels: out,
        })
    }

    pub fn invert(&self) -> Portrait {
        let t = self.degree.table();
        let d = self.degree.get();
        let n = self.labels.len();
        let mut img = vec![0usize; n];
        let mut out = vec![0u16; n];
        for v in 0..n {
            let w = img[v];
            let r = self.labels[v];
            out[w] = t.inverse(r);
            let first_child = d * v + 1;
            if first_child < n {
                for x in 0..d {
                    img[first_child + x] = d * w + 1 + t.image(r, x);
                }
            }
        }
        Portrait {
            degree: self.degree,
            depth: self.depth,
            labels: out,
        }
    }

    /// The depth `n - |v|` portrait of the section at `v`.
    pub fn section(&self, v: &Vertex) -> Result<Portrait> {
        v.check(self.degree)?;
        if v.depth() > self.depth {
            return Err(Error::VertexTooDeep {
                vertex_depth: v.depth(),
                depth: self.depth,
            });
        }
        Ok(self.section_at(v.depth(), v.level_position(self.degree)))
    }

    pub(crate) fn section_at(&self, level: usize, pos: usize) -> Portrait {
        let depth = self.depth - level;
        let mut labels = Vec::with_capacity(self.degree.internal_vertices(depth));
        for j in 0..depth {
            let width = self.degree.pow(j);
            let start = self.degree.internal_vertices(level + j) + pos * width;
            labels.extend_from_slice(&self.labels[start..start + width]);
        }
        Portrait {
            degree: self.degree,
            depth,
            labels,
        }
    }

    pub fn truncate(&self, k: usize) -> Result<Portrait> {
        if k > self.depth {
            return Err(Error::DepthMismatch {
                left: k,
                right: self.depth,
            });
        }
        Ok(Portrait {
            degree: self.degree,
            depth: k,
            labels: self.labels[..self.degree.internal_vertices(k)].to_vec(),
        })
    }

    /// `X_n`: the number of depth-`n` vertices fixed by the portrait.
    pub fn fixed_leaves(&self) -> usize {
        fixed_leaf_count(self.degree, self.depth, &self.labels)
    }

    /// Images of all vertices of `level` (as left-to-right positions).
    pub fn level_action(&self, level: usize) -> Result<Vec<u32>> {
        if level > self.depth {
            return Err(Error::VertexTooDeep {
                vertex_depth: level,
                depth: self.depth,
            });
        }
        let t = self.degree.table();
        let d = self.degree.get();
        let mut current = vec![0u32];
        for k in 0..level {
            let base = self.degree.internal_vertices(k);
            let mut next = vec![0u32; current.len() * d];
            for (pos, &img) in current.iter().enumerate() {
                let r = self.labels[base + pos];
                for x in 0..d {
                    next[pos * d + x] = img * d as u32 + t.image(r, x) as u32;
                }
            }
            current = next;
        }
        Ok(current)
    }

    /// Canonical byte encoding: a 6-byte header (version, degree, depth as
    /// u32 LE) followed by the label body.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.labels.len() * self.degree.label_width());
        out.push(ENCODING_VERSION);
        out.push(self.degree.get() as u8);
        out.extend_from_slice(&(self.depth as u32).to_le_bytes());
        self.write_body(&mut out);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Portrait> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::MalformedEncoding("truncated header".into()));
        }
        if bytes[0] != ENCODING_VERSION {
            return Err(Error::MalformedEncoding(format!("unknown version {}", bytes[0])));
        }
        let degree = Degree::new(bytes[1] as usize).map_err(|e| Error::MalformedEncoding(e.to_string()))?;
        let depth = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
        if depth > 64 {
            return Err(Error::MalformedEncoding(format!("implausible depth {depth}")));
        }
        Portrait::from_body(degree, depth, &bytes[HEADER_LEN..])
    }

    /// Fixed-width label indices, big-endian when two bytes wide.
    pub fn write_body(&self, out: &mut Vec<u8>) {
        match self.degree.label_width() {
            1 => out.extend(self.labels.iter().map(|&r| r as u8)),
            _ => {
                for &r in &self.labels {
                    out.extend_from_slice(&r.to_be_bytes());
                }
            }
        }
    }

    pub fn body(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.labels.len() * self.degree.label_width());
        self.write_body(&mut out);
        out
    }

    pub fn from_body(degree: Degree, depth: usize, body: &[u8]) -> Result<Portrait> {
        let n = degree.internal_vertices(depth);
        let w = degree.label_width();
        if body.len() != n * w {
            return Err(Error::MalformedEncoding(format!(
                "body has {} bytes, expected {}",
                body.len(),
                n * w
            )));
        }
        let count = degree.table().len();
        let labels: Vec<u16> = if w == 1 {
            body.iter().map(|&b| b as u16).collect()
        } else {
            body.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        };
        if let Some(bad) = labels.iter().find(|&&r| r as usize >= count) {
            return Err(Error::MalformedEncoding(format!("label index {bad} out of range")));
        }
        Ok(Portrait { degree, depth, labels })
    }
}

/// `out = p · q` on raw rank slices. `img` is scratch space.
pub(crate) fn compose_ranks(degree: Degree, p: &[u16], q: &[u16], out: &mut [u16], img: &mut Vec<usize>) {
    let t = degree.table();
    let d = degree.get();
    let n = q.len();
    img.clear();
    img.resize(n, 0);
    for v in 0..n {
        let w = img[v];
        let r = q[v];
        out[v] = t.mul(p[w], r);
        let first_child = d * v + 1;
        if first_child < n {
            for x in 0..d {
                img[first_child + x] = d * w + 1 + t.image(r, x);
            }
        }
    }
}

pub(crate) fn fixed_leaf_count(degree: Degree, depth: usize, labels: &[u16]) -> usize {
    if depth == 0 {
        return 1;
    }
    let t = degree.table();
    let d = degree.get();
    let mut count = 0;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((v, k)) = stack.pop() {
        let r = labels[v];
        if k + 1 == depth {
            count += t.fixed_points(r);
            continue;
        }
        for x in 0..d {
            if t.image(r, x) == x {
                stack.push((d * v + 1 + x, k + 1));
            }
        }
    }
    count
}

/// Number of fixed vertices at each level `0..=depth`.
pub(crate) fn fixed_counts_by_level(degree: Degree, depth: usize, labels: &[u16]) -> Vec<usize> {
    let t = degree.table();
    let d = degree.get();
    let mut counts = vec![0usize; depth + 1];
    counts[0] = 1;
    let mut level = vec![0usize];
    for k in 0..depth {
        let mut next = Vec::new();
        for &v in &level {
            let r = labels[v];
            for x in 0..d {
                if t.image(r, x) == x {
                    next.push(d * v + 1 + x);
                }
            }
        }
        counts[k + 1] = next.len();
        level = next;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Degree {
        Degree::new(n).unwrap()
    }

    fn swap() -> Perm {
        Perm::parse_cycles(d(2), "(1 2)").unwrap()
    }

    /// a = (1,1)σ as a portrait of the given depth.
    fn rooted_swap(depth: usize) -> Portrait {
        let mut p = Portrait::identity(d(2), depth);
        p.labels[0] = swap().rank();
        p
    }

    #[test]
    fn identity_portrait_shape() {
        let p = Portrait::identity(d(2), 3);
        assert_eq!(p.ranks().len(), 7);
        assert_eq!(p.fixed_leaves(), 8);
        assert_eq!(Portrait::identity(d(3), 0).ranks().len(), 0);
        assert_eq!(Portrait::identity(d(3), 0).fixed_leaves(), 1);
    }

    #[test]
    fn rooted_swap_action() {
        let a = rooted_swap(2);
        let v = Vertex::new(&[1, 1]).unwrap();
        assert_eq!(a.apply(&v).unwrap(), Vertex::new(&[2, 1]).unwrap());
        assert_eq!(a.compose(&a).unwrap(), Portrait::identity(d(2), 2));
        assert_eq!(a.invert(), a);
        for n in 1..6 {
            assert_eq!(rooted_swap(n).fixed_leaves(), 0);
        }
    }

    #[test]
    fn apply_rejects_deep_vertex() {
        let p = Portrait::identity(d(2), 1);
        let v = Vertex::new(&[1, 2]).unwrap();
        assert!(matches!(p.apply(&v), Err(Error::VertexTooDeep { .. })));
        assert!(matches!(p.section(&v), Err(Error::VertexTooDeep { .. })));
        let bad = Vertex::new(&[3]).unwrap();
        assert!(matches!(p.apply(&bad), Err(Error::LetterOutOfRange { .. })));
    }

    #[test]
    fn compose_rejects_mismatch() {
        let p = Portrait::identity(d(2), 2);
        assert!(matches!(
            p.compose(&Portrait::identity(d(2), 3)),
            Err(Error::DepthMismatch { .. })
        ));
        assert!(matches!(
            p.compose(&Portrait::identity(d(3), 2)),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn children_assembly_and_section() {
        let a = rooted_swap(1);
        let e = Portrait::identity(d(2), 1);
        // b = (a, e) at depth 2
        let b = Portrait::from_root_and_children(&Perm::identity(d(2)), &[&a, &e]).unwrap();
        assert_eq!(b.section(&Vertex::new(&[1]).unwrap()).unwrap(), a);
        assert_eq!(b.section(&Vertex::new(&[2]).unwrap()).unwrap(), e);
        assert_eq!(b.fixed_leaves(), 2);
        assert_eq!(b.section(&Vertex::root()).unwrap(), b);
    }

    #[test]
    fn level_action_matches_apply() {
        let t3 = d(3);
        let labels: Vec<u16> = (0..13).map(|i| (i * 5 % 6) as u16).collect();
        let p = Portrait::from_ranks(t3, 3, labels);
        let action = p.level_action(3).unwrap();
        for (pos, &image) in action.iter().enumerate() {
            let v = Vertex::from_level_position(t3, 3, pos);
            let w = p.apply(&v).unwrap();
            assert_eq!(image as usize, w.level_position(t3));
        }
    }

    #[test]
    fn encoding_is_stable() {
        let a = rooted_swap(2);
        assert_eq!(a.encode(), vec![1, 2, 2, 0, 0, 0, 1, 0, 0]);
        assert_eq!(Portrait::decode(&a.encode()).unwrap(), a);
        assert!(Portrait::decode(&[1, 2, 2, 0, 0, 0, 1, 0]).is_err());
        assert!(Portrait::decode(&[9, 2, 2, 0, 0, 0, 1, 0, 0]).is_err());
        assert!(Portrait::decode(&[1, 2, 1, 0, 0, 0, 7]).is_err());
    }

    #[test]
    fn wide_labels_round_trip() {
        let t6 = d(6);
        let p = Portrait::from_ranks(t6, 2, (0..7).map(|i| 100 * i as u16).collect());
        assert_eq!(t6.label_width(), 2);
        assert_eq!(Portrait::decode(&p.encode()).unwrap(), p);
    }
}
