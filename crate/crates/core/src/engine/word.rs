use serde::{Deserialize, Serialize};

/// One signed generator occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A product of generators and their inverses. `[l1, l2, ..., lk]` denotes
/// `l1 · l2 ⋯ lk`, which acts by `lk` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![Letter::new(index, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.iter().copied().cycle().take(self.len() * k).collect())
    }

    /// Cancels adjacent `x x^-1` pairs.
    pub fn freely_reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub(crate) fn into_letters(self) -> Vec<Letter> {
        self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Normal form used for dedup: adjacent powers of one generator are merged
/// and exponents reduced modulo known generator orders into the balanced
/// range `(-o/2, o/2]`.
#[derive(Debug, Clone, Default)]
pub struct Reducer {
    orders: Vec<Option<u32>>,
}

impl Reducer {
    pub fn new(generators: usize) -> Self {
        Reducer {
            orders: vec![None; generators],
        }
    }

    pub fn set_order(&mut self, generator: usize, order: u32) {
        self.orders[generator] = Some(order);
    }

    pub fn order(&self, generator: usize) -> Option<u32> {
        self.orders[generator]
    }

    fn reduce_exp(&self, generator: usize, e: i64) -> i64 {
        match self.orders[generator] {
            Some(o) => {
                let o = o as i64;
                let mut r = e.rem_euclid(o);
                if r > o / 2 {
                    r -= o;
                }
                r
            }
            None => e,
        }
    }

    fn runs(&self, w: &Word) -> Vec<(usize, i64)> {
        let mut stack: Vec<(usize, i64)> = Vec::new();
        for l in w.letters() {
            let e = if l.inverse { -1 } else { 1 };
            push_run(&mut stack, (l.generator, e), |g, e| self.reduce_exp(g, e));
        }
        stack
    }

    pub fn normalize(&self, w: &Word) -> Word {
        expand(&self.runs(w))
    }

    /// Normal form of the conjugacy-invariant rotation class: cyclically
    /// reduced, then the lexicographically least rotation at run boundaries.
    pub fn cyclic_normalize(&self, w: &Word) -> Word {
        let mut runs = self.runs(w);
        while runs.len() >= 2 && runs[0].0 == runs[runs.len() - 1].0 {
            let (g, e1) = runs.pop().unwrap();
            let e = self.reduce_exp(g, runs[0].1 + e1);
            if e == 0 {
                runs.remove(0);
            } else {
                runs[0].1 = e;
            }
        }
        if runs.len() <= 1 {
            return expand(&runs);
        }
        let n = runs.len();
        let best = (0..n)
            .min_by(|&a, &b| (0..n).map(|i| runs[(a + i) % n]).cmp((0..n).map(|i| runs[(b + i) % n])))
            .unwrap();
        runs.rotate_left(best);
        expand(&runs)
    }
}

fn push_run(stack: &mut Vec<(usize, i64)>, run: (usize, i64), reduce: impl Fn(usize, i64) -> i64) {
    let (g, e) = run;
    let e = reduce(g, e);
    if e == 0 {
        return;
    }
    if let Some(top) = stack.last_mut() {
        if top.0 == g {
            let merged = reduce(g, top.1 + e);
            if merged == 0 {
                stack.pop();
            } else {
                top.1 = merged;
            }
            return;
        }
    }
    stack.push((g, e));
}

fn expand(runs: &[(usize, i64)]) -> Word {
    let mut out = Vec::new();
    for &(g, e) in runs {
        let l = Letter::new(g, e < 0);
        for _ in 0..e.unsigned_abs() {
            out.push(l);
        }
    }
    Word(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(spec: &[(usize, bool)]) -> Word {
        Word(spec.iter().map(|&(g, i)| Letter::new(g, i)).collect())
    }

    #[test]
    fn free_reduction() {
        let x = w(&[(0, false), (1, false), (1, true), (0, true), (2, false)]);
        assert_eq!(x.freely_reduced(), w(&[(2, false)]));
        assert_eq!(x.inverse().inverse(), x);
    }

    #[test]
    fn order_reduction() {
        let mut r = Reducer::new(2);
        r.set_order(0, 3);
        // a a -> a^-1
        assert_eq!(r.normalize(&w(&[(0, false), (0, false)])), w(&[(0, true)]));
        // a a a b -> b
        assert_eq!(
            r.normalize(&w(&[(0, false), (0, false), (0, false), (1, false)])),
            w(&[(1, false)])
        );
        // a b b^-1 a -> a^-1
        assert_eq!(
            r.normalize(&w(&[(0, false), (1, false), (1, true), (0, false)])),
            w(&[(0, true)])
        );
        r.set_order(1, 2);
        assert_eq!(r.normalize(&w(&[(1, true)])), w(&[(1, false)]));
    }

    #[test]
    fn cyclic_normal_form_is_rotation_invariant() {
        let r = Reducer::new(3);
        let x = w(&[(0, false), (1, false), (2, true), (1, false)]);
        let mut rotated = x.letters().to_vec();
        rotated.rotate_left(2);
        assert_eq!(r.cyclic_normalize(&x), r.cyclic_normalize(&Word(rotated)));
        // a b a^-1 is conjugate to b
        let conj = w(&[(0, false), (1, false), (0, true)]);
        assert_eq!(r.cyclic_normalize(&conj), w(&[(1, false)]));
    }
}
