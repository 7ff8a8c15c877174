//! Seeded samplers: the lazy random walk on `π_n(G)` for presented groups
//! and exact Haar sampling for finite-type groups.
//!
//! Samples are split into fixed-size chunks; chunk `j` draws from a ChaCha8
//! stream seeded by the root seed with stream id `j`. Results therefore do
//! not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteTypeSpec, Group};
use crate::perm::Degree;
use crate::portrait::{compose_ranks, fixed_leaf_count, Portrait};

pub(crate) const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub samples: usize,
    /// Steps of the lazy walk per sample; `None` means `16 n`. Ignored by
    /// the direct finite-type sampler.
    pub walk_length: Option<usize>,
    pub seed: u64,
}

impl McParams {
    pub fn new(samples: usize, seed: u64) -> Self {
        McParams {
            samples,
            walk_length: None,
            seed,
        }
    }

    pub fn with_walk_length(mut self, steps: usize) -> Self {
        self.walk_length = Some(steps);
        self
    }

    pub fn walk_for(&self, n: usize) -> usize {
        self.walk_length.unwrap_or(16 * n)
    }
}

/// Runs `f(rng, count)` on every chunk in parallel, in chunk order.
pub(crate) fn run_chunks<T: Send>(samples: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng, usize) -> T + Sync) -> Vec<T> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let count = CHUNK.min(samples - j * CHUNK);
            f(&mut rng, count)
        })
        .collect()
}

/// Generator and inverse portraits used as walk steps.
pub(crate) struct Walker {
    degree: Degree,
    depth: usize,
    steps: Vec<Portrait>,
}

impl Walker {
    pub(crate) fn new(group: &Group, depth: usize) -> Self {
        let gens = group.level_generators(depth);
        let mut steps: Vec<Portrait> = gens.iter().map(|g| g.invert()).collect();
        steps.splice(0..0, gens);
        Walker {
            degree: group.degree(),
            depth,
            steps,
        }
    }

    /// Labels after a lazy walk of `length` steps from the identity.
    pub(crate) fn walk(
        &self,
        rng: &mut ChaCha8Rng,
        length: usize,
        state: &mut Vec<u16>,
        scratch: &mut Vec<u16>,
        img: &mut Vec<usize>,
    ) {
        state.clear();
        state.resize(self.degree.internal_vertices(self.depth), 0);
        scratch.resize(state.len(), 0);
        for _ in 0..length {
            if rng.random::<bool>() || self.steps.is_empty() {
                continue;
            }
            let s = &self.steps[rng.random_range(0..self.steps.len())];
            compose_ranks(self.degree, s.ranks(), state, scratch, img);
            std::mem::swap(state, scratch);
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, class: &[u16]) -> u16 {
    class[rng.random_range(0..class.len())]
}

/// Haar-random labels of a finite-type group down to depth `n`.
pub(crate) fn finite_type_labels(classes: &[Vec<u16>], degree: Degree, n: usize, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let class = &classes[rng.random_range(0..classes.len())];
    (0..degree.internal_vertices(n)).map(|_| uniform(rng, class)).collect()
}

/// Does a Haar-random element fix a vertex of level `n`? Labels are drawn
/// only at vertices on fixed paths, which leaves the distribution exact.
pub(crate) fn finite_type_fixes(classes: &[Vec<u16>], degree: Degree, n: usize, rng: &mut ChaCha8Rng) -> bool {
    let class = &classes[rng.random_range(0..classes.len())];
    fixes_below(class, degree, n, rng)
}

fn fixes_below(class: &[u16], degree: Degree, n: usize, rng: &mut ChaCha8Rng) -> bool {
    if n == 0 {
        return true;
    }
    let t = degree.table();
    let tau = uniform(rng, class);
    let fixed = t.fixed_points(tau);
    (0..fixed).any(|_| fixes_below(class, degree, n - 1, rng))
}

/// One Haar-random depth-`n` portrait of a finite-type group.
pub fn sample_finite_type(spec: &FiniteTypeSpec, n: usize, seed: u64) -> Portrait {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = finite_type_labels(&spec.label_classes(), spec.degree(), n, &mut rng);
    Portrait::from_ranks(spec.degree(), n, labels)
}

/// `samples` random depth-`n` portraits: exact Haar samples for finite-type
/// groups, lazy-walk endpoints for presented groups.
pub fn sample_portraits(group: &Group, n: usize, params: McParams) -> Vec<Portrait> {
    let d = group.degree();
    sample_map(group, n, params, |labels| Portrait::from_ranks(d, n, labels.to_vec()))
}

/// Applies `f` to the labels of every sample, in sample order.
pub(crate) fn sample_map<T: Send>(group: &Group, n: usize, params: McParams, f: impl Fn(&[u16]) -> T + Sync) -> Vec<T> {
    let d = group.degree();
    let chunks = match group {
        Group::FiniteType(spec) => {
            let classes = spec.label_classes();
            run_chunks(params.samples, params.seed, |rng, count| {
                (0..count)
                    .map(|_| f(&finite_type_labels(&classes, d, n, rng)))
                    .collect::<Vec<_>>()
            })
        }
        Group::Presented(_) => {
            let walker = Walker::new(group, n);
            let length = params.walk_for(n);
            run_chunks(params.samples, params.seed, |rng, count| {
                let (mut state, mut scratch, mut img) = (Vec::new(), Vec::new(), Vec::new());
                (0..count)
                    .map(|_| {
                        walker.walk(rng, length, &mut state, &mut scratch, &mut img);
                        f(&state)
                    })
                    .collect::<Vec<_>>()
            })
        }
    };
    chunks.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / N)`.
    pub std_error: f64,
    pub samples: usize,
    pub hits: usize,
}

impl McEstimate {
    pub(crate) fn from_counts(hits: usize, samples: usize) -> Self {
        let p = if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        };
        McEstimate {
            estimate: p,
            std_error: if samples == 0 {
                0.0
            } else {
                (p * (1.0 - p) / samples as f64).sqrt()
            },
            samples,
            hits,
        }
    }
}

/// Monte Carlo estimate of `FPP_n`.
pub fn fpp_mc(group: &Group, n: usize, params: McParams) -> Result<McEstimate> {
    if params.samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let d = group.degree();
    let hits: usize = match group {
        Group::FiniteType(spec) => {
            let classes = spec.label_classes();
            run_chunks(params.samples, params.seed, |rng, count| {
                (0..count).filter(|_| finite_type_fixes(&classes, d, n, rng)).count()
            })
            .into_iter()
            .sum()
        }
        Group::Presented(_) => {
            let walker = Walker::new(group, n);
            let length = params.walk_for(n);
            run_chunks(params.samples, params.seed, |rng, count| {
                let (mut state, mut scratch, mut img) = (Vec::new(), Vec::new(), Vec::new());
                (0..count)
                    .filter(|_| {
                        walker.walk(rng, length, &mut state, &mut scratch, &mut img);
                        fixed_leaf_count(d, n, &state) > 0
                    })
                    .count()
            })
            .into_iter()
            .sum()
        }
    };
    Ok(McEstimate::from_counts(hits, params.samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::PermGroup;

    fn wreath2() -> FiniteTypeSpec {
        FiniteTypeSpec::iterated_wreath(PermGroup::symmetric(Degree::new(2).unwrap()))
    }

    #[test]
    fn zero_length_walk_stays_at_identity() {
        let g = Group::from_presentation(
            crate::engine::GroupPresentation::parse("degree 2\ngen a = (1, 1) (1 2)\n").unwrap(),
        );
        let est = fpp_mc(&g, 3, McParams::new(500, 1).with_walk_length(0)).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn seeds_are_reproducible() {
        let g = Group::FiniteType(wreath2());
        let a = fpp_mc(&g, 4, McParams::new(5000, 9)).unwrap();
        let b = fpp_mc(&g, 4, McParams::new(5000, 9)).unwrap();
        assert_eq!(a, b);
        let c = fpp_mc(&g, 4, McParams::new(5000, 10)).unwrap();
        assert_ne!(a.hits, c.hits);
        assert_eq!(
            sample_finite_type(&wreath2(), 3, 5),
            sample_finite_type(&wreath2(), 3, 5)
        );
    }

    #[test]
    fn chunk_results_do_not_depend_on_pool_size() {
        let g = Group::FiniteType(wreath2());
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample_portraits(&g, 2, McParams::new(3000, 3)));
        let b = four.install(|| sample_portraits(&g, 2, McParams::new(3000, 3)));
        assert_eq!(a, b);
    }
}
