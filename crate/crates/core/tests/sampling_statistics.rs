use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use treefpp::fpp::{
    conditional_fixation, fpp_exact, fpp_finite_type_recursion, fpp_mc, sample_finite_type, sample_portraits,
    ConditionalMethod, Evaluation, McParams,
};
use treefpp::zoo::build_zoo_group;
use treefpp::{enumerate_quotient, Degree, Group, Portrait};

fn tv_from_uniform(group: &Group, n: usize, samples: &[Portrait]) -> f64 {
    let q = enumerate_quotient(group, n, 100_000).unwrap();
    let mut counts = vec![0usize; q.order()];
    for p in samples {
        counts[q.index_of(p).expect("sample outside the quotient")] += 1;
    }
    let u = 1.0 / q.order() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 / samples.len() as f64 - u).abs())
        .sum::<f64>()
        / 2.0
}

/// Distribution of the lazy walk after `steps` steps, by iterating the
/// transition matrix on the quotient.
fn walk_distribution_tv(group: &Group, n: usize, steps: usize) -> f64 {
    let q = enumerate_quotient(group, n, 100_000).unwrap();
    let mut moves: Vec<Portrait> = group.level_generators(n);
    moves.extend(group.level_generators(n).iter().map(Portrait::invert));
    let table: Vec<Vec<usize>> = moves
        .iter()
        .map(|s| {
            (0..q.order())
                .map(|i| q.index_of(&s.compose(&q.element(i)).unwrap()).unwrap())
                .collect()
        })
        .collect();
    let mut dist = vec![0.0; q.order()];
    dist[q.index_of(&Portrait::identity(group.degree(), n)).unwrap()] = 1.0;
    for _ in 0..steps {
        let mut next = vec![0.0; q.order()];
        for (i, &p) in dist.iter().enumerate() {
            next[i] += p / 2.0;
            for t in &table {
                next[t[i]] += p / 2.0 / table.len() as f64;
            }
        }
        dist = next;
    }
    let u = 1.0 / q.order() as f64;
    dist.iter().map(|p| (p - u).abs()).sum::<f64>() / 2.0
}

#[test]
fn direct_wreath_sampler_is_uniform() {
    let g = build_zoo_group("wreath:sym2").unwrap().group;
    let samples = sample_portraits(&g, 2, McParams::new(80_000, 7));
    assert!(tv_from_uniform(&g, 2, &samples) <= 0.02);
}

#[test]
fn coset_sampler_respects_cosets_and_is_uniform_at_level_one() {
    let entry = build_zoo_group("coset:alt3-sym3").unwrap();
    let spec = entry.group.finite_type().unwrap().clone();
    let d = Degree::new(3).unwrap();
    let t = d.table();
    let mut counts: HashMap<u16, usize> = HashMap::new();
    let draws = 60_000;
    for seed in 0..draws {
        let p = sample_finite_type(&spec, 1, seed);
        *counts.entry(p.ranks()[0]).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let sigma = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    for &c in counts.values() {
        assert!((c as f64 - draws as f64 / 6.0).abs() <= 4.0 * sigma);
    }
    let even = |r: u16| t.fixed_points(r) != 1;
    for seed in 0..2000 {
        let p = sample_finite_type(&spec, 2, seed);
        let root = even(p.ranks()[0]);
        assert!(p.ranks().iter().all(|&r| even(r) == root));
    }
}

#[test]
fn coset_mc_agrees_with_recursion_at_level_eight() {
    let g = build_zoo_group("coset:alt3-sym3").unwrap().group;
    let est = fpp_mc(&g, 8, McParams::new(60_000, 2024)).unwrap();
    let rec = fpp_finite_type_recursion(g.finite_type().unwrap(), 8);
    let exact = rec[7].value.approx();
    assert!(
        (est.estimate - exact).abs() <= 3.0 * est.std_error,
        "{est:?} vs {exact}"
    );
}

#[test]
fn lazy_walk_mixes_on_grigorchuk_given_enough_steps() {
    let g = build_zoo_group("grigorchuk").unwrap().group;
    let samples = sample_portraits(&g, 3, McParams::new(50_000, 42).with_walk_length(256));
    assert!(tv_from_uniform(&g, 3, &samples) <= 0.05);
    let exact = fpp_exact(&g, 3, 1000).unwrap().to_f64().unwrap();
    let est = fpp_mc(&g, 3, McParams::new(50_000, 42).with_walk_length(256)).unwrap();
    assert!((est.estimate - exact).abs() <= 3.0 * est.std_error);
}

/// The walk itself is still far from uniform after 64 steps.
#[test]
fn lazy_walk_distance_by_transition_matrix() {
    let g = build_zoo_group("grigorchuk").unwrap().group;
    let tv64 = walk_distribution_tv(&g, 3, 64);
    let tv128 = walk_distribution_tv(&g, 3, 128);
    assert!((0.16..0.17).contains(&tv64), "{tv64}");
    assert!(tv128 < 0.05, "{tv128}");
}

#[test]
fn mc_matches_exact_for_finite_type_groups() {
    let g = build_zoo_group("wreath:sym3").unwrap().group;
    let exact = fpp_exact(&g, 2, 100_000).unwrap().to_f64().unwrap();
    let est = fpp_mc(&g, 2, McParams::new(40_000, 5)).unwrap();
    assert!((est.estimate - exact).abs() <= 3.0 * est.std_error);
}

#[test]
fn conditional_bound_for_exceptional_img_by_sampling() {
    let g = build_zoo_group("exceptional:d=3").unwrap().group;
    let eval = Evaluation::Auto {
        element_limit: 100_000,
        mc: Some(McParams::new(40_000, 11)),
    };
    let rep = conditional_fixation(&g, 2, 1, 1, eval).unwrap();
    assert_eq!(rep.method, ConditionalMethod::MonteCarlo);
    assert_eq!(rep.quotient_order_m, 6);
    assert_eq!(rep.bound, BigRational::new(5.into(), 6.into()));
    assert!(rep.within_bound, "{rep:?}");
}

#[test]
fn conditional_bound_holds_exactly_on_grigorchuk() {
    let g = build_zoo_group("grigorchuk").unwrap().group;
    // m = ceil(log_2 r) + 1
    for (n, r, m) in [(1, 2, 2), (2, 2, 2)] {
        let rep = conditional_fixation(
            &g,
            n,
            m,
            r,
            Evaluation::Exact {
                element_limit: 5_000_000,
            },
        )
        .unwrap();
        assert!(rep.within_bound, "n={n} r={r}: {rep:?}");
        let v = rep.exact.unwrap();
        assert!(v >= BigRational::from_integer(0.into()) && v <= BigRational::from_integer(1.into()));
    }
}
