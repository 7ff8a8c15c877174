//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so every line is printed; the process fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use clap::Parser;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use treefpp::fpp::{
    conditional_fixation, cylinder_independence_check, fpp_exact, fpp_finite_type_recursion, fpp_mc, sample_portraits,
    Evaluation, McParams,
};
use treefpp::nucleus::{
    check_jones_condition, compute_nucleus, fixed_boundary_count, EndCount, JonesConfig, JonesVerdict, NucleusCaps,
    NucleusReport, NucleusStatus,
};
use treefpp::quotient::{check_fractality, check_martingale_condition, is_level_transitive, FractalProperty};
use treefpp::zoo::{build_zoo_group, exceptional_parameter, hyperbolicity_chi, product_of_generators_transitive, Nu};
use treefpp::{enumerate_quotient, Engine, Equality, EqualityCaps, Error, Group, Portrait, Vertex, Word};
use treefpp_cli::args::Cli;
use treefpp_cli::run_report;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn group(key: &str) -> Group {
    build_zoo_group(key).unwrap().group
}

fn chebyshev_quarter() -> Outcome {
    let g = group("chebyshev2");
    let values: Vec<BigRational> = (1..=12).map(|n| fpp_exact(&g, n, 5_000_000).unwrap()).collect();
    let quarter = r(1, 4);
    ensure(values.windows(2).all(|w| w[1] <= w[0]), "series increases")?;
    ensure(values.iter().all(|v| *v >= quarter), "value below 1/4")?;
    let gap = (&values[11] - &quarter).to_f64().unwrap();
    ensure(gap <= 0.05, format!("FPP12 - 1/4 = {gap}"))?;
    Ok(format!("FPP12 = {}", values[11]))
}

fn coset_half() -> Outcome {
    let g = group("coset:alt3-sym3");
    let spec = g.finite_type().unwrap();
    let rec = fpp_finite_type_recursion(spec, 100);
    let half = r(1, 2);
    ensure(
        rec.windows(2).all(|w| w[1].value.hi() <= w[0].value.lo()),
        "series not certified non-increasing",
    )?;
    ensure(rec.iter().all(|v| *v.value.lo() >= half), "value below 1/2")?;
    let gap = (rec[99].value.hi() - &half).to_f64().unwrap();
    ensure(gap <= 0.02, format!("p100 - 1/2 <= {gap}"))?;

    let classes = spec.label_classes();
    let even = classes.iter().position(|c| c.contains(&0)).unwrap();
    let odd = 1 - even;
    ensure(
        rec.iter()
            .all(|v| v.classes[odd].lo().is_one() && v.classes[odd].hi().is_one()),
        "odd channel is not constantly 1",
    )?;
    ensure(rec[1].classes[even].exact() == Some(&r(19, 81)), "even q2 != 19/81")?;

    let est = fpp_mc(&g, 8, McParams::new(60_000, 2024)).unwrap();
    let exact = rec[7].value.approx();
    ensure(
        (est.estimate - exact).abs() <= 3.0 * est.std_error,
        format!("MC {} vs {exact}", est.estimate),
    )?;
    Ok(format!(
        "p100 in [{:.6}, {:.6}], MC(8) {:.4} +- {:.4} vs {exact:.4}",
        rec[99].value.lo().to_f64().unwrap(),
        rec[99].value.hi().to_f64().unwrap(),
        est.estimate,
        est.std_error
    ))
}

fn wreath_oracle() -> Outcome {
    let g = group("wreath:sym2");
    let d = g.degree();
    let mut fixing = 0;
    for mask in 0u32..128 {
        let labels: Vec<u16> = (0..7).map(|i| ((mask >> i) & 1) as u16).collect();
        if Portrait::from_ranks(d, 3, labels).fixed_leaves() > 0 {
            fixing += 1;
        }
    }
    let brute = r(fixing, 128);
    ensure(brute == r(39, 128), format!("brute force gives {brute}"))?;
    ensure(fpp_exact(&g, 3, 1000).unwrap() == brute, "enumeration differs")?;
    let rec = fpp_finite_type_recursion(g.finite_type().unwrap(), 3);
    ensure(rec[2].value.exact() == Some(&brute), "recursion differs")?;
    Ok("39/128".into())
}

fn contains_all(engine: &Engine, report: &NucleusReport, expected: &[Word]) -> bool {
    let caps = EqualityCaps::default();
    report.elements.len() == expected.len()
        && expected.iter().all(|w| {
            report
                .elements
                .iter()
                .any(|e| engine.equal_elements(&e.word, w, caps) == Equality::Equal)
        })
}

fn nucleus_golden() -> Outcome {
    let mut failures = Vec::new();
    for key in ["basilica", "ob"] {
        let g = group(key);
        let e = g.engine().unwrap();
        let rep = compute_nucleus(&g, NucleusCaps::default()).unwrap();
        // Products are listed for the opposite composition order; reverse them.
        let expected: Vec<Word> = ["1", "a", "b", "a^-1", "b^-1", "a^-1 b", "b^-1 a"]
            .iter()
            .map(|t| {
                let mut l = e.presentation().parse_word(t).unwrap().letters().to_vec();
                l.reverse();
                Word::from_letters(l)
            })
            .collect();
        if rep.status != NucleusStatus::ContractingWithNucleus || !contains_all(e, &rep, &expected) {
            failures.push(format!("{key} nucleus"));
        }
        if key == "ob" {
            let n1: Vec<&str> = rep.n1.iter().map(|x| rep.elements[x.element].text.as_str()).collect();
            if n1 != ["1"] {
                failures.push(format!("N1(ob) = {n1:?}"));
            }
            if check_jones_condition(&g, JonesConfig::default()).unwrap().verdict != JonesVerdict::Holds {
                failures.push("jones(ob) does not hold".into());
            }
        }
    }

    let g = group("ggs:p=3,alpha=1.2");
    let e = g.engine().unwrap();
    let rep = compute_nucleus(&g, NucleusCaps::default()).unwrap();
    let mut expected = Vec::new();
    for i in 0..3 {
        expected.push(format!("a^{i}"));
    }
    for i in 1..3 {
        for j in 0..3 {
            expected.push(format!("a^{j} b^{i} a^-{j}"));
        }
    }
    let expected: Vec<Word> = expected
        .iter()
        .map(|t| e.presentation().parse_word(t).unwrap())
        .collect();
    if !contains_all(e, &rep, &expected) {
        let got: Vec<&str> = rep.elements.iter().map(|x| x.text.as_str()).collect();
        failures.push(format!("GGS nucleus has {} elements {got:?}, expected 9", got.len()));
    }
    let b = rep.index_of_text("b").unwrap();
    if !rep.n1.iter().any(|x| x.element == b) {
        failures.push("b not in N1".into());
    }
    if fixed_boundary_count(&rep, b).unwrap().classification != EndCount::Finite(1) {
        failures.push("fixed ends of b != Finite(1)".into());
    }
    match check_jones_condition(&g, JonesConfig::default()).unwrap().verdict {
        JonesVerdict::FailsWithWitness { witness, .. } if witness == "b" => {}
        other => failures.push(format!("GGS jones verdict {other:?}")),
    }
    if failures.is_empty() {
        Ok("basilica, ob, ggs".into())
    } else {
        Err(failures.join("; "))
    }
}

fn exceptional_family() -> Outcome {
    let mut notes = Vec::new();
    for d in [3usize, 4] {
        let g = group(&format!("exceptional:d={d}"));
        ensure(
            is_level_transitive(&g, 5).unwrap().transitive,
            format!("d={d}: not level-transitive"),
        )?;
        for n in 1..=5 {
            ensure(
                product_of_generators_transitive(&g, n).unwrap(),
                format!("d={d}: generator product not a single cycle on level {n}"),
            )?;
        }
        let ssf = check_fractality(&g, FractalProperty::SuperStronglyFractal, 2, 1, 5_000_000).unwrap();
        ensure(ssf.passed(), format!("d={d}: ssf check fails"))?;
        ensure(
            check_martingale_condition(&g, 3, 5_000_000).unwrap().holds,
            format!("d={d}: martingale check fails"),
        )?;
        let mut series = Vec::new();
        for n in 1.. {
            match fpp_exact(&g, n, 5_000_000) {
                Ok(v) => series.push(v),
                Err(Error::LimitExceeded { .. }) => break,
                Err(e) => return Err(e.to_string()),
            }
        }
        ensure(series.len() >= 2, format!("d={d}: fewer than two enumerable levels"))?;
        ensure(
            series.windows(2).all(|w| w[1] < w[0]),
            format!("d={d}: series not strictly decreasing"),
        )?;
        if d == 3 {
            ensure(series[0] == r(2, 3), "d=3: FPP1 != 2/3")?;
        }
        for branch in 0..d - 1 {
            let res = exceptional_parameter(d, branch).unwrap().residuals().max();
            ensure(res <= 1e-9, format!("d={d} branch {branch}: residual {res}"))?;
        }
        let chi = hyperbolicity_chi(&[Nu::Finite(d as u64 - 1), Nu::Infinite, Nu::Infinite]).unwrap();
        ensure(
            chi == r(-(d as i64 - 2), d as i64 - 1) && chi < BigRational::zero(),
            format!("d={d}: chi = {chi}"),
        )?;
        let text: Vec<String> = series.iter().map(|v| v.to_string()).collect();
        notes.push(format!("d={d}: {}", text.join(" > ")));
    }
    Ok(notes.join("; "))
}

fn singletons(g: &Group, n: usize) -> Vec<Portrait> {
    enumerate_quotient(g, n, 1_000_000).unwrap().iter().collect()
}

fn section_machinery() -> Outcome {
    let mut checks = 0;
    for key in ["grigorchuk", "basilica"] {
        let g = group(key);
        let d = g.degree();
        for (n, m) in [(1, 1), (1, 2), (2, 1)] {
            let a_set = singletons(&g, n);
            let b_set = singletons(&g, m);
            for pos in 0..d.pow(n) {
                let v = Vertex::from_level_position(d, n, pos);
                for a in &a_set {
                    for b in &b_set {
                        let rep = cylinder_independence_check(
                            &g,
                            n,
                            m,
                            &v,
                            std::slice::from_ref(a),
                            std::slice::from_ref(b),
                            1_000_000,
                        )
                        .unwrap();
                        ensure(
                            rep.lhs == rep.rhs,
                            format!("{key} ({n},{m}) at {v:?}: {} != {}", rep.lhs, rep.rhs),
                        )?;
                        checks += 1;
                    }
                }
            }
        }
    }
    let g = group("grigorchuk");
    match conditional_fixation(
        &g,
        2,
        1,
        1,
        Evaluation::Exact {
            element_limit: 1_000_000,
        },
    ) {
        Ok(rep) => {
            ensure(
                rep.exact.as_ref().is_some_and(|v| *v <= r(1, 2)),
                format!("conditional = {:?}", rep.exact),
            )?;
            Ok(format!(
                "{checks} independence cases exact; conditional {:?} <= 1/2",
                rep.exact
            ))
        }
        Err(e) => Err(format!(
            "{checks} independence cases exact; conditional r=1 on grigorchuk: {e} (X_2 is always even)"
        )),
    }
}

fn tv_from_uniform(g: &Group, n: usize, samples: &[Portrait]) -> f64 {
    let q = enumerate_quotient(g, n, 100_000).unwrap();
    let mut counts = vec![0usize; q.order()];
    for p in samples {
        counts[q.index_of(p).unwrap()] += 1;
    }
    let u = 1.0 / q.order() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 / samples.len() as f64 - u).abs())
        .sum::<f64>()
        / 2.0
}

fn enumeration_and_samplers() -> Outcome {
    let g = group("grigorchuk");
    let order = enumerate_quotient(&g, 3, 1000).unwrap().order();
    ensure(order == 128, format!("|pi_3| = {order}"))?;
    let w = group("wreath:sym2");
    let direct = tv_from_uniform(&w, 2, &sample_portraits(&w, 2, McParams::new(80_000, 7)));
    ensure(direct <= 0.02, format!("direct TV {direct}"))?;
    let walk = tv_from_uniform(
        &g,
        3,
        &sample_portraits(&g, 3, McParams::new(50_000, 42).with_walk_length(64)),
    );
    ensure(
        walk <= 0.05,
        format!("|pi_3| = 128, direct TV {direct:.4}, lazy walk (64 steps) TV {walk:.4} > 0.05"),
    )?;
    Ok(format!("|pi_3| = 128, direct TV {direct:.4}, lazy walk TV {walk:.4}"))
}

fn fingerprint_determinism() -> Outcome {
    let configs: [&[&str]; 2] = [
        &[
            "treefpp",
            "fpp",
            "--group",
            "grigorchuk",
            "--max-level",
            "4",
            "--mode",
            "mc",
            "--samples",
            "20000",
            "--seed",
            "17",
        ],
        &[
            "treefpp",
            "fpp",
            "--group",
            "coset:alt3-sym3",
            "--max-level",
            "9",
            "--mode",
            "mc",
            "--samples",
            "20000",
            "--seed",
            "17",
        ],
    ];
    for args in configs {
        let mut prints = Vec::new();
        for threads in ["1", "4", "8"] {
            let mut argv = args.to_vec();
            argv.extend(["--threads", threads]);
            let cli = Cli::try_parse_from(argv).unwrap();
            prints.push(run_report(&cli).unwrap().fingerprint);
        }
        ensure(
            prints.iter().all(|p| *p == prints[0]),
            format!("{} differ: {prints:?}", args[3]),
        )?;
    }
    Ok("identical fingerprints on 1, 4 and 8 threads".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "chebyshev FPP tends to 1/4", chebyshev_quarter),
        (2, "coset finite-type FPP tends to 1/2", coset_half),
        (3, "wreath brute-force oracle", wreath_oracle),
        (4, "nucleus golden values", nucleus_golden),
        (5, "exceptional IMG family", exceptional_family),
        (6, "independence and conditional fixation", section_machinery),
        (7, "enumeration and sampler validation", enumeration_and_samplers),
        (8, "fingerprint determinism across threads", fingerprint_determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS [{secs:.2}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL [{secs:.2}s] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
