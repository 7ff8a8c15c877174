//! `treefpp` command-line front end: argument handling, dispatch to the core
//! library, JSON/CSV reports and the quotient cache.

pub mod args;
pub mod cache;
pub mod report;

use std::path::Path;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};
use treefpp::fpp::{
    conditional_fixation, cylinder_independence_check, fpp_report_with, sample_portraits, xn_distribution, Evaluation,
    FppConfig, FppMode, McParams,
};
use treefpp::nucleus::{check_jones_condition, compute_nucleus, JonesConfig, JonesVerdict, NucleusCaps, NucleusStatus};
use treefpp::quotient::{
    check_fractality_with, check_martingale_condition_with, is_level_transitive, CheckRoute, FractalProperty,
};
use treefpp::zoo::{build_zoo_group, ZooEntry, ZOO_CATALOG};
use treefpp::{enumerate_quotient, EqualityCaps, Group, Perm, Portrait, Vertex};

use args::*;
pub use cache::QuotientCache;
pub use report::{fingerprint, write_csv, Report, SCHEMA};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] treefpp::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use treefpp::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) | CliError::Core(E::Io(_)) => "io",
            CliError::Json(_) | CliError::Csv(_) => "output",
            CliError::Core(e) => match e {
                E::LimitExceeded { .. } => "limit_exceeded",
                E::InvalidParameter(_) => "invalid_parameter",
                E::EmptyCondition => "empty_condition",
                E::NeedsGenerators => "needs_generators",
                E::Syntax { .. } | E::UndeclaredGenerator(_) | E::SectionCount { .. } | E::DuplicateGenerator(_) => {
                    "presentation"
                }
                E::Cache(_) => "cache",
                _ => "error",
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Results of one command, before they are wrapped into a [`Report`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub group: Option<Value>,
    pub results: Value,
    pub inconclusive: bool,
    /// FPP series for CSV output.
    pub series: Option<treefpp::fpp::FppSeries>,
}

fn equality_caps(l: &Limits) -> EqualityCaps {
    EqualityCaps {
        depth_cap: l.depth_cap,
        pair_cap: l.pair_cap,
    }
}

fn nucleus_caps(l: &Limits) -> NucleusCaps {
    NucleusCaps {
        depth_cap: l.depth_cap,
        pair_cap: l.pair_cap,
        equality: equality_caps(l),
    }
}

fn mc_params(s: &Sampling) -> Option<McParams> {
    s.seed.map(|seed| McParams {
        samples: s.samples,
        walk_length: s.walk_length,
        seed,
    })
}

fn require_seed(s: &Sampling) -> CliResult<McParams> {
    mc_params(s).ok_or_else(|| CliError::Usage("--seed is required for Monte Carlo".into()))
}

pub fn group_info(entry: &ZooEntry) -> Value {
    let g = &entry.group;
    let (kind, presentation) = match g {
        Group::Presented(e) => ("presented", Some(e.presentation().to_dsl())),
        Group::FiniteType(s) => ("finite_type", Some(s.describe())),
    };
    json!({
        "key": entry.key,
        "name": g.name(),
        "degree": g.degree().get(),
        "kind": kind,
        "definition": presentation,
        "facts": entry.facts,
    })
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

fn parse_vertex(text: &str) -> CliResult<Vertex> {
    if text.is_empty() || text == "root" {
        return Ok(Vertex::root());
    }
    let letters: Vec<usize> = text
        .split(['.', ','])
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad vertex `{text}`")))
        })
        .collect::<CliResult<_>>()?;
    Ok(Vertex::new(&letters)?)
}

/// `all` expands to every element of the level quotient.
fn parse_patterns(group: &Group, depth: usize, texts: &[String], limit: usize) -> CliResult<Vec<Portrait>> {
    let d = group.degree();
    let mut out = Vec::new();
    for t in texts {
        if t.trim() == "all" {
            out.extend(enumerate_quotient(group, depth, limit)?.iter());
            continue;
        }
        let labels: Vec<Perm> = t
            .split(';')
            .map(|l| Perm::parse_cycles(d, l.trim()))
            .collect::<treefpp::Result<_>>()?;
        out.push(Portrait::from_labels(d, depth, &labels)?);
    }
    Ok(out)
}

fn route(r: RouteArg) -> CheckRoute {
    match r {
        RouteArg::Auto => CheckRoute::Auto,
        RouteArg::Direct => CheckRoute::Direct,
        RouteArg::Schreier => CheckRoute::Schreier,
    }
}

/// Runs a parsed command and collects its results.
pub fn execute(cli: &Cli, cache: &QuotientCache) -> CliResult<Outcome> {
    let entry_for = |key: &str| -> CliResult<ZooEntry> { Ok(build_zoo_group(key)?) };
    let plain = |group: Option<Value>, results: Value| Outcome {
        group,
        results,
        inconclusive: false,
        series: None,
    };
    if cli.csv.is_some() && !matches!(cli.command, Command::Fpp(_)) {
        return Err(CliError::Usage("--csv is only available for fpp".into()));
    }
    match &cli.command {
        Command::Zoo {
            action: ZooAction::List,
        } => {
            let list: Vec<Value> = ZOO_CATALOG
                .iter()
                .map(|(k, d)| json!({"key": k, "description": d}))
                .collect();
            Ok(plain(None, json!({ "groups": list })))
        }
        Command::Fpp(a) => {
            let entry = entry_for(&a.group)?;
            let mode = match a.mode {
                ModeArg::Exact => FppMode::Exact,
                ModeArg::Mc => FppMode::Mc,
                ModeArg::Recursion => FppMode::Recursion,
                ModeArg::Auto => FppMode::Auto,
            };
            if mode == FppMode::Mc {
                require_seed(&a.sampling)?;
            }
            if a.max_level == 0 {
                return Err(CliError::Usage("--max-level must be at least 1".into()));
            }
            let config = FppConfig {
                max_level: a.max_level,
                mode,
                element_limit: a.limits.element_limit,
                mc: mc_params(&a.sampling),
            };
            let g = &entry.group;
            let series = fpp_report_with(g, &config, &mut |n| cache.quotient(g, n, a.limits.element_limit))?;
            Ok(Outcome {
                group: Some(group_info(&entry)),
                results: to_value(&series)?,
                inconclusive: false,
                series: Some(series),
            })
        }
        Command::Check(a) => {
            let entry = entry_for(&a.group)?;
            let g = &entry.group;
            let limit = a.limits.element_limit;
            let results = match a.property {
                PropertyArg::Fractal | PropertyArg::StronglyFractal | PropertyArg::Ssf => {
                    let prop = match a.property {
                        PropertyArg::Fractal => FractalProperty::Fractal,
                        PropertyArg::StronglyFractal => FractalProperty::StronglyFractal,
                        _ => FractalProperty::SuperStronglyFractal,
                    };
                    let r = check_fractality_with(g, prop, a.stab_levels, a.target_level, limit, route(a.route))?;
                    json!({ "passed": r.passed(), "report": to_value(&r)? })
                }
                PropertyArg::Martingale => {
                    let r = check_martingale_condition_with(g, a.levels, limit, route(a.route))?;
                    json!({ "passed": r.holds, "report": to_value(&r)? })
                }
                PropertyArg::Transitive => {
                    let r = is_level_transitive(g, a.levels)?;
                    json!({ "passed": r.transitive, "report": to_value(&r)? })
                }
            };
            Ok(plain(Some(group_info(&entry)), results))
        }
        Command::Nucleus(a) => {
            let entry = entry_for(&a.group)?;
            let r = compute_nucleus(&entry.group, nucleus_caps(&a.limits))?;
            Ok(Outcome {
                group: Some(group_info(&entry)),
                inconclusive: r.status == NucleusStatus::Inconclusive,
                results: to_value(&r)?,
                series: None,
            })
        }
        Command::JonesCheck(a) => {
            let entry = entry_for(&a.group)?;
            let config = JonesConfig {
                nucleus: nucleus_caps(&a.limits),
                levels: a.levels,
                element_limit: a.limits.element_limit,
            };
            let r = check_jones_condition(&entry.group, config)?;
            Ok(Outcome {
                group: Some(group_info(&entry)),
                inconclusive: matches!(r.verdict, JonesVerdict::Inconclusive { .. }),
                results: to_value(&r)?,
                series: None,
            })
        }
        Command::Independence(a) => {
            let entry = entry_for(&a.group)?;
            let g = &entry.group;
            let v = parse_vertex(&a.vertex)?;
            let pa = parse_patterns(g, a.n, &a.a, a.limits.element_limit)?;
            let pb = parse_patterns(g, a.m, &a.b, a.limits.element_limit)?;
            let r = cylinder_independence_check(g, a.n, a.m, &v, &pa, &pb, a.limits.element_limit)?;
            Ok(plain(Some(group_info(&entry)), to_value(&r)?))
        }
        Command::Conditional(a) => {
            let entry = entry_for(&a.group)?;
            let g = &entry.group;
            let m = a.m.unwrap_or_else(|| default_m(g.degree().get(), a.r));
            let limit = a.limits.element_limit;
            let eval = match a.mode {
                EvalArg::Exact => Evaluation::Exact { element_limit: limit },
                EvalArg::Mc => Evaluation::MonteCarlo(require_seed(&a.sampling)?),
                EvalArg::Auto => Evaluation::Auto {
                    element_limit: limit,
                    mc: mc_params(&a.sampling),
                },
            };
            let r = conditional_fixation(g, a.n, m, a.r, eval)?;
            Ok(plain(Some(group_info(&entry)), to_value(&r)?))
        }
        Command::Sample(a) => {
            let entry = entry_for(&a.group)?;
            let g = &entry.group;
            let seed = a
                .seed
                .ok_or_else(|| CliError::Usage("--seed is required for sampling".into()))?;
            let params = McParams {
                samples: a.count,
                walk_length: a.walk_length,
                seed,
            };
            let portraits = sample_portraits(g, a.level, params);
            let hist = xn_distribution(g, a.level, Evaluation::MonteCarlo(params))?;
            Ok(plain(
                Some(group_info(&entry)),
                json!({ "level": a.level, "portraits": to_value(&portraits)?, "xn": to_value(&hist)? }),
            ))
        }
    }
}

/// `ceil(log_d r) + 1`, the level gap used in the conditional-fixation bound.
pub fn default_m(d: usize, r: usize) -> usize {
    let mut m = 0;
    let mut p = 1usize;
    while p < r {
        p = p.saturating_mul(d);
        m += 1;
    }
    m + 1
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Zoo { .. } => "zoo list",
        Command::Fpp(_) => "fpp",
        Command::Check(_) => "check",
        Command::Nucleus(_) => "nucleus",
        Command::JonesCheck(_) => "jones-check",
        Command::Independence(_) => "independence",
        Command::Conditional(_) => "conditional",
        Command::Sample(_) => "sample",
    }
}

/// Executes `cli` (inside a dedicated pool when `--threads` is given) and
/// builds the report.
pub fn run_report(cli: &Cli) -> CliResult<Report> {
    let cache = QuotientCache::resolve(cli.cache_dir.as_deref());
    let start = Instant::now();
    let outcome = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| execute(cli, &cache))?,
        None => execute(cli, &cache)?,
    };
    Report::new(
        command_name(&cli.command),
        to_value(&cli.command)?,
        outcome,
        start.elapsed(),
    )
}

fn write_outputs(cli: &Cli, report: &Report) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(series)) = (&cli.csv, &report.series) {
        write_csv(Path::new(path), series)?;
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(argv: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = run_report(&cli).and_then(|r| write_outputs(&cli, &r).map(|_| r));
    match result {
        Ok(r) if r.inconclusive => 2,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let obj = json!({
                "schema": SCHEMA,
                "command": command_name(&cli.command),
                "error": { "kind": e.kind(), "message": e.to_string() },
            });
            if let Some(p) = &cli.out {
                let _ = std::fs::write(p, serde_json::to_string_pretty(&obj).unwrap_or_default() + "\n");
            }
            1
        }
    }
}
