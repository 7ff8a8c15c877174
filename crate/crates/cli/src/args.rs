//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use treefpp::quotient::DEFAULT_ELEMENT_LIMIT;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "treefpp", version, about = "Fixed-point proportions of self-similar groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Also write the FPP series as CSV (fpp only).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,

    /// Quotient cache directory; the TREEFPP_CACHE variable takes precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Built-in groups.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Fixed-point proportion series.
    Fpp(FppArgs),
    /// Fractality, martingale and transitivity checks.
    Check(CheckArgs),
    /// Nucleus, N1 and fixed-end counts.
    Nucleus(NucleusArgs),
    /// The contracting-group criterion for null fixed-point proportion.
    JonesCheck(JonesArgs),
    /// Independence of cylinder events under the section map.
    Independence(IndependenceArgs),
    /// Conditional fixation of the fixed-point process.
    Conditional(ConditionalArgs),
    /// Random elements of a level quotient.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZooAction {
    List,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Limits {
    /// Largest quotient enumerated.
    #[arg(long, default_value_t = DEFAULT_ELEMENT_LIMIT)]
    pub element_limit: usize,
    /// Depth cap for equality tests and nucleus rounds.
    #[arg(long, default_value_t = 30)]
    pub depth_cap: usize,
    /// State cap for equality tests and nucleus size.
    #[arg(long, default_value_t = 20_000)]
    pub pair_cap: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sampling {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Lazy-walk steps per sample (default 16 n).
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact,
    Mc,
    Recursion,
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FppArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value_t = 6)]
    pub max_level: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyArg {
    Fractal,
    StronglyFractal,
    Ssf,
    Martingale,
    Transitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteArg {
    Auto,
    Direct,
    Schreier,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub property: PropertyArg,
    #[arg(long)]
    pub group: String,
    /// Largest stabilizer level k (fractality properties).
    #[arg(long, default_value_t = 2)]
    pub stab_levels: usize,
    /// Depth m of the compared sections (fractality properties).
    #[arg(long, default_value_t = 1)]
    pub target_level: usize,
    /// Levels checked (martingale, transitive).
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NucleusArgs {
    #[arg(long)]
    pub group: String,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JonesArgs {
    #[arg(long)]
    pub group: String,
    /// Levels checked for transitivity and the martingale condition.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IndependenceArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Level-n vertex as letters, e.g. `1.2`.
    #[arg(long)]
    pub vertex: String,
    /// Depth-n pattern: labels in breadth-first order separated by `;`,
    /// e.g. `(1 2)` or `();(1 2);()`; `all` for the whole quotient.
    /// Repeat for several patterns.
    #[arg(long = "a")]
    pub a: Vec<String>,
    /// Depth-m pattern, same format as `--a`.
    #[arg(long = "b")]
    pub b: Vec<String>,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalArg {
    Exact,
    Mc,
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConditionalArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub n: usize,
    /// Defaults to ceil(log_d r) + 1.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = EvalArg::Auto)]
    pub mode: EvalArg,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub level: usize,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub walk_length: Option<usize>,
}
