//! `treespan`: exact, asymptotic and simulated distributions of spanning-tree
//! sizes and multiple-selection pass counts in random binary search trees.
//!
//! Every command is deterministic for a fixed seed, independent of thread
//! count, and emits machine-readable CSV or JSON (schemas under `schemas/`).

mod cache;
mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 20240718;

#[derive(Debug, Parser)]
#[command(name = "treespan", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for cached distribution tables (also: TREESPAN_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Worker thread count (defaults to the number of cores). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    X,
    Y,
}

impl KindArg {
    pub fn to_kind(self) -> treespan_core::Kind {
        match self {
            KindArg::X => treespan_core::Kind::X,
            KindArg::Y => treespan_core::Kind::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Explicit permutation + tree construction per trial.
    Tree,
    /// Recursive subtree-split sampling (same law, fast at large n).
    Split,
    /// Tree for n <= 1000, split above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    /// Limit-law standardization: center 2p ln n, scale sqrt(2p ln n).
    Limit,
    /// Sample-moment standardization.
    Moments,
    /// Exact-moment standardization (sharper small-n diagnostics; span-size
    /// closed forms up to n = 5000, pass-count tables within the build cap).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GofSource {
    /// Simulated histogram (default).
    Sim,
    /// The exact table distribution itself, noise-free.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentSource {
    Table,
    ClosedForm,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact pmf of one statistic from the distribution tables.
    Dist(DistArgs),
    /// Exact and asymptotic moments, with optional cross-verification.
    Moments(MomentsArgs),
    /// Monte-Carlo batch over random trees and selections.
    Simulate(SimulateArgs),
    /// Multiple-selection batch on shuffled inputs, counting passes.
    MqsRun(MqsRunArgs),
    /// Goodness-of-fit of simulated histograms against the normal limit.
    Gof(GofArgs),
    /// Exact pgf vs quasi-power prediction over a sweep of n.
    Quasipower(QuasipowerArgs),
    /// Closed-form generating functions vs truncated series.
    GfCheck(GfCheckArgs),
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Where the exact values come from: the DP table, the closed-form
    /// expressions, or both.
    #[arg(long, value_enum, default_value_t = MomentSource::Both)]
    pub source: MomentSource,
    /// Cross-check the closed forms against the table moments; mismatch is an
    /// internal consistency failure (exit 4).
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct MqsRunArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of ranks to draw uniformly per trial (exclusive with --ranks).
    #[arg(long)]
    pub p: Option<usize>,
    /// Fixed comma-separated 1-based rank set, e.g. --ranks 1,5,7.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Required with --source sim; unused with --source exact.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = CenterArg::Limit)]
    pub center: CenterArg,
    #[arg(long, value_enum, default_value_t = GofSource::Sim)]
    pub source: GofSource,
}

#[derive(Debug, Args)]
pub struct QuasipowerArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub p: usize,
    /// Argument s of the pgf comparison at v = e^s.
    #[arg(long)]
    pub s: f64,
    /// Comma-separated sweep of n values, e.g. --n-list 30,60,120.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct GfCheckArgs {
    #[arg(long)]
    pub z: f64,
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub v: f64,
    /// Series truncation in the tree-size variable.
    #[arg(long, default_value_t = 200)]
    pub trunc: usize,
    /// Series truncation in the selection-count variable.
    #[arg(long, default_value_t = 24)]
    pub ptrunc: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(2);
        }
        // thread count changes scheduling only, never results
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match commands::run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
