//! `diamonds`: build diamond, Laakso and parasol graphs, measure the
//! distortion of explicit embeddings, and produce lower-bound curves.
//!
//! Exit status: 0 on success, 1 on invalid input or flags, 2 when a checked
//! property fails. Failures print a one-line JSON diagnostic on stderr.

mod commands;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diamond_core::graphs::Family;

#[derive(Parser, Debug)]
#[command(
    name = "diamonds",
    version,
    about = "Diamond graph embedding experiments"
)]
pub struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a graph and write it as JSON.
    Build(BuildArgs),
    /// Check that the recursive and coded diamonds are isomorphic.
    VerifyIso(VerifyIsoArgs),
    /// All-pairs distance matrix as CSV.
    Dist(DistArgs),
    /// Compute an embedding of a coded diamond.
    Embed(EmbedArgs),
    /// Measure the distortion of an embedding.
    Distort(DistortArgs),
    /// Lower-bound curve as CSV.
    Bounds(BoundsArgs),
    /// Randomized check that approximate barycenters are approximate midpoints.
    CheckLemma51(Lemma51Args),
    /// Tabulate distortion reports against upper bounds and lower-bound curves.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Coded,
    Recursive,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, default_value = "diamond", value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub depth: u32,
    #[arg(long = "branch", default_value_t = 2)]
    pub branching: u32,
    #[arg(long, value_enum, default_value = "coded")]
    pub mode: Mode,
    /// Base bundle (graph JSON) for the custom-base family.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyIsoArgs {
    #[arg(long)]
    pub depth: u32,
    #[arg(long = "branch", default_value_t = 2)]
    pub branching: u32,
    /// Optional JSON file receiving the vertex bijection.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistMethod {
    Bfs,
    Closed,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "bfs")]
    pub method: DistMethod,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Tree embedding into a sup-norm sequence space.
    C0,
    /// The same vectors, read in a p-norm.
    Lp,
    /// Bernoulli embedding into L1; pairwise distances.
    L1,
    /// Transfer of a 2-branching base into Lp(Y); pairwise distances.
    Transfer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum L1Method {
    Closed,
    Atoms,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long)]
    pub graph: PathBuf,
    /// Exponent for the lp and transfer targets.
    #[arg(long)]
    pub p: Option<u32>,
    /// For the lp target without --p: choose p from this tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Base for the transfer target: `frechet` or an embedding JSON of the
    /// coded 2-branching diamond of the same depth.
    #[arg(long, default_value = "frechet")]
    pub base: String,
    /// Norm of a base read from file.
    #[arg(long, default_value = "sup")]
    pub base_norm: String,
    /// How the l1 target evaluates distances.
    #[arg(long, value_enum, default_value = "closed")]
    pub l1_method: L1Method,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct DistortArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Embedding JSON, or a pairwise CSV written by `embed`.
    #[arg(long)]
    pub embedding: PathBuf,
    /// `sup`, `l1` or `p:P`; ignored for pairwise CSV input.
    #[arg(long, default_value = "sup")]
    pub norm: String,
    /// Recorded in the report and used by `report` for the upper-bound column.
    #[arg(long, value_enum)]
    pub target: Option<Target>,
    /// Tolerance behind the lp target, for its upper bound `3 + eps`.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Fail with status 2 when the distortion exceeds this value (`a/b`,
    /// `a/2^e` or an integer).
    #[arg(long)]
    pub bound: Option<String>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Either a number or the name of a base family, whose rho is computed
    /// from its base graph at width --branch.
    #[arg(long, default_value = "1")]
    pub rho: String,
    #[arg(long = "branch", default_value_t = 3)]
    pub branching: u32,
    #[arg(long, default_value_t = 20)]
    pub kmax: u32,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct Lemma51Args {
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = diamond_core::bounds::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Distortion reports (JSON) and curves (CSV).
    pub inputs: Vec<PathBuf>,
    /// Markdown output.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Plot-ready CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: diamond_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let failure = commands::classify(&e);
            eprintln!("{}", failure.diagnostic());
            ExitCode::from(failure.code)
        }
    }
}
