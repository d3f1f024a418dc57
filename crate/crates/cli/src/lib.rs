//! The `lexloop` command line.

mod commands;
mod error;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lexloop_core::metric::Linkage;
use lexloop_core::TreeKind;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "lexloop",
    version,
    about = "Learn, compare and cluster lexicographic preference trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a tree or forest from an example file.
    Learn(LearnArgs),
    /// Score a model against an example file.
    Eval(EvalArgs),
    /// Pairwise Kendall distances between trees.
    Distance(DistanceArgs),
    /// Cluster trees by distance and pick one representative per bucket.
    Cluster(ClusterArgs),
    /// Sample a hidden model and examples drawn from it.
    Gen(GenArgs),
    /// Emit graph descriptions of trees or a dendrogram plot document.
    Render(RenderArgs),
    /// Run the session service over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Uiup,
    Uicp,
    Cicp,
}

impl From<KindArg> for TreeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Uiup => TreeKind::Uiup,
            KindArg::Uicp => TreeKind::Uicp,
            KindArg::Cicp => TreeKind::Cicp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Single,
    Average,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Average => Linkage::Average,
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Rows of `v1,v2,... > w1,w2,...`, preferred side first.
    #[arg(long)]
    pub examples: PathBuf,
    #[arg(long, value_enum, default_value = "uiup")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 1)]
    pub forest_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sample_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// JSON array of feedback constraints.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Search every value order for attributes with at most four values.
    #[arg(long)]
    pub exact_orders: bool,
    /// Model document destination; the summary then goes to standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub examples: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Tree or forest documents; forests contribute every member.
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "average")]
    pub linkage: LinkageArg,
    /// Cut height; defaults to the median merge height.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long, value_enum, default_value = "uiup")]
    pub hidden_kind: KindArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub num_examples: usize,
    /// Probability of reversing each sampled example.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Emit every strictly ordered pair instead of a sample.
    #[arg(long, conflicts_with = "num_examples")]
    pub complete: bool,
    /// Example destination; standard output when absent.
    #[arg(long)]
    pub examples_out: Option<PathBuf>,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Levels drawn before subtrees collapse.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Only this forest member.
    #[arg(long, conflicts_with = "plot")]
    pub tree: Option<usize>,
    /// Dendrogram plot document of a forest instead of tree graphs.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, value_enum, default_value = "average", requires = "plot")]
    pub linkage: LinkageArg,
    /// Cut line drawn on the plot.
    #[arg(long, requires = "plot")]
    pub threshold: Option<f64>,
    /// SVG drawing instead of the plot document.
    #[arg(long, requires = "plot")]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "lexloop-data")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// Seed for sessions created without one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub graph_depth: usize,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Learn(a) => commands::learn(&a, out, err),
        Command::Eval(a) => commands::eval(&a, out),
        Command::Distance(a) => commands::distance(&a, out),
        Command::Cluster(a) => commands::cluster(&a, out),
        Command::Gen(a) => commands::gen(&a, out),
        Command::Render(a) => commands::render(&a, out),
        Command::Serve(a) => commands::serve(&a, err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn flags_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn rejects_conflicting_flags() {
        let parsed = Cli::try_parse_from(["lexloop", "gen", "--domain", "d", "--complete", "--num-examples", "3"]);
        assert!(parsed.is_err());
        let parsed = Cli::try_parse_from(["lexloop", "render", "--domain", "d", "--model", "m", "--svg"]);
        assert!(parsed.is_err());
    }
}
