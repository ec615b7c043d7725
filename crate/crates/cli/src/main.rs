//! `bacforge`: construct, verify, bound and simulate batch array codes.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or
//! precondition error. JSON goes to stdout, summaries to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bacforge", version, about = "Batch array codes and PIR array codes over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a code from one of the explicit families.
    Construct(ConstructArgs),
    /// Exhaustively check the batch (or PIR) property of a code file.
    Verify(VerifyArgs),
    /// Exact lower bounds and the best construction length.
    Bounds(BoundsArgs),
    /// Good vectors: the `2t+1` family, or enumeration at a given length.
    Goodvec(GoodvecArgs),
    /// Combine code files with the gadget compositions.
    Compose(ComposeArgs),
    /// Serve requests on a simulated cluster.
    Simulate(SimulateArgs),
    /// Sample requests against an affine-plane code.
    RandomTrials(TrialArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Replication,
    Single,
    Parity,
    Cyclic,
    Uniform,
    Goodvec,
    Affine,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub family: Family,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Good-vector parameter; builds the length-`2t+1` vector.
    #[arg(long)]
    pub t: Option<usize>,
    /// Explicit good vector, e.g. `1,1,2,0,2`.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<usize>>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prime field size.
    #[arg(long, default_value_t = 2)]
    pub field: u64,
    /// Output path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Linear,
    Projection,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub code: PathBuf,
    /// Batch size; defaults to the size recorded by the generator.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Linear)]
    pub mode: Mode,
    /// Only check requests of k copies of one symbol.
    #[arg(long)]
    pub pir_only: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub table: Option<BoundsSub>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum BoundsSub {
    /// A sweep over inclusive ranges `a..b`.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MRuleArg {
    #[value(name = "k+1")]
    KPlus1,
    #[value(name = "k+2")]
    KPlus2,
    All,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long)]
    pub n_range: String,
    #[arg(long)]
    pub k_range: String,
    #[arg(long, value_enum, default_value_t = MRuleArg::All)]
    pub m_rule: MRuleArg,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GoodvecArgs {
    #[arg(long)]
    pub t: usize,
    /// List every good vector of length `--len`.
    #[arg(long, requires = "len")]
    pub enumerate: bool,
    #[arg(long)]
    pub len: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComposeOp {
    Parallel,
    Concat,
    Repeat,
}

#[derive(Args, Debug)]
pub struct ComposeArgs {
    pub op: ComposeOp,
    pub a: PathBuf,
    pub b: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlannerArg {
    Exhaustive,
    Certified,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub code: PathBuf,
    /// Data vector, e.g. `1,0,1,1`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub data: Vec<u64>,
    /// 1-based requested indices, e.g. `1,1,1,1`.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
    pub request: Option<Vec<usize>>,
    /// Serve every multiset of this size instead of one request.
    #[arg(long, value_name = "K")]
    pub sweep: Option<usize>,
    /// CSV destination for a sweep (`request,node,load,symbols_read`).
    #[arg(long, requires = "sweep")]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Linear)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = PlannerArg::Exhaustive)]
    pub planner: PlannerArg,
}

#[derive(Args, Debug)]
pub struct TrialArgs {
    pub code: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the own-bucket shortcut and use lines only.
    #[arg(long)]
    pub lines_only: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
