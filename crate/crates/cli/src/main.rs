mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, Family};
use crate::error::CliError;

const AFTER_HELP: &str = "\
Exit status: 0 success, 1 invalid input, 2 alphabet blow-up, 3 verification failure.
Environment: POLARLAB_MAX_ALPHABET overrides the output-alphabet cap (default 1000000).";

const POLARIZE_HELP: &str = "\
CSV columns (fixed order): seq,I_bits,class,gapI,gapIH
  seq    sign sequence, '-' and '+' applied left to right
  I_bits symmetric capacity of the synthetic channel, bits
  class  id of the determining subgroup (see the JSON report), or 'none'
  gapI   |I(W) - log2|G/H|| for the nearest subgroup H
  gapIH  |I(W[H]) - log2|G/H|| for the same H
With several --delta values one CSV is written per value, named <stem>.delta<d>.<ext>.";

const TREND_HELP: &str = "CSV columns (fixed order): n,perfect,useless,intermediate,unclassified,max_alphabet";

/// Multilevel polarization laboratory for channels over finite Abelian groups.
#[derive(Parser, Debug)]
#[command(name = "polarlab", version, after_help = AFTER_HELP)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// JSON experiment config; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Group structure: subgroups, characteristic subgroups, automorphism count.
    Group {
        #[command(subcommand)]
        action: GroupCommand,
    },
    /// Build or inspect channel files.
    Channel {
        #[command(subcommand)]
        action: ChannelCommand,
    },
    /// Apply a sign sequence to a channel file.
    Transform(TransformArgs),
    /// Classify all 2^n synthetic channels.
    #[command(after_help = POLARIZE_HELP)]
    Polarize(PolarizeArgs),
    /// Depth-by-depth level fractions for qSC over a cyclic group of composite order.
    #[command(after_help = TREND_HELP)]
    Trend(TrendArgs),
    /// Run verification suites; exits 3 if any suite fails.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum GroupCommand {
    Info {
        /// Cyclic factor orders, e.g. 2,4 for Z2 x Z4.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
    },
}

#[derive(Subcommand, Debug)]
enum ChannelCommand {
    /// Construct a channel from a family and write it as JSON.
    Build {
        #[command(flatten)]
        source: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Capacities, symmetry and classification of a channel file.
    Info {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    /// Erasure or crossover parameter for qec / qsc.
    #[arg(long)]
    pub eps: Option<f64>,
    /// gensym components as p1:eps1,p2:eps2,...
    #[arg(long)]
    pub components: Option<String>,
    /// Subgroup member indices for homo, e.g. 0,2.
    #[arg(long, value_delimiter = ',')]
    pub subgroup: Option<Vec<usize>>,
    /// Output alphabet size for random.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    pub file: PathBuf,
    /// Sign sequence such as -+- (applied left to right).
    #[arg(long, allow_hyphen_values = true)]
    pub seq: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Lossy quantizer target size; the result is labelled approximate.
    #[arg(long)]
    pub quantize: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed-form erasure recursion when the input is an erasure channel, else matrix.
    Auto,
    Matrix,
    Erasure,
}

#[derive(Args, Debug)]
pub struct PolarizeArgs {
    /// Channel JSON file; if omitted the channel is built from the family flags.
    pub file: Option<PathBuf>,
    #[command(flatten)]
    pub source: FamilyArgs,
    /// Depth n (default 8, or 20 on the erasure path).
    #[arg(long)]
    pub depth: Option<usize>,
    /// One or more δ values in bits (default 0.1,0.05,0.01).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// Record every branch instead of the first 4096.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub quantize: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrendArgs {
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest depth (default 10).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub quantize: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// qec-bound, uniqueness, closure, levels or all.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random cases for the uniqueness and closure suites (default 10000).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = commands::Context::new(cfg)?;
    match cli.command {
        Command::Group { action: GroupCommand::Info { orders } } => ctx.group_info(orders),
        Command::Channel { action: ChannelCommand::Build { source, out } } => ctx.channel_build(source, out),
        Command::Channel { action: ChannelCommand::Info { file, delta } } => ctx.channel_info(&file, delta),
        Command::Transform(a) => ctx.transform(a),
        Command::Polarize(a) => ctx.polarize(a),
        Command::Trend(a) => ctx.trend(a),
        Command::Verify(a) => ctx.verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Usage errors are invalid input (1), not clap's default 2, which means blow-up here.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
