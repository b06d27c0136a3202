use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mid", version, about = "Information distance over lists of byte strings")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// `builtin`, or `ext:` followed by a command line that reads stdin and
    /// writes the compressed bytes to stdout.
    #[arg(long, global = true, env = "MID_COMPRESSOR", default_value = "builtin")]
    pub compressor: String,

    /// Timeout for each external compressor run.
    #[arg(long, global = true, default_value_t = 60_000)]
    pub timeout_ms: u64,

    /// Size cache file, read before and written after the run.
    #[arg(long, global = true, env = "MID_CACHE")]
    pub cache: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Defaults to `text` for `cluster` and `json` elsewhere.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pairwise distance matrix over files.
    Matrix {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// ncd, e1 or emax-pair.
        #[arg(long, default_value = "ncd")]
        scheme: String,
    },
    /// One list distance over the files taken as a list.
    List {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// emax, emin, sum-bound, or a norm-* scheme.
        #[arg(long, default_value = "emax")]
        scheme: String,
    },
    /// Run a property suite or demonstration.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Bit length for the demonstrations; defaults per suite.
        #[arg(long)]
        n: Option<usize>,
        /// Normalized scheme for the normalization suite.
        #[arg(long, default_value = "norm-max-sublist")]
        scheme: String,
        #[arg(long, default_value_t = 1024)]
        min_len: usize,
        #[arg(long, default_value_t = 16 * 1024)]
        max_len: usize,
    },
    /// Exact experiments on the toy machine and the overlap construction.
    Lab(LabArgs),
    /// Agglomerative clustering of files into a Newick tree.
    Cluster {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "average")]
        linkage: LinkageArg,
        #[arg(long, default_value = "ncd")]
        scheme: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Metric,
    Additivity,
    Normalization,
    Chain,
    MinimalOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Single,
    Average,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabOp {
    Complexity,
    Apriori,
    Soi,
    Coding,
    Density,
    Dominance,
    Overlap,
}

#[derive(Debug, Args)]
pub struct LabArgs {
    #[arg(long, value_enum)]
    pub op: LabOp,
    /// Program length bound.
    #[arg(long = "L", default_value_t = 20)]
    pub l: u32,
    /// Step bound.
    #[arg(long = "S", default_value_t = 10_000)]
    pub s: u64,
    /// Longest string, in bits; defaults to 8 (soi, coding) or 5 (density, dominance).
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Target bit string for complexity and apriori, e.g. `0110`.
    #[arg(long)]
    pub target: Option<String>,
    /// Condition bit string; empty by default.
    #[arg(long, default_value = "")]
    pub condition: String,
    /// List length bound (density, dominance) or list length (overlap).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub k1: u32,
    #[arg(long, default_value_t = 4)]
    pub k2: u32,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Vectors drawn per overlap instance.
    #[arg(long, default_value_t = 20)]
    pub vectors: usize,
}
