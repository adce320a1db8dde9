use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nwaq", version, about = "Queries over nested weighted automata and monitor-counter automata")]
pub struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// A threshold given as `--le T` or `--lt T`, with `T` an integer or `p/q`.
#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct ThresholdArg {
    /// Values at most T.
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    pub le: Option<String>,
    /// Values strictly below T.
    #[arg(long, value_name = "T", allow_hyphen_values = true)]
    pub lt: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Mca,
    Nwa,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a file.
    Check {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
    },
    /// Whether no run has more than K active slaves; with --max, the least such K up to the bound.
    Width {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
        /// Search the least width in K..=MAX.
        #[arg(long)]
        max: Option<usize>,
    },
    /// Value of the run on a lasso word `prefix | period`, or replay of a certificate.
    Eval {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Lasso word, e.g. "r g | r r g"; the period follows `|`.
        #[arg(long, required_unless_present = "certificate", conflicts_with = "certificate")]
        word: Option<String>,
        /// Most simultaneously active slaves; defaults to the least width up to 16.
        #[arg(long)]
        cap: Option<usize>,
        /// Certificate written by `empty --certificate`; checks its witness against its threshold.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Whether some word has value meeting the threshold.
    Empty {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        threshold: ThresholdArg,
        /// Write a JSON certificate replayable by `eval --certificate`.
        #[arg(long, value_name = "OUT")]
        certificate: Option<PathBuf>,
    },
    /// Infimum of the values of all words.
    Infimum {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
    },
    /// Whether every word has value meeting the threshold (deterministic input).
    Universal {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        threshold: ThresholdArg,
    },
    /// Whether the oldest slaves can accumulate unboundedly negative weight.
    Star {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
    },
    /// Translate between nested and monitor-counter automata.
    Translate {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Width bound, required when translating to counters.
        #[arg(long)]
        k: Option<usize>,
        #[arg(short, value_name = "OUT")]
        o: PathBuf,
    },
    /// Equivalent deterministic automaton of width 1.
    Reduce {
        /// A `.nwa` or `.mca` file.
        file: PathBuf,
        /// Width bound: most slaves active at once.
        #[arg(long)]
        k: usize,
        #[arg(short, value_name = "OUT")]
        o: PathBuf,
    },
}
