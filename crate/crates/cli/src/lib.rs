//! Command-line front-end for the `pswitch` library.
//!
//! Every subcommand prints exact fractions by default. `--format decimal`
//! renders rounded decimals and states the digit count; `--format dot`
//! prints the circuit as a Graphviz graph where a command produces one.
//!
//! Exit codes: 0 on success, 2 for bad flags or input, 3 when a configured
//! resource cap is hit, 1 for anything else.

mod commands;
mod render;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use render::{OutputFormat, Renderer};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pswitch",
    version,
    about = "Stochastic switching circuits over exact fractions"
)]
pub struct Cli {
    /// Output rendering.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Exact)]
    pub format: OutputFormat,

    /// Fractional digits for `--format decimal`.
    #[arg(long, global = true, default_value_t = 10)]
    pub digits: u32,

    /// Directory for cached enumeration tables.
    #[arg(long, global = true, env = "PSWITCH_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closure probability of a circuit file.
    Eval(EvalArgs),
    /// Dual of a series-parallel circuit and its closure probability.
    Dual(CircuitArgs),
    /// Exact ssp synthesis of `a/q^n` over `{1/q, ..., (q-1)/q}`.
    Synth(SynthArgs),
    /// Greedy approximation of a target over a pswitch set.
    Approx(ApproxArgs),
    /// Worst-case error and bounds when every pswitch may be off by ε.
    Robust(RobustArgs),
    /// Values realizable with up to a given number of pswitches.
    Enum(EnumArgs),
    /// Synthesized sizes against optimal sizes over a uniform set.
    Fig7(Fig7Args),
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    /// Circuit file, or `-` for standard input.
    #[arg(required_unless_present = "expr", conflicts_with = "expr")]
    pub file: Option<PathBuf>,

    /// Inline circuit text instead of a file.
    #[arg(long)]
    pub expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,

    /// Fix a switch: `INDEX=closed` or `INDEX=open` (repeatable). Switch
    /// indices are pre-order leaf positions or edge positions.
    #[arg(long = "condition", value_name = "INDEX=STATE")]
    pub conditions: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Target probability as `a/b`.
    #[arg(
        long,
        required_unless_present = "target_decimal",
        conflicts_with = "target_decimal"
    )]
    pub target: Option<String>,

    /// Target given as a decimal `D` read with exactly `K` places.
    #[arg(long, num_args = 2, value_names = ["D", "K"])]
    pub target_decimal: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub q: u64,

    #[command(flatten)]
    pub target: TargetArgs,

    /// Print the residual and `d` sequences.
    #[arg(long)]
    pub trace: bool,

    /// Use the rule tables instead of the greedy backward search.
    #[arg(long)]
    pub rule_based: bool,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Comma-separated pswitch probabilities.
    #[arg(long, required_unless_present = "q", conflicts_with = "q")]
    pub set: Option<String>,

    /// Use the uniform set `{1/q, ..., (q-1)/q}`.
    #[arg(long)]
    pub q: Option<u64>,

    #[command(flatten)]
    pub target: TargetArgs,

    /// Pswitch budget.
    #[arg(long)]
    pub n: usize,

    /// Insertions simulated per greedy round.
    #[arg(long, default_value_t = 1)]
    pub m: usize,

    /// Largest accepted `m`.
    #[arg(long, default_value_t = pswitch::approximation::DEFAULT_MAX_STEP)]
    pub max_step: usize,
}

#[derive(Debug, Args)]
pub struct RobustArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,

    /// Error allowance per pswitch, as `a/b`.
    #[arg(long)]
    pub eps: String,

    /// Largest switch count for exhaustive corner enumeration.
    #[arg(long, default_value_t = pswitch::robustness::DEFAULT_VERTEX_CAP)]
    pub vertex_cap: usize,

    /// Use the two monotone corners instead of enumerating all of them.
    #[arg(long)]
    pub monotone: bool,
}

#[derive(Debug, Args)]
pub struct EnumArgs {
    /// Comma-separated pswitch probabilities.
    #[arg(long, required_unless_present = "q", conflicts_with = "q")]
    pub set: Option<String>,

    /// Use the uniform set `{1/q, ..., (q-1)/q}`.
    #[arg(long)]
    pub q: Option<u64>,

    /// Largest circuit size.
    #[arg(long)]
    pub max_size: usize,

    #[arg(long, value_enum, default_value_t = FamilyArg::Sp)]
    pub family: FamilyArg,

    /// Report the optimal size and a witness for this value instead of
    /// listing the table.
    #[arg(long)]
    pub target: Option<String>,

    /// List every value rather than counts per size.
    #[arg(long)]
    pub list: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Sp,
    Ssp,
}

#[derive(Debug, Args)]
pub struct Fig7Args {
    #[arg(long)]
    pub q: u64,

    /// Comma-separated optimal sizes.
    #[arg(long, default_value = "3,4")]
    pub n: String,
}

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// The command ran but its checks did not hold.
    Failed(String),
    Core(pswitch::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use pswitch::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAILURE,
            CliError::Core(e) if e.is_resource_limit() => EXIT_RESOURCE,
            CliError::Core(
                E::InvalidProbability(_)
                | E::Arity { .. }
                | E::InvalidSet(_)
                | E::UnknownSwitch(_)
                | E::NotQAdic { .. }
                | E::UnsupportedQ(..)
                | E::InvalidArgument(_)
                | E::Syntax { .. },
            ) => EXIT_USAGE,
            CliError::Core(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<pswitch::Error> for CliError {
    fn from(e: pswitch::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
