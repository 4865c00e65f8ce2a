//! `gcmax`: convexity checks, certificates, operation synthesis and
//! multipliers for functions on finite magmas.

mod commands;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Report;

#[derive(Parser, Debug)]
#[command(name = "gcmax", version, about = "Certificates for families of convex functions on finite magmas")]
struct Cli {
    /// Instance file (JSON). Reads stdin when omitted or `-`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for commands that draw random data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Plain-text report instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every function of the instance for (op,p,q)-convexity.
    Check,
    /// Compute a certificate lambda with sum_i lambda_i f_i >= 0.
    Solve {
        #[arg(long, value_enum, default_value_t = Method::Lp)]
        method: Method,
    },
    /// Tuple condition, Helly subfamilies and the sets Lambda_x.
    Diagnose,
    /// Derived operations and their ratios.
    Opcalc {
        #[command(subcommand)]
        action: OpcalcAction,
    },
    /// Multipliers for minimizing one function subject to the others <= 0.
    Kkt(KktArgs),
    /// Write seeded random instances to a directory.
    Gen(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Lp,
    Recursive,
    Two,
}

#[derive(Args, Debug, Clone)]
pub struct TermParams {
    /// Defaults to the instance's p when --input is given.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum OpcalcAction {
    /// Build a term whose ratio lies in [lo, hi].
    Synth {
        #[command(flatten)]
        params: TermParams,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
        #[arg(long, default_value_t = 64)]
        max_depth: usize,
    },
    /// Coefficients and ratio of a term such as `compose(swap(base),base)`.
    Eval {
        #[command(flatten)]
        params: TermParams,
        #[arg(long)]
        term: String,
    },
    /// Operation table of a term on the instance's magma.
    Realize {
        #[command(flatten)]
        params: TermParams,
        #[arg(long)]
        term: String,
    },
}

#[derive(Args, Debug)]
pub struct KktArgs {
    /// Name of the objective; every other function is a constraint.
    #[arg(long)]
    pub objective: String,
    /// Candidate solution, by index or element name.
    #[arg(long)]
    pub x0: String,
    /// Check these multipliers (lambda_0,..,lambda_n) instead of computing them.
    #[arg(long, value_delimiter = ',')]
    pub verify: Option<Vec<String>>,
    /// Replace the objective by f0 - f0(x0), failing if convexity is lost.
    #[arg(long)]
    pub shift_objective: bool,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value = "random-table")]
    pub kind: String,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "1")]
    pub q: String,
    #[arg(long, default_value = "rejection")]
    pub strategy: String,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Functions per instance.
    #[arg(long, default_value_t = 2)]
    pub functions: usize,
    /// Only emit families whose pointwise maximum is nonnegative.
    #[arg(long)]
    pub max_nonneg: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn read_input(path: &Option<PathBuf>) -> anyhow::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", p.display()))
        }
        _ => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let input = || read_input(&cli.input).and_then(|t| Ok(gcmax::instance::parse_instance(&t)?));
    match &cli.command {
        Command::Check => commands::check(&input()?),
        Command::Solve { method } => commands::solve(&input()?, *method),
        Command::Diagnose => commands::diagnose(&input()?),
        Command::Opcalc { action } => {
            let instance = if cli.input.is_some() || matches!(action, OpcalcAction::Realize { .. }) {
                Some(input()?)
            } else {
                None
            };
            commands::opcalc(action, instance.as_ref())
        }
        Command::Kkt(args) => commands::kkt(&input()?, args),
        Command::Gen(args) => commands::gen(args, cli.seed),
    }
}

fn emit(cli: &Cli, report: &Report) -> anyhow::Result<()> {
    let mut text = if cli.human { report.human.clone() } else { serde_json::to_string_pretty(&report.json)? };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|report| emit(&cli, &report).map(|_| report.exit)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
