use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use qsim_cli::{cmd_check, cmd_gen, cmd_run, CheckOptions, Exit, Family, Format, Input, RunConfig};
use qsim_core::bdd::DEFAULT_NODE_BUDGET;
use qsim_core::oracle::{CheckConfig, Fault};
use qsim_core::Execution;

/// Exact quantum circuit simulator on bit-sliced BDDs.
///
/// Exit codes: 0 success, 1 check mismatch, 2 parse or usage error,
/// 3 node budget exhausted, 4 time limit reached, 5 I/O error.
#[derive(Parser, Debug)]
#[command(name = "qsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a circuit file and report statistics and probabilities.
    Run(RunArgs),
    /// Print a benchmark circuit in the text format.
    Gen(GenArgs),
    /// Cross-check random circuits against the dense exact oracle.
    Check(CheckArgs),
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Circuit file, or `-` for stdin.
    file: PathBuf,
    /// Initial width of each integer slice vector.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    r_init: u64,
    /// Sift the variable order when the diagram doubles in size.
    #[arg(long)]
    reorder: bool,
    /// Live BDD node limit; exceeding it exits with code 3.
    #[arg(long, env = "QSIM_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Wall-clock limit in seconds; exceeding it exits with code 4.
    #[arg(long, value_name = "SEC")]
    time_limit: Option<f64>,
    /// Number of measurement samples to draw.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Include every nonzero amplitude as `bits a b c d k`.
    #[arg(long)]
    dump_amplitudes: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Omit outcome distributions with more than 2^N entries.
    #[arg(long, default_value_t = 16)]
    enum_limit: usize,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(clap::Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    /// Number of qubits.
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Hidden string for `bv` over qubits 0..n-2 (default all ones).
    #[arg(long)]
    hidden: Option<String>,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Random circuits per qubit count.
    #[arg(long, default_value_t = 20)]
    cases: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    r_init: usize,
    /// Compare after every gate instead of only at the end.
    #[arg(long)]
    per_gate: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long)]
    sequential: bool,
    /// Flip one amplitude bit after gate G at basis index I, as `G:I`.
    #[arg(long, hide = true, value_name = "G:I", value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Random,
    Ghz,
    Bv,
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    let (g, i) = s.split_once(':').ok_or("expected G:I")?;
    Ok(Fault::FlipBit {
        after_gate: g.parse().map_err(|e| format!("gate: {e}"))?,
        index: i.parse().map_err(|e| format!("index: {e}"))?,
    })
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Exit::Usage.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => {
            let time_limit = match a.time_limit.map(Duration::try_from_secs_f64) {
                None => None,
                Some(Ok(d)) => Some(d),
                Some(Err(e)) => {
                    eprintln!("qsim: invalid --time-limit: {e}");
                    return ExitCode::from(Exit::Usage.code() as u8);
                }
            };
            let input = if a.file.as_os_str() == "-" {
                Input::Stdin
            } else {
                Input::Path(a.file)
            };
            cmd_run(&RunConfig {
                input,
                r_init: a.r_init as usize,
                reorder: a.reorder,
                node_budget: a.node_budget,
                time_limit,
                seed: a.seed,
                shots: a.shots,
                format: a.format.into(),
                dump_amplitudes: a.dump_amplitudes,
                enum_limit: a.enum_limit,
                exec: exec(a.sequential),
            })
        }
        Command::Gen(a) => {
            let family = match a.family {
                FamilyArg::Random => Family::Random,
                FamilyArg::Ghz => Family::Ghz,
                FamilyArg::Bv => Family::Bv,
            };
            cmd_gen(family, a.n, a.seed, a.hidden.as_deref())
        }
        Command::Check(a) => cmd_check(&CheckOptions {
            config: CheckConfig {
                n_min: a.n_min,
                n_max: a.n_max,
                cases: a.cases,
                seed: a.seed,
                r_init: a.r_init,
                per_gate: a.per_gate,
            },
            format: a.format.into(),
            exec: exec(a.sequential),
            fault: a.inject_fault,
        }),
    };
    ExitCode::from(outcome.emit() as u8)
}
