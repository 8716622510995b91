use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kahncheck_cli::checks::{run_checks, CheckId, CheckOptions};
use kahncheck_cli::document;
use kahncheck_cli::input_info;

/// Check dataflow network descriptions: model axioms, trace/value structure,
/// and the generalized Kahn principle, with machine-readable reports.
#[derive(Parser)]
#[command(name = "kahncheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks against a network description file.
    Check(CheckArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Network description (JSON).
    file: PathBuf,
    /// Comma-separated check ids; defaults to all of: axioms, incremental,
    /// stream-iso, pomset-iso, covseq-iso, computes, gkp, safety, liveness,
    /// expressive, jung, lemma1, global-char
    #[arg(long)]
    checks: Option<String>,
    /// Output format.
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
    /// Override the depth of every stream channel.
    #[arg(long)]
    depth_override: Option<usize>,
    /// Cap on streamed trace enumeration.
    #[arg(long)]
    trace_bound: Option<u64>,
    /// Sample size for chain-based checks when enumeration is large.
    #[arg(long, default_value_t = 200)]
    sample: usize,
    /// Seed for deterministic sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => run(args),
    }
}

fn run(args: CheckArgs) -> ExitCode {
    let selection: Vec<CheckId> = match &args.checks {
        None => CheckId::ALL.to_vec(),
        Some(s) => match CheckId::parse_list(s) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("kahncheck: {e}");
                return ExitCode::from(2);
            }
        },
    };
    let input = match input_info(&args.file) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("kahncheck: cannot read {}: {e}", args.file.display());
            return ExitCode::from(2);
        }
    };
    let mut loaded = match document::load(&args.file, args.depth_override) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("kahncheck: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(bound) = args.trace_bound {
        loaded.model.bounds.max_enum_traces = bound;
    }
    let opts = CheckOptions {
        sample: args.sample,
        seed: args.seed,
    };
    let report = run_checks(&loaded, &selection, opts, input);
    match args.format.as_str() {
        "json" => print!("{}", report.to_json()),
        _ => print!("{}", report.to_text()),
    }
    ExitCode::from(report.exit_code() as u8)
}
