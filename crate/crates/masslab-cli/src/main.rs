//! Command-line front end: runs one experiment from a JSON config (or the
//! built-in selftest battery) and writes the report files.
//!
//! Exit code 0 when every acceptance check in scope passes, 1 when any
//! fails, 2 on configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use masslab::runner::{self, ExperimentKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "masslab",
    version,
    about = "Numerical experiments on reproducing kernels and random holomorphic sections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Path to the flat JSON config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json / rows.csv / cache (overrides the
    /// config's "out" key).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count override (results are identical at any value).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Orthonormal-basis construction and Gram residuals.
    Basis(ExperimentArgs),
    /// Kernel function constancy, dimensional density, near/off-diagonal laws.
    KernelCheck(ExperimentArgs),
    /// Exact variance law of mass statistics along the degree list.
    Variance(ExperimentArgs),
    /// Normality of the trace-normalized mass statistic.
    Clt(ExperimentArgs),
    /// Covariance integral conditions behind the normality mechanism.
    TsConditions(ExperimentArgs),
    /// Almost-sure equidistribution along a summable degree law.
    Equidistribution(ExperimentArgs),
    /// Quick closed-form battery across all modules.
    Selftest {
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Basis(a) => (ExperimentKind::Basis, a),
        Command::KernelCheck(a) => (ExperimentKind::KernelCheck, a),
        Command::Variance(a) => (ExperimentKind::Variance, a),
        Command::Clt(a) => (ExperimentKind::Clt, a),
        Command::TsConditions(a) => (ExperimentKind::TsConditions, a),
        Command::Equidistribution(a) => (ExperimentKind::Equidistribution, a),
        Command::Selftest { threads } => return run_selftest(threads),
    };
    run_experiment(kind, args)
}

fn run_experiment(kind: ExperimentKind, args: ExperimentArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut config: RunConfig = match runner::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            for msg in &e.errors {
                eprintln!("config error: {msg}");
            }
            return ExitCode::from(2);
        }
    };
    if config.kind != kind {
        eprintln!(
            "config kind \"{}\" does not match subcommand \"{}\"",
            config.kind.id(),
            kind.id()
        );
        return ExitCode::from(2);
    }
    if let Some(out) = args.out {
        config.out = Some(out.to_string_lossy().into_owned());
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = threads.max(1);
    }

    let report = match runner::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("run failed: {e}");
            return ExitCode::from(1);
        }
    };

    println!(
        "{} (seed {}, spec {})",
        config.kind.id(),
        config.seed,
        report.spec_hash
    );
    for row in &report.rows {
        println!(
            "  k={:<5} phi={:<8} estimate={:<24} target={:<24} {}",
            row.k,
            row.phi,
            row.estimate,
            row.target,
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    for check in &report.checks {
        println!(
            "  [{}] {}",
            if check.pass { "pass" } else { "FAIL" },
            check.name
        );
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
    if let Some(out) = &config.out {
        println!("report written to {out}");
    }
    if report.all_pass {
        println!("all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("FAILURES present");
        ExitCode::from(1)
    }
}

fn run_selftest(threads: usize) -> ExitCode {
    let results = runner::selftest(threads.max(1));
    let mut all = true;
    for r in &results {
        println!("[{}] {}", if r.pass { "pass" } else { "FAIL" }, r.name);
        all &= r.pass;
    }
    if all {
        println!("selftest: {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("selftest: failures present");
        ExitCode::from(1)
    }
}
