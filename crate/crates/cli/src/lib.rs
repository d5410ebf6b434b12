//! Batch front end: argument parsing, input loading, reports and the
//! built-in acceptance checks.

pub mod args;
pub mod commands;
pub mod ensemble;
pub mod inputs;
pub mod report;
pub mod selftest;

use std::io::Write;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, LsystemOp};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BiasTensor { .. } => "bias-tensor",
        Command::Arank { .. } => "arank",
        Command::Prank { .. } => "prank",
        Command::BiasPoly { .. } => "bias-poly",
        Command::Gowers { .. } => "gowers",
        Command::DeriveTensor { .. } => "derive-tensor",
        Command::Taylor { .. } => "taylor",
        Command::Correlate { .. } => "correlate",
        Command::RankCheck { .. } => "rank-check",
        Command::Bogolyubov { .. } => "bogolyubov",
        Command::FindSystem { .. } => "find-system",
        Command::Lsystem { op } => match op {
            LsystemOp::Validate { .. } => "lsystem validate",
            LsystemOp::Intersect { .. } => "lsystem intersect",
            LsystemOp::Restrict { .. } => "lsystem restrict",
        },
        Command::ForcingCheck { .. } => "forcing-check",
        Command::TowerBound { .. } => "tower-bound",
        Command::Ensemble(_) => "ensemble",
        Command::Selftest => "selftest",
    }
}

/// Exit code for a failed command: 1 when an internal verification failed,
/// 3 when a search ran out of budget, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<trl_core::Error>() {
        Some(trl_core::Error::VerificationFailed(_)) => 1,
        Some(trl_core::Error::BudgetExhausted(_)) => 3,
        _ => 2,
    }
}

/// Parses `argv`, runs the command, writes the report and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let mut ctx = commands::RunContext {
        seed: cli.global.seed,
        ..Default::default()
    };
    let result = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::run(&cli.command, &mut ctx)),
            Err(e) => Err(anyhow::anyhow!("cannot start {n} worker threads: {e}")),
        },
        None => commands::run(&cli.command, &mut ctx),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let timing = cli.global.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let report = report::build(command_name(&cli.command), &argv, &ctx.inputs, &outcome, timing);
    let text = report::render(&report, &outcome, cli.global.format);
    let written = match &cli.global.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    outcome.exit
}
