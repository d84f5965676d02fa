//! `qaskit`: command-line front end.
//!
//! Exit status: 0 when the operation passes, 1 on a verification failure,
//! 2 on usage, parse or size-limit errors.

mod commands;
mod repro;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qaskit::decomp::Oracle;
use qaskit::par::Exec;
use qaskit::{Error, Limits};

use commands::{Ctx, SynthArgs};

#[derive(Parser)]
#[command(name = "qaskit", version, about = "Quantum access structures and secret-sharing schemes")]
struct Cli {
    /// Worker threads for the parallel sweeps; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    seed: u64,
    /// Print the plain-text rendering instead of the JSON report.
    #[arg(long, global = true)]
    text: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Bundled,
    Unanimity,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "bundled")]
    oracle: OracleKind,
    /// Largest share count per player in a bundled threshold.
    #[arg(long, default_value_t = 5)]
    max_weight: u32,
    /// Largest threshold in a bundled threshold.
    #[arg(long, default_value_t = 25)]
    max_threshold: u32,
}

impl OracleArgs {
    fn oracle(&self) -> Oracle {
        match self.oracle {
            OracleKind::Bundled => Oracle::Bundled {
                max_weight: self.max_weight,
                max_threshold: self.max_threshold,
            },
            OracleKind::Unanimity => Oracle::Unanimity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the no-cloning condition and maximality.
    Validate { input: PathBuf },
    /// Test whether a player set is authorized.
    Closure {
        input: PathBuf,
        /// e.g. `P1,P3` or `P1P3`.
        #[arg(long)]
        set: String,
    },
    /// Extend to a maximal structure.
    Maximalize {
        input: PathBuf,
        /// Also list every maximal extension.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = "smallest-first")]
        policy: String,
        /// Sets to authorize first, in order.
        #[arg(long = "add")]
        script: Vec<String>,
    },
    /// Reduce to a minimal maximal structure, extending first if needed.
    Minmax {
        input: PathBuf,
        #[arg(long, default_value = "smallest-first")]
        policy: String,
        /// Pivots to apply first, in order.
        #[arg(long = "pivot")]
        script: Vec<String>,
    },
    /// Add a player to a minimal maximal structure.
    Grow {
        input: PathBuf,
        #[arg(long)]
        player: String,
        #[arg(long)]
        pivot: Option<String>,
    },
    /// Minimum-block decomposition.
    Decompose {
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Build and verify a scheme for the structure.
    Synth {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        scheme: u8,
        /// One block per minimal set.
        #[arg(long)]
        trivial: bool,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Classical trials per block for scheme 1.
        #[arg(long, default_value_t = 4)]
        trials: usize,
        /// Write the plan JSON here.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Simulate a scheme descriptor or re-verify a plan.
    Simverify { scheme: PathBuf },
    /// Resources of the optimal and trivial constructions.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run the reference cases and diff against the committed transcripts.
    ReproPaper {
        /// Read expected transcripts from this directory.
        #[arg(long)]
        expected: Option<PathBuf>,
        /// Write the current transcripts to this directory.
        #[arg(long)]
        bless: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<report::Outcome> {
    Limits::from_env().context("reading QASKIT_LIMITS")?.install();
    let exec = match cli.jobs {
        Some(1) => Exec::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("starting worker threads")?;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let ctx = Ctx { exec, seed: cli.seed };
    let load = |p: &PathBuf| -> Result<qaskit::format::Parsed> {
        let parsed = commands::load(p)?;
        for w in &parsed.warnings {
            eprintln!("warning: {w}");
        }
        Ok(parsed)
    };
    match &cli.command {
        Command::Validate { input } => commands::validate(&load(input)?, ctx),
        Command::Closure { input, set } => commands::closure(&load(input)?, set),
        Command::Maximalize {
            input,
            all,
            policy,
            script,
        } => {
            let p = load(input)?;
            let policy = commands::extend_policy(policy, script, p.structure.universe())?;
            commands::maximalize(&p, *all, policy, ctx)
        }
        Command::Minmax { input, policy, script } => {
            let p = load(input)?;
            let pivot = commands::pivot_policy(policy, script, p.structure.universe())?;
            commands::minmax(&p, Default::default(), pivot)
        }
        Command::Grow { input, player, pivot } => commands::grow(&load(input)?, player, pivot.as_deref()),
        Command::Decompose { input, oracle } => commands::decompose(&load(input)?, oracle.oracle(), ctx),
        Command::Synth {
            input,
            scheme,
            trivial,
            oracle,
            trials,
            plan_out,
        } => commands::synth(
            &load(input)?,
            &SynthArgs {
                scheme: *scheme,
                trivial: *trivial,
                oracle: oracle.oracle(),
                trials: *trials,
                plan_out: plan_out.clone(),
            },
            ctx,
        ),
        Command::Simverify { scheme } => commands::simverify(scheme, ctx),
        Command::Compare { input, oracle } => commands::compare(&load(input)?, oracle.oracle(), ctx),
        Command::ReproPaper { expected, bless } => repro::repro(ctx, expected.as_deref(), bless.as_deref()),
    }
}

/// Input, parse and size problems exit with 2; everything else with 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Json(_)
                | Error::UnknownPlayer(_)
                | Error::DuplicatePlayer(_)
                | Error::BadPlayerSet(_)
                | Error::SizeLimit { .. }
                | Error::BadLimits(_)
                | Error::NoPlayers
                | Error::EmptyFamily => 2,
                _ => 1,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let json = match serde_json::to_string_pretty(&outcome.report) {
                Ok(j) => j + "\n",
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &json) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if cli.text {
                print!("{}", outcome.text);
            } else {
                print!("{json}");
            }
            if outcome.report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
