#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Config, Failure};
use crate::output::Outcome;

#[derive(Parser)]
#[command(
    name = "ncfatou",
    version,
    about = "Run Fock-space Lebesgue decomposition experiments"
)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Run a named invariant suite.
    Verify {
        #[arg(long, default_value = "core")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let (name, seed, dir, outcome): (String, u64, PathBuf, Outcome) = match &cli.command {
        Command::Run { config } => {
            let cfg = Config::load(config)?;
            let out = experiments::run(&cfg)?;
            (cfg.experiment.name().to_string(), cfg.seed, cfg.output_dir(), out)
        }
        Command::Verify { suite, seed } => {
            let out = verify::run_suite(suite, *seed)?;
            let dir = std::env::var_os("NCFATOU_OUTDIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out").join(format!("verify-{suite}")));
            (format!("verify {suite}"), *seed, dir, out)
        }
    };
    output::write_outcome(&dir, &name, seed, &outcome)?;
    if !cli.quiet {
        print!("{}", output::render_summary(&name, &dir, &outcome));
    }
    Ok(outcome.failed().is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("validation error: --threads: must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .expect("thread pool configured once");
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("numerical failure: one or more checks failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                Failure::Validation(_) => 2,
                Failure::Numerical(_) => 3,
            })
        }
    }
}
