use std::path::PathBuf;
use std::process::ExitCode;

use autotherm::par::Execution;
use autotherm_cli::{run_file, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "autotherm", version, about = "Absorption machines driven by quantum batteries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write CSV tables.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Compare against the exact oracle at g, g/2 and g/4.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        quiet: bool,
        /// Evaluate grid points one at a time.
        #[arg(long)]
        sequential: bool,
        /// Dotted-path override, e.g. `machine.g=0.02`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            out,
            oracle,
            quiet,
            sequential,
            overrides,
        } => {
            let opts = RunOptions {
                out,
                oracle,
                quiet,
                exec: if sequential { Execution::Sequential } else { Execution::Parallel },
            };
            match run_file(&scenario, &overrides, &opts) {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{}: {e}", e.name());
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
