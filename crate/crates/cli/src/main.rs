//! `cohmig`: run or validate a scenario config.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherence_core::config::{parse_config, Diagnostic};
use coherence_core::runner::{run, RunError};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cohmig", version, about = "Coherence migration simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV files.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the summary on stdout.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Check a config without running it. Prints one diagnostic per line.
    Validate { config: PathBuf },
}

fn print_diagnostics(path: &std::path::Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn read(path: &std::path::Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_RUNTIME)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match parse_config(&text) {
                Ok(_) => {
                    println!("{}: ok", config.display());
                    ExitCode::SUCCESS
                }
                Err(diags) => {
                    print_diagnostics(&config, &diags);
                    ExitCode::from(EXIT_CONFIG)
                }
            }
        }
        Command::Run {
            config,
            seed,
            out,
            quiet,
        } => {
            let text = match read(&config) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let mut cfg = match parse_config(&text) {
                Ok(cfg) => cfg,
                Err(diags) => {
                    print_diagnostics(&config, &diags);
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_path = out;
            }
            match run(&cfg) {
                Ok(report) => {
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    if !quiet {
                        for line in &report.summary {
                            println!("{line}");
                        }
                        for f in &report.files {
                            println!("wrote {}", f.display());
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    match &e {
                        RunError::Check(_) => eprintln!("check failed: {e}"),
                        _ => eprintln!("error: {e}"),
                    }
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
    }
}
