use clap::{error::ErrorKind, Parser, Subcommand};

use thetalab_cli::commands::{self, CountArgs, ExploreArgs, VerifyArgs};
use thetalab_cli::config::CliError;
use thetalab_cli::exit;

/// Numerical experiments on 2-torsion points of translated theta divisors.
#[derive(Parser)]
#[command(name = "thetalab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify all 4^g two-torsion points against a translated theta
    /// divisor and check the count bounds
    Count(CountArgs),
    /// Run the identity and property suites
    Verify(VerifyArgs),
    /// Sample families of period matrices and stream a CSV of counts
    Explore(ExploreArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(exit::OK);
            }
            _ => {
                eprint!("{e}");
                std::process::exit(exit::USAGE);
            }
        },
    };
    let outcome = match &cli.command {
        Command::Count(args) => commands::run_count(args),
        Command::Verify(args) => commands::run_verify(args),
        Command::Explore(args) => commands::run_explore(args),
    };
    let code = match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            exit::USAGE
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            exit::VIOLATION
        }
    };
    std::process::exit(code);
}
