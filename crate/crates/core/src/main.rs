use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use idealgas_contact::cli::{
    execute, ConventionChoice, Format, Invocation, Overrides, Subcommand, EXIT_USAGE,
};
use idealgas_contact::dsl::Ordering;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Classical,
    Reduce,
    Contact,
    Quantize,
    Expect,
    Dsl,
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Classical => Subcommand::Classical,
            Command::Reduce => Subcommand::Reduce,
            Command::Contact => Subcommand::Contact,
            Command::Quantize => Subcommand::Quantize,
            Command::Expect => Subcommand::Expect,
            Command::Dsl => Subcommand::Dsl,
            Command::All => Subcommand::All,
        }
    }
}

/// Numerical verification of the ideal gas's contact geometry and its
/// quantum-like wave equations.
#[derive(Debug, Parser)]
#[command(name = "idealgas", version)]
struct Args {
    /// Suite to run
    #[arg(value_enum)]
    command: Command,

    /// JSON run configuration
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Report format: table, json or csv
    #[arg(long, default_value = "table", value_parser = clap::builder::ValueParser::new(str::parse::<Format>))]
    format: Format,

    /// Also write the report to this file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Equation of state for the dsl suite; repeatable
    #[arg(long = "expr", value_name = "EXPR")]
    exprs: Vec<String>,

    /// Operator ordering: Vp, pV or Weyl
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<Ordering>))]
    ordering: Option<Ordering>,

    /// Contact-form sign convention: paper, standard or both
    #[arg(long, value_parser = clap::builder::ValueParser::new(str::parse::<ConventionChoice>))]
    convention: Option<ConventionChoice>,

    /// Seed for randomized sweeps
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let inv = Invocation {
        command: args.command.into(),
        config: args.config,
        format: args.format,
        out: args.out,
        overrides: Overrides {
            exprs: args.exprs,
            ordering: args.ordering,
            convention: args.convention,
            seed: args.seed,
        },
    };
    match execute(&inv) {
        Ok((text, code)) => {
            if inv.out.is_none() {
                print!("{text}");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
