//! Batch front end: load a config, run suites, emit reports.

pub mod config;
pub mod report;
pub mod suites;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

pub use config::{ConfigError, ConventionChoice, RunConfig};
pub use report::{CheckOutcome, Format, Report, Status};

use crate::dsl::{DslError, Ordering};
use suites::Context;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Classical,
    Reduce,
    Contact,
    Quantize,
    Expect,
    Dsl,
    All,
}

impl Subcommand {
    pub const SUITES: [Subcommand; 6] = [
        Subcommand::Classical,
        Subcommand::Reduce,
        Subcommand::Contact,
        Subcommand::Quantize,
        Subcommand::Expect,
        Subcommand::Dsl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Classical => "classical",
            Subcommand::Reduce => "reduce",
            Subcommand::Contact => "contact",
            Subcommand::Quantize => "quantize",
            Subcommand::Expect => "expect",
            Subcommand::Dsl => "dsl",
            Subcommand::All => "all",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::SUITES
            .into_iter()
            .chain([Subcommand::All])
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand '{s}'"))
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("DSL parse error: {0}")]
    Parse(DslError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write report to {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            _ => EXIT_USAGE,
        }
    }
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub exprs: Vec<String>,
    pub ordering: Option<Ordering>,
    pub convention: Option<ConventionChoice>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(o) = self.ordering {
            cfg.ordering = o;
        }
        if let Some(c) = self.convention {
            cfg.convention = c;
        }
        if let Some(s) = self.seed {
            cfg.sweep.seed = s;
        }
        cfg
    }
}

/// Run one subcommand, or all of them in a fixed order.
pub fn run_suites(
    command: Subcommand,
    cfg: RunConfig,
    exprs: &[String],
) -> Result<Report, CliError> {
    let ctx = Context::new(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let selected: Vec<Subcommand> = match command {
        Subcommand::All => Subcommand::SUITES.to_vec(),
        one => vec![one],
    };
    let exprs: Vec<String> = if exprs.is_empty() {
        suites::PAPER_LAWS.iter().map(|s| s.to_string()).collect()
    } else {
        exprs.to_vec()
    };
    let mut report = Report::default();
    for c in selected {
        let outcomes = match c {
            Subcommand::Classical => suites::classical(&ctx),
            Subcommand::Reduce => suites::reduce(&ctx),
            Subcommand::Contact => suites::contact(&ctx),
            Subcommand::Quantize => suites::quantize(&ctx),
            Subcommand::Expect => suites::expect(&ctx),
            Subcommand::Dsl => suites::dsl(&ctx, &exprs).map_err(|e| {
                if e.is_parse_error() {
                    CliError::Parse(e)
                } else {
                    CliError::Usage(e.to_string())
                }
            })?,
            Subcommand::All => unreachable!("expanded above"),
        };
        report.push(c.name(), outcomes);
    }
    Ok(report)
}

/// Everything a single invocation needs.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Subcommand,
    pub config: PathBuf,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
}

/// Load, run and emit; returns the rendered report and the exit code.
pub fn execute(inv: &Invocation) -> Result<(String, i32), CliError> {
    let cfg = inv.overrides.apply(RunConfig::load(&inv.config)?);
    let report = run_suites(inv.command, cfg, &inv.overrides.exprs)?;
    let text = report.render(inv.format);
    if let Some(path) = &inv.out {
        std::fs::write(path, &text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok((text, report.exit_code()))
}
