//! Command-line arguments and the resolved run configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cooldecomp_core::decomp::{FactorSet, DEFAULT_SEGMENTS};
use cooldecomp_core::model::{IseerMode, Locale};

use crate::CliError;

/// Environment variable that overrides the default number of Euler segments.
pub const SEGMENTS_ENV: &str = "COOLDECOMP_SEGMENTS";

#[derive(Debug, Parser)]
#[command(name = "cooldecomp", version, about = "Residential space-cooling carbon intensity decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Per-household carbon intensity by appliance, with aggregates.
    Model(Options),
    /// Driver contributions to the change in intensity between two years.
    Decompose(Options),
    /// Annual and cumulative decarbonization measures.
    Metrics(Options),
    /// Chart files: intensity series, contributions, state ranking, efficiency.
    Report(Options),
    /// Check a panel file and list problems.
    Validate(Options),
}

impl Command {
    pub fn options(&self) -> &Options {
        match self {
            Command::Model(o)
            | Command::Decompose(o)
            | Command::Metrics(o)
            | Command::Report(o)
            | Command::Validate(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LocaleArg {
    Urban,
    Rural,
    All,
}

impl From<LocaleArg> for Locale {
    fn from(l: LocaleArg) -> Self {
        match l {
            LocaleArg::Urban => Locale::Urban,
            LocaleArg::Rural => Locale::Rural,
            LocaleArg::All => Locale::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

/// `A:B` or a single year `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    pub from: i32,
    pub to: i32,
}

fn parse_years(s: &str) -> Result<YearRange, String> {
    let (a, b) = s.split_once(':').unwrap_or((s, s));
    let year = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|_| format!("`{v}` is not a year"))
    };
    let (from, to) = (year(a)?, year(b)?);
    if from > to {
        return Err(format!("range {from}:{to} runs backwards"));
    }
    Ok(YearRange { from, to })
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct Options {
    /// Panel CSV file.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Directory for output files; tables go to stdout when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated state codes; `IN` selects the national aggregates.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub states: Option<Vec<String>>,
    /// Restrict to one locale; `all` is the all-household series.
    #[arg(long, value_enum)]
    pub locale: Option<LocaleArg>,
    /// Year range `A:B`.
    #[arg(long, value_name = "A:B", value_parser = parse_years)]
    pub years: Option<YearRange>,
    /// Drivers to decompose over; p, n, e and k are required, g and w optional.
    #[arg(long, value_name = "LIST", default_value = "p,n,e,k,w")]
    pub factors: String,
    /// Euler segments per decomposition [default: 16000, or $COOLDECOMP_SEGMENTS].
    #[arg(long, value_name = "INT")]
    pub segments: Option<usize>,
    /// Multiply by ISEER in the room AC formula instead of dividing.
    #[arg(long)]
    pub multiply_iseer: bool,
    /// Decimals for kgCO₂ and kWh values (ratios get three more).
    #[arg(long, value_name = "INT")]
    pub precision: Option<usize>,
    /// Output kind: csv tables or svg charts [default: csv; svg for report]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Options after defaults, environment and parsing are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    /// `None` keeps every state, including the national aggregates.
    pub states: Option<BTreeSet<String>>,
    pub locale: Option<Locale>,
    pub years: Option<YearRange>,
    pub factors: FactorSet,
    pub segments: usize,
    pub mode: IseerMode,
    pub precision: usize,
    pub format: Option<Format>,
}

impl RunConfig {
    /// `env_segments` is the value of [`SEGMENTS_ENV`], if set; the flag wins.
    pub fn resolve(opts: &Options, env_segments: Option<&str>) -> Result<Self, CliError> {
        let segments = match (opts.segments, env_segments) {
            (Some(n), _) => n,
            (None, Some(v)) => v.trim().parse().map_err(|_| {
                CliError::Usage(format!("{SEGMENTS_ENV}=`{v}` is not a positive integer"))
            })?,
            (None, None) => DEFAULT_SEGMENTS,
        };
        if segments == 0 {
            return Err(CliError::Usage("segments must be at least 1".into()));
        }
        let states = opts.states.as_ref().map(|list| {
            list.iter()
                .map(|s| s.trim().to_ascii_uppercase())
                .filter(|s| !s.is_empty())
                .collect::<BTreeSet<_>>()
        });
        if states.as_ref().is_some_and(BTreeSet::is_empty) {
            return Err(CliError::Usage("--states is empty".into()));
        }
        Ok(Self {
            input: opts.input.clone(),
            out: opts.out.clone(),
            states,
            locale: opts.locale.map(Locale::from),
            years: opts.years,
            factors: FactorSet::parse(&opts.factors)?,
            segments,
            mode: if opts.multiply_iseer {
                IseerMode::MultiplyByIseer
            } else {
                IseerMode::DivideByIseer
            },
            precision: opts.precision.unwrap_or(1),
            format: opts.format,
        })
    }

    /// A configuration with defaults for `input`, for library callers.
    pub fn for_input(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            out: None,
            states: None,
            locale: None,
            years: None,
            factors: FactorSet::default(),
            segments: DEFAULT_SEGMENTS,
            mode: IseerMode::default(),
            precision: 1,
            format: None,
        }
    }
}
