use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One offending location found while reading a panel file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestIssue {
    /// 1-based line number in the source file, when the issue is tied to a row.
    pub line: Option<usize>,
    pub column: Option<String>,
    pub kind: IngestIssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IngestIssueKind {
    Schema,
    UnknownColumn,
    MissingColumn,
    NonNumeric,
    BadKey,
    DuplicateKey,
}

impl fmt::Display for IngestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.column) {
            (Some(line), Some(col)) => write!(f, "line {line}, column `{col}`: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(col)) => write!(f, "column `{col}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

fn join_issues(issues: &[IngestIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("cannot aggregate an empty set of breakdowns")]
    EmptyAggregate,

    #[error("cannot aggregate breakdowns from different years ({0} and {1})")]
    MixedYears(i32, i32),

    #[error("growth is undefined for a non-positive starting value ({0})")]
    GrowthUndefined(f64),

    #[error("invalid factor set: {0}")]
    FactorSet(String),

    #[error("non-finite partial derivative for factor `{factor}`")]
    NonFinitePartial { factor: String },

    #[error("singular system matrix at segment {segment}")]
    SingularMatrix { segment: usize },

    #[error("share of `{member}` left [0, 1] at segment {segment}: {value}")]
    ShareOutOfRange {
        segment: usize,
        member: String,
        value: f64,
    },

    #[error("shares sum to {sum} after segment {segment}")]
    ShareSumDrift { segment: usize, sum: f64 },

    #[error("malformed panel: {}", join_issues(.0))]
    Ingest(Vec<IngestIssue>),

    #[error(
        "series {series}: cannot extrapolate to year(s) {years:?} outside observed span {span:?}"
    )]
    Extrapolation {
        series: String,
        years: Vec<i32>,
        span: (i32, i32),
    },

    #[error("years are not consecutive: {prev} followed by {next}")]
    YearGap { prev: i32, next: i32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Errors caused by bad input data or configuration, as opposed to
    /// numerical failures or I/O.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::EmptyAggregate
                | Error::MixedYears(..)
                | Error::GrowthUndefined(_)
                | Error::FactorSet(_)
                | Error::Ingest(_)
                | Error::Extrapolation { .. }
                | Error::YearGap { .. }
        )
    }
}
