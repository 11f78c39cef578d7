//! Turning a panel into per-series intensity histories, ledgers and metrics.
//!
//! A series is one (state, locale) history of [`IntensityBreakdown`]s. Besides
//! the observed cells, [`model_panel`] builds a combined `all` series for every
//! state observed in more than one locale, and national series labelled
//! [`NATIONAL`] for each locale and for all households.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use crate::decomp::{build_problem_from_breakdowns, decompose, ContributionLedger, FactorSet};
use crate::error::{Error, Result};
use crate::ingest::PanelDataset;
use crate::metrics::{cumulative_series, YearInput, YearMetrics};
use crate::model::{aggregate, household_intensity, IseerMode, IntensityBreakdown, Locale};

/// State label of the national aggregates.
pub const NATIONAL: &str = "IN";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesKey {
    pub state: String,
    pub locale: Locale,
}

impl SeriesKey {
    pub fn new(state: impl Into<String>, locale: Locale) -> Self {
        Self {
            state: state.into(),
            locale,
        }
    }

    pub fn is_national(&self) -> bool {
        self.state == NATIONAL
    }
}

impl std::fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.state, self.locale)
    }
}

pub type Series = BTreeMap<i32, IntensityBreakdown>;

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub series: BTreeMap<SeriesKey, Series>,
}

impl Panel {
    pub fn get(&self, state: &str, locale: Locale) -> Option<&Series> {
        self.series.get(&SeriesKey::new(state, locale))
    }
}

/// Runs the appliance model on every record and builds the aggregate series.
///
/// A national year is produced only when every state contributing to that
/// series has the year, so aggregates never mix state coverage.
pub fn model_panel(dataset: &PanelDataset, mode: IseerMode) -> Result<Panel> {
    let mut series: BTreeMap<SeriesKey, Series> = BTreeMap::new();
    for r in dataset.records() {
        let b = household_intensity(r, mode)?;
        series
            .entry(SeriesKey::new(&r.state, r.locale))
            .or_default()
            .insert(r.year, b);
    }
    if dataset.states().contains(NATIONAL) {
        return Err(Error::validation(
            "state",
            format!("`{NATIONAL}` is reserved for national aggregates"),
        ));
    }

    // combined urban + rural series per state
    let mut by_state: BTreeMap<String, Vec<Locale>> = BTreeMap::new();
    for key in series.keys() {
        by_state.entry(key.state.clone()).or_default().push(key.locale);
    }
    for (state, locales) in &by_state {
        if locales.len() < 2 || locales.contains(&Locale::All) {
            continue;
        }
        let parts: Vec<&Series> = locales
            .iter()
            .map(|l| &series[&SeriesKey::new(state, *l)])
            .collect();
        let combined = aggregate_years(&parts, state, Locale::All)?;
        series.insert(SeriesKey::new(state, Locale::All), combined);
    }

    let mut national = BTreeMap::new();
    for locale in [Locale::Urban, Locale::Rural, Locale::All] {
        let parts: Vec<&Series> = series
            .iter()
            .filter(|(k, _)| k.locale == locale)
            .map(|(_, s)| s)
            .collect();
        if parts.is_empty() {
            continue;
        }
        national.insert(
            SeriesKey::new(NATIONAL, locale),
            aggregate_years(&parts, NATIONAL, locale)?,
        );
    }
    series.extend(national);
    Ok(Panel { series })
}

fn aggregate_years(parts: &[&Series], state: &str, locale: Locale) -> Result<Series> {
    let years: BTreeSet<i32> = parts.iter().flat_map(|s| s.keys().copied()).collect();
    let mut out = Series::new();
    for year in years {
        let cells: Option<Vec<IntensityBreakdown>> =
            parts.iter().map(|s| s.get(&year).cloned()).collect();
        if let Some(cells) = cells {
            out.insert(year, aggregate(&cells, state, locale)?);
        }
    }
    Ok(out)
}

fn cell<'a>(series: &'a Series, key: &SeriesKey, year: i32) -> Result<&'a IntensityBreakdown> {
    series
        .get(&year)
        .ok_or_else(|| Error::validation("years", format!("series {key} has no data for {year}")))
}

/// Straight-line decomposition of a series between two of its years.
pub fn decompose_between(
    key: &SeriesKey,
    series: &Series,
    from: i32,
    to: i32,
    factors: FactorSet,
    segments: usize,
) -> Result<ContributionLedger> {
    let start = cell(series, key, from)?;
    let end = cell(series, key, to)?;
    decompose(&build_problem_from_breakdowns(start, end, factors, segments)?)
}

/// Chained ledgers `t − 1 → t` for every `t` in `years`.
pub fn yearly_ledgers(
    key: &SeriesKey,
    series: &Series,
    years: RangeInclusive<i32>,
    factors: FactorSet,
    segments: usize,
) -> Result<Vec<(i32, ContributionLedger)>> {
    years
        .map(|t| Ok((t, decompose_between(key, series, t - 1, t, factors, segments)?)))
        .collect()
}

/// Annual and cumulative decarbonization over `years`, each year measured
/// against the one before it.
pub fn series_metrics(
    key: &SeriesKey,
    series: &Series,
    years: RangeInclusive<i32>,
    factors: FactorSet,
    segments: usize,
) -> Result<Vec<YearMetrics>> {
    let ledgers = yearly_ledgers(key, series, years, factors, segments)?;
    let inputs = ledgers
        .iter()
        .map(|(t, ledger)| {
            let end = cell(series, key, *t)?;
            Ok(YearInput {
                year: *t,
                ledger,
                households: end.households,
                emissions: end.emissions_total,
                nsdp: end.nsdp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    cumulative_series(&inputs)
}
