//! The five subcommands. Each returns its artifacts staged in memory; the
//! typed `*_rows` functions behind them are public for library use.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use cooldecomp_core::decomp::ContributionLedger;
use cooldecomp_core::ingest::{self, PanelDataset, SCHEMA_V1};
use cooldecomp_core::metrics::YearMetrics;
use cooldecomp_core::model::{IntensityBreakdown, Locale};
use cooldecomp_core::pipeline::{self, model_panel, Panel, Series, SeriesKey, NATIONAL};
use rayon::prelude::*;

use crate::chart;
use crate::config::{Format, RunConfig};
use crate::output::Staged;
use crate::table::{self, LedgerRow, Numbers};
use crate::{exit, CliError};

pub fn load_dataset(cfg: &RunConfig) -> Result<PanelDataset, CliError> {
    Ok(ingest::load(&cfg.input, SCHEMA_V1)?)
}

fn dataset_years(ds: &PanelDataset) -> Result<(i32, i32), CliError> {
    ds.year_range()
        .ok_or_else(|| CliError::Usage("the panel contains no records".into()))
}

/// Fills `fill` by interpolation when given, then models the panel.
fn modelled(cfg: &RunConfig, ds: &PanelDataset, fill: Option<RangeInclusive<i32>>) -> Result<Panel, CliError> {
    if ds.is_empty() {
        return Err(CliError::Usage("the panel contains no records".into()));
    }
    let panel = match fill {
        Some(range) => model_panel(&ingest::interpolate(ds, range)?, cfg.mode)?,
        None => model_panel(ds, cfg.mode)?,
    };
    Ok(panel)
}

/// Series matching the state and locale filters, in key order.
///
/// Unknown state codes and filters that match nothing are errors.
pub fn select<'a>(panel: &'a Panel, cfg: &RunConfig) -> Result<Vec<(&'a SeriesKey, &'a Series)>, CliError> {
    if let Some(states) = &cfg.states {
        let known: BTreeSet<&str> = panel.series.keys().map(|k| k.state.as_str()).collect();
        let unknown: Vec<&str> = states
            .iter()
            .map(String::as_str)
            .filter(|s| !known.contains(s))
            .collect();
        if !unknown.is_empty() {
            return Err(CliError::Usage(format!(
                "unknown state code(s): {}",
                unknown.join(", ")
            )));
        }
    }
    let picked: Vec<_> = panel
        .series
        .iter()
        .filter(|(k, _)| cfg.states.as_ref().is_none_or(|s| s.contains(&k.state)))
        .filter(|(k, _)| cfg.locale.is_none_or(|l| k.locale == l))
        .collect();
    if picked.is_empty() {
        return Err(CliError::Usage("the state/locale filter matches no series".into()));
    }
    Ok(picked)
}

fn numbers(cfg: &RunConfig) -> Numbers {
    Numbers {
        precision: cfg.precision,
    }
}

/// Modelled cells of the selected series within the year filter.
pub fn model_rows(cfg: &RunConfig) -> Result<Vec<(SeriesKey, IntensityBreakdown)>, CliError> {
    let fill = cfg.years.map(|y| y.from..=y.to);
    let panel = modelled(cfg, &load_dataset(cfg)?, fill.clone())?;
    let mut rows = Vec::new();
    for (key, series) in select(&panel, cfg)? {
        for (year, b) in series {
            if fill.as_ref().is_none_or(|r| r.contains(year)) {
                rows.push((key.clone(), b.clone()));
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Usage("no records in the requested years".into()));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerResult {
    pub key: SeriesKey,
    pub from: i32,
    pub to: i32,
    pub ledger: ContributionLedger,
}

fn decompose_selected(
    cfg: &RunConfig,
    panel: &Panel,
    from: i32,
    to: i32,
) -> Result<Vec<LedgerResult>, CliError> {
    select(panel, cfg)?
        .into_par_iter()
        .map(|(key, series)| {
            let ledger = pipeline::decompose_between(key, series, from, to, cfg.factors, cfg.segments)?;
            Ok(LedgerResult {
                key: key.clone(),
                from,
                to,
                ledger,
            })
        })
        .collect()
}

/// Straight-line decomposition between the ends of the year range (the whole
/// panel span by default).
pub fn decompose_rows(cfg: &RunConfig) -> Result<Vec<LedgerResult>, CliError> {
    let ds = load_dataset(cfg)?;
    let (from, to, fill) = match cfg.years {
        Some(y) => (y.from, y.to, Some(y.from..=y.to)),
        None => {
            let (a, b) = dataset_years(&ds)?;
            (a, b, None)
        }
    };
    let panel = modelled(cfg, &ds, fill)?;
    decompose_selected(cfg, &panel, from, to)
}

/// Reporting years for metrics: `A..=B`, each measured against the year
/// before, so the panel must also cover `A − 1`.
fn metrics_years(cfg: &RunConfig, ds: &PanelDataset) -> Result<RangeInclusive<i32>, CliError> {
    match cfg.years {
        Some(y) => Ok(y.from..=y.to),
        None => {
            let (a, b) = dataset_years(ds)?;
            if a == b {
                return Err(CliError::Usage(format!(
                    "the panel covers only {a}; metrics need at least two years"
                )));
            }
            Ok(a + 1..=b)
        }
    }
}

fn metrics_selected(
    cfg: &RunConfig,
    panel: &Panel,
    years: RangeInclusive<i32>,
) -> Result<Vec<(SeriesKey, Vec<YearMetrics>)>, CliError> {
    select(panel, cfg)?
        .into_par_iter()
        .map(|(key, series)| {
            let m = pipeline::series_metrics(key, series, years.clone(), cfg.factors, cfg.segments)?;
            Ok((key.clone(), m))
        })
        .collect()
}

pub fn metrics_rows(cfg: &RunConfig) -> Result<Vec<(SeriesKey, Vec<YearMetrics>)>, CliError> {
    let ds = load_dataset(cfg)?;
    let years = metrics_years(cfg, &ds)?;
    let panel = modelled(cfg, &ds, Some(years.start() - 1..=*years.end()))?;
    metrics_selected(cfg, &panel, years)
}

fn format_or(cfg: &RunConfig, default: Format) -> Format {
    cfg.format.unwrap_or(default)
}

pub fn cmd_model(cfg: &RunConfig) -> Result<Staged, CliError> {
    let rows = model_rows(cfg)?;
    Ok(match format_or(cfg, Format::Csv) {
        Format::Csv => {
            let cells: Vec<(SeriesKey, &IntensityBreakdown)> =
                rows.iter().map(|(k, b)| (k.clone(), b)).collect();
            Staged::file("intensity.csv", table::intensity_table(&cells, numbers(cfg)))
        }
        Format::Svg => Staged::file("intensity.svg", intensity_chart(&rows)?),
    })
}

pub fn cmd_decompose(cfg: &RunConfig) -> Result<Staged, CliError> {
    let results = decompose_rows(cfg)?;
    Ok(match format_or(cfg, Format::Csv) {
        Format::Csv => Staged::file("decomposition.csv", decomposition_csv(cfg, &results)),
        Format::Svg => Staged::file("contributions.svg", contributions_chart(cfg, &results)?),
    })
}

pub fn cmd_metrics(cfg: &RunConfig) -> Result<Staged, CliError> {
    let series = metrics_rows(cfg)?;
    Ok(match format_or(cfg, Format::Csv) {
        Format::Csv => Staged::file("metrics.csv", table::metrics_table(&series, numbers(cfg))),
        Format::Svg => Staged::file("efficiency.svg", efficiency_chart(&series)?),
    })
}

/// All four charts (or their data as CSV) over one year range.
pub fn cmd_report(cfg: &RunConfig) -> Result<Staged, CliError> {
    let ds = load_dataset(cfg)?;
    let (from, to) = match cfg.years {
        Some(y) => (y.from, y.to),
        None => dataset_years(&ds)?,
    };
    if from == to {
        return Err(CliError::Usage(format!(
            "report needs a range of at least two years, got {from}:{to}"
        )));
    }
    let panel = modelled(cfg, &ds, Some(from..=to))?;
    let selected = select(&panel, cfg)?;
    let cells: Vec<(SeriesKey, IntensityBreakdown)> = selected
        .iter()
        .flat_map(|(k, s)| s.range(from..=to).map(|(_, b)| ((*k).clone(), b.clone())))
        .collect();
    let ledgers = decompose_selected(cfg, &panel, from, to)?;
    let metrics = metrics_selected(cfg, &panel, from + 1..=to)?;
    let ranked = ranking(&panel, cfg, to)?;

    let num = numbers(cfg);
    let mut staged = Staged::default();
    match format_or(cfg, Format::Svg) {
        Format::Svg => {
            staged.push("intensity.svg", intensity_chart(&cells)?);
            staged.push("contributions.svg", contributions_chart(cfg, &ledgers)?);
            staged.push("ranking.svg", ranking_chart(&ranked, to)?);
            staged.push("efficiency.svg", efficiency_chart(&metrics)?);
        }
        Format::Csv => {
            let refs: Vec<(SeriesKey, &IntensityBreakdown)> =
                cells.iter().map(|(k, b)| (k.clone(), b)).collect();
            staged.push("intensity.csv", table::intensity_table(&refs, num));
            staged.push("decomposition.csv", decomposition_csv(cfg, &ledgers));
            staged.push("ranking.csv", table::ranking_table(&ranked, to, num));
            staged.push("metrics.csv", table::metrics_table(&metrics, num));
        }
    }
    Ok(staged)
}

/// Reports findings on stdout; exits 1 when any is an error.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Staged, CliError> {
    let ds = load_dataset(cfg)?;
    let report = ingest::validate(&ds);
    let text = table::validation_table(&report);
    let mut staged = Staged::file("validation.csv", text.clone());
    if report.has_errors() {
        staged.code = exit::VALIDATION;
        staged.message = text;
    } else if cfg.out.is_some() {
        staged.message = text;
    }
    Ok(staged)
}

fn decomposition_csv(cfg: &RunConfig, results: &[LedgerResult]) -> String {
    let rows: Vec<LedgerRow> = results
        .iter()
        .map(|r| LedgerRow {
            key: r.key.clone(),
            from: r.from,
            to: r.to,
            ledger: &r.ledger,
        })
        .collect();
    table::decomposition_table(&rows, cfg.factors, numbers(cfg))
}

fn intensity_chart(rows: &[(SeriesKey, IntensityBreakdown)]) -> Result<String, CliError> {
    let mut series: Vec<(String, Vec<(i32, f64)>)> = Vec::new();
    for (key, b) in rows {
        let name = key.to_string();
        match series.last_mut() {
            Some((n, pts)) if *n == name => pts.push((b.year, b.c_total)),
            _ => series.push((name, vec![(b.year, b.c_total)])),
        }
    }
    chart::line_chart("Space-cooling carbon intensity", "kgCO2 per household", &series)
}

fn contributions_chart(cfg: &RunConfig, results: &[LedgerResult]) -> Result<String, CliError> {
    let groups = cfg.factors.groups();
    let categories: Vec<(String, Vec<f64>)> = results
        .iter()
        .map(|r| {
            (
                r.key.to_string(),
                groups.iter().map(|g| r.ledger.group(g).unwrap_or(0.0)).collect(),
            )
        })
        .collect();
    let title = match results.first() {
        Some(r) => format!("Contributions to the change in intensity, {}-{}", r.from, r.to),
        None => "Contributions to the change in intensity".into(),
    };
    chart::grouped_bars(&title, "kgCO2 per household", &groups, &categories)
}

fn efficiency_chart(series: &[(SeriesKey, Vec<YearMetrics>)]) -> Result<String, CliError> {
    let lines: Vec<(String, Vec<(i32, f64)>)> = series
        .iter()
        .map(|(k, m)| (k.to_string(), m.iter().map(|y| (y.year, y.cumulative.efficiency)).collect()))
        .collect();
    chart::line_chart("Cumulative decarbonization efficiency", "efficiency", &lines)
}

/// States (not the national aggregate) by intensity in `year`, highest
/// first, for the selected locale (all households by default).
fn ranking(panel: &Panel, cfg: &RunConfig, year: i32) -> Result<Vec<(SeriesKey, f64)>, CliError> {
    let locale = cfg.locale.unwrap_or(Locale::All);
    let mut ranked: Vec<(SeriesKey, f64)> = select(panel, cfg)?
        .into_iter()
        .filter(|(k, _)| k.locale == locale && k.state != NATIONAL)
        .filter_map(|(k, s)| s.get(&year).map(|b| (k.clone(), b.c_total)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

fn ranking_chart(ranked: &[(SeriesKey, f64)], year: i32) -> Result<String, CliError> {
    let items: Vec<(String, f64)> = ranked.iter().map(|(k, v)| (k.state.clone(), *v)).collect();
    let locale = ranked.first().map(|(k, _)| k.locale.to_string()).unwrap_or_default();
    chart::ranked_bars(
        &format!("States by carbon intensity, {year} ({locale})"),
        "kgCO2 per household",
        &items,
    )
}
