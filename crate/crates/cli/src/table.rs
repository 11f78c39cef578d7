//! CSV rendering of command results.
//!
//! kgCO₂ and kWh figures carry `precision` decimals (one by default), MtCO₂
//! two more and dimensionless ratios three more. Undefined values are blank.

use cooldecomp_core::decomp::{ContributionLedger, FactorSet};
use cooldecomp_core::ingest::ValidationReport;
use cooldecomp_core::metrics::YearMetrics;
use cooldecomp_core::model::{Appliance, IntensityBreakdown};
use cooldecomp_core::pipeline::SeriesKey;

#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub precision: usize,
}

impl Numbers {
    pub fn kg(&self, v: f64) -> String {
        fixed(v, self.precision)
    }

    pub fn mt(&self, v: f64) -> String {
        fixed(v, self.precision + 2)
    }

    pub fn ratio(&self, v: f64) -> String {
        fixed(v, self.precision + 3)
    }

    pub fn opt_ratio(&self, v: Option<f64>) -> String {
        v.map(|v| self.ratio(v)).unwrap_or_default()
    }
}

/// Fixed decimals, with negative zero printed as zero so reruns and
/// platforms agree byte for byte.
fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn write_csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// One row per appliance plus a `total` row per cell, sorted by
/// (state, year, locale, appliance).
pub fn intensity_table(cells: &[(SeriesKey, &IntensityBreakdown)], num: Numbers) -> String {
    let header = strings(&[
        "state",
        "year",
        "locale",
        "appliance",
        "intensity_kg_per_hh",
        "intensity_share",
        "energy_kwh_per_hh",
        "energy_share",
        "emission_factor_kg_per_kwh",
        "households",
    ]);
    let mut rows: Vec<(String, i32, String, String, Vec<String>)> = Vec::new();
    for (key, b) in cells {
        let share = |c: f64| if b.c_total > 0.0 { num.ratio(c / b.c_total) } else { String::new() };
        for a in Appliance::ALL {
            let i = a.index();
            let c = b.intensity(a);
            rows.push((
                key.state.clone(),
                b.year,
                key.locale.to_string(),
                a.as_str().to_string(),
                vec![
                    num.kg(c),
                    share(c),
                    num.kg(b.energy_by_appliance[i] / b.households),
                    num.ratio(b.energy_shares[i]),
                    num.ratio(b.appliance_emission_factor(a)),
                    format!("{}", b.households),
                ],
            ));
        }
        rows.push((
            key.state.clone(),
            b.year,
            key.locale.to_string(),
            "total".into(),
            vec![
                num.kg(b.c_total),
                share(b.c_total),
                num.kg(b.energy_per_household()),
                num.ratio(1.0),
                num.ratio(b.emission_factor),
                format!("{}", b.households),
            ],
        ));
    }
    rows.sort_by(|a, b| (&a.0, a.1, &a.2, &a.3).cmp(&(&b.0, b.1, &b.2, &b.3)));
    write_csv(
        &header,
        rows.into_iter().map(|(s, y, l, a, rest)| {
            let mut row = vec![s, y.to_string(), l, a];
            row.extend(rest);
            row
        }),
    )
}

pub struct LedgerRow<'a> {
    pub key: SeriesKey,
    pub from: i32,
    pub to: i32,
    pub ledger: &'a ContributionLedger,
}

/// Grouped contributions, rates and the residual, one row per series.
pub fn decomposition_table(rows: &[LedgerRow<'_>], factors: FactorSet, num: Numbers) -> String {
    let groups = factors.groups();
    let mut header = strings(&["state", "locale", "from_year", "to_year", "c_start", "c_end", "total_change"]);
    header.extend(groups.iter().map(|g| format!("d_{g}")));
    header.push("residual".into());
    header.extend(groups.iter().map(|g| format!("rate_{g}")));
    header.extend(strings(&["residual_rate", "residual_tolerance", "degenerate_start"]));
    write_csv(
        &header,
        rows.iter().map(|r| {
            let l = r.ledger;
            let mut row = vec![
                r.key.state.clone(),
                r.key.locale.to_string(),
                r.from.to_string(),
                r.to.to_string(),
                num.kg(l.c_start),
                num.kg(l.c_end),
                num.kg(l.total_change),
            ];
            row.extend(groups.iter().map(|g| num.kg(l.group(g).unwrap_or(0.0))));
            row.push(num.kg(l.residual));
            row.extend(groups.iter().map(|g| num.opt_ratio(l.rate(g))));
            row.push(num.opt_ratio(l.residual_rate()));
            row.push(format!("{:e}", l.residual_tolerance));
            row.push(l.degenerate_start.to_string());
            row
        }),
    )
}

/// Annual and running decarbonization measures per series and year.
pub fn metrics_table(series: &[(SeriesKey, Vec<YearMetrics>)], num: Numbers) -> String {
    let header = strings(&[
        "state",
        "locale",
        "year",
        "decarb_intensity_kg_per_hh",
        "total_decarb_mt",
        "decarb_kg_per_lakh_inr",
        "emissions_mt",
        "efficiency",
        "cum_decarb_intensity_kg_per_hh",
        "cum_total_decarb_mt",
        "cum_decarb_kg_per_lakh_inr",
        "cum_emissions_mt",
        "cum_efficiency",
    ]);
    let rows = series.iter().flat_map(|(key, years)| {
        years.iter().map(move |y| {
            let (a, c) = (&y.annual, &y.cumulative);
            vec![
                key.state.clone(),
                key.locale.to_string(),
                y.year.to_string(),
                num.kg(a.decarb_intensity),
                num.mt(a.total_decarb_mt()),
                num.kg(a.per_nsdp),
                num.mt(a.emissions_mt()),
                num.ratio(a.efficiency),
                num.kg(c.decarb_intensity),
                num.mt(c.total_decarb_mt()),
                num.kg(c.per_nsdp),
                num.mt(c.emissions_mt()),
                num.ratio(c.efficiency),
            ]
        })
    });
    write_csv(&header, rows)
}

/// States ranked by intensity in one year, highest first.
pub fn ranking_table(ranked: &[(SeriesKey, f64)], year: i32, num: Numbers) -> String {
    let header = strings(&["rank", "state", "locale", "year", "intensity_kg_per_hh"]);
    write_csv(
        &header,
        ranked.iter().enumerate().map(|(i, (key, c))| {
            vec![
                (i + 1).to_string(),
                key.state.clone(),
                key.locale.to_string(),
                year.to_string(),
                num.kg(*c),
            ]
        }),
    )
}

pub fn validation_table(report: &ValidationReport) -> String {
    write_csv(
        &strings(&["severity", "key", "message"]),
        report
            .findings
            .iter()
            .map(|f| vec![f.severity.to_string(), f.key.clone(), f.message.clone()]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_decimals_and_signed_zero() {
        assert_eq!(fixed(513.849, 1), "513.8");
        assert_eq!(fixed(-0.04, 1), "0.0");
        assert_eq!(fixed(-0.0, 2), "0.00");
        assert_eq!(fixed(-0.06, 1), "-0.1");
        let n = Numbers { precision: 1 };
        assert_eq!(n.ratio(0.70404), "0.7040");
        assert_eq!(n.mt(206.19998), "206.200");
        assert_eq!(n.opt_ratio(None), "");
    }
}
