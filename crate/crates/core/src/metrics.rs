//! Decarbonization measures derived from decomposition ledgers.
//!
//! Decarbonization intensity is the negated sum of the negative driver
//! contributions to a change in carbon intensity. Multiplying by households
//! gives total decarbonization; dividing that by emissions gives efficiency.

use crate::decomp::ContributionLedger;
use crate::error::{Error, Result};

/// kg per megaton.
pub const KG_PER_MT: f64 = 1e9;
/// Rupees per lakh.
pub const LAKH: f64 = 1e5;

/// Level at which negative contributions are summed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Granularity {
    /// p, g, n, e, k and w groups.
    #[default]
    Grouped,
    /// Individual drivers, so offsetting k_i or F_i terms are not netted.
    PerDriver,
}

pub fn decarb_intensity(ledger: &ContributionLedger) -> f64 {
    decarb_intensity_with(ledger, Granularity::Grouped)
}

pub fn decarb_intensity_with(ledger: &ContributionLedger, granularity: Granularity) -> f64 {
    let negative: f64 = match granularity {
        Granularity::Grouped => ledger
            .grouped
            .iter()
            .map(|(_, v)| *v)
            .filter(|v| *v < 0.0)
            .sum(),
        Granularity::PerDriver => ledger
            .per_driver
            .iter()
            .map(|c| c.value)
            .filter(|v| *v < 0.0)
            .sum(),
    };
    0.0 - negative
}

/// Sum of the positive grouped contributions.
pub fn positive_contributions(ledger: &ContributionLedger) -> f64 {
    ledger
        .grouped
        .iter()
        .map(|(_, v)| *v)
        .filter(|v| *v > 0.0)
        .sum()
}

/// kgCO₂ avoided across `households`.
pub fn total_decarb(decarb_intensity: f64, households: f64) -> Result<f64> {
    if !(decarb_intensity.is_finite() && decarb_intensity >= 0.0) {
        return Err(Error::validation(
            "decarb_intensity",
            format!("must be finite and >= 0, got {decarb_intensity}"),
        ));
    }
    if !(households.is_finite() && households > 0.0) {
        return Err(Error::validation(
            "households",
            format!("must be > 0, got {households}"),
        ));
    }
    Ok(decarb_intensity * households)
}

pub fn decarb_efficiency(total_decarb: f64, emissions: f64) -> Result<f64> {
    if !(emissions.is_finite() && emissions > 0.0) {
        return Err(Error::validation(
            "emissions",
            format!("must be > 0, got {emissions}"),
        ));
    }
    Ok(total_decarb / emissions)
}

/// kgCO₂ per lakh rupee of NSDP.
pub fn decarb_per_nsdp(total_decarb: f64, nsdp: f64) -> Result<f64> {
    if !(nsdp.is_finite() && nsdp > 0.0) {
        return Err(Error::validation(
            "nsdp",
            format!("must be > 0, got {nsdp}"),
        ));
    }
    Ok(total_decarb / (nsdp / LAKH))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecarbMetrics {
    /// First and last reporting year covered.
    pub period: (i32, i32),
    /// kgCO₂/household
    pub decarb_intensity: f64,
    /// kgCO₂
    pub total_decarb: f64,
    /// kgCO₂ per lakh rupee
    pub per_nsdp: f64,
    /// kgCO₂ emitted over the period, the efficiency denominator.
    pub emissions: f64,
    pub efficiency: f64,
}

impl DecarbMetrics {
    pub fn total_decarb_mt(&self) -> f64 {
        self.total_decarb / KG_PER_MT
    }

    pub fn emissions_mt(&self) -> f64 {
        self.emissions / KG_PER_MT
    }
}

/// Metrics of a single period whose ledger ends in `year`. `households`,
/// `emissions` and `nsdp` are end-year values.
pub fn period_metrics(
    ledger: &ContributionLedger,
    period: (i32, i32),
    households: f64,
    emissions: f64,
    nsdp: f64,
) -> Result<DecarbMetrics> {
    let intensity = decarb_intensity(ledger);
    let total = total_decarb(intensity, households)?;
    Ok(DecarbMetrics {
        period,
        decarb_intensity: intensity,
        total_decarb: total,
        per_nsdp: decarb_per_nsdp(total, nsdp)?,
        emissions,
        efficiency: decarb_efficiency(total, emissions)?,
    })
}

/// One year of a chained series: the ledger decomposes `year − 1 → year`.
#[derive(Debug, Clone)]
pub struct YearInput<'a> {
    pub year: i32,
    pub ledger: &'a ContributionLedger,
    pub households: f64,
    /// kgCO₂ emitted in `year`.
    pub emissions: f64,
    /// INR
    pub nsdp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearMetrics {
    pub year: i32,
    pub annual: DecarbMetrics,
    /// Running totals from the first year of the series through `year`.
    pub cumulative: DecarbMetrics,
}

/// Running decarbonization over consecutive years.
///
/// Intensity, total decarbonization, emissions and per-NSDP decarbonization
/// accumulate as sums of the annual values; efficiency at each year is
/// cumulative decarbonization over cumulative emissions.
pub fn cumulative_series(yearly: &[YearInput<'_>]) -> Result<Vec<YearMetrics>> {
    for pair in yearly.windows(2) {
        if pair[1].year != pair[0].year + 1 {
            return Err(Error::YearGap {
                prev: pair[0].year,
                next: pair[1].year,
            });
        }
    }
    let Some(first) = yearly.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(yearly.len());
    let (mut intensity, mut total, mut per_nsdp, mut emissions) = (0.0, 0.0, 0.0, 0.0);
    for y in yearly {
        let annual = period_metrics(
            y.ledger,
            (y.year, y.year),
            y.households,
            y.emissions,
            y.nsdp,
        )?;
        intensity += annual.decarb_intensity;
        total += annual.total_decarb;
        per_nsdp += annual.per_nsdp;
        emissions += annual.emissions;
        out.push(YearMetrics {
            year: y.year,
            annual,
            cumulative: DecarbMetrics {
                period: (first.year, y.year),
                decarb_intensity: intensity,
                total_decarb: total,
                per_nsdp,
                emissions,
                efficiency: decarb_efficiency(total, emissions)?,
            },
        });
    }
    Ok(out)
}

/// Fraction of the series' cumulative decarbonization intensity that falls in
/// years `from..=to`.
pub fn period_share(series: &[YearMetrics], from: i32, to: i32) -> Option<f64> {
    let all: f64 = series.iter().map(|y| y.annual.decarb_intensity).sum();
    if all <= 0.0 {
        return None;
    }
    let part: f64 = series
        .iter()
        .filter(|y| (from..=to).contains(&y.year))
        .map(|y| y.annual.decarb_intensity)
        .sum();
    Some(part / all)
}
