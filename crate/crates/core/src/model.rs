//! Bottom-up space-cooling carbon intensity per household.
//!
//! Each appliance contributes `service volume · cooling intensity · efficiency ·
//! grid emission factor`. Powers are given in watts and converted to kWh before
//! the emission factor (kgCO₂/kWh) is applied, so every intensity here is in
//! kgCO₂ per household per year.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Upper bound on annual usage hours (366 days × 24 h).
pub const MAX_ANNUAL_HOURS: f64 = 8784.0;

fn check_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite, got {value}"),
        ))
    }
}

fn check_non_negative(field: &str, value: f64) -> Result<()> {
    check_finite(field, value)?;
    if value < 0.0 {
        return Err(Error::validation(
            field,
            format!("must be >= 0, got {value}"),
        ));
    }
    Ok(())
}

fn check_hours(field: &str, value: f64) -> Result<()> {
    check_non_negative(field, value)?;
    if value > MAX_ANNUAL_HOURS {
        return Err(Error::validation(
            field,
            format!("{value} h exceeds the {MAX_ANNUAL_HOURS} h annual cap"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Locale {
    /// Urban and rural households combined.
    All,
    Rural,
    Urban,
}

impl Locale {
    pub fn as_str(self) -> &'static str {
        match self {
            Locale::All => "all",
            Locale::Rural => "rural",
            Locale::Urban => "urban",
        }
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Locale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "urban" => Ok(Locale::Urban),
            "rural" => Ok(Locale::Rural),
            "all" => Ok(Locale::All),
            other => Err(Error::validation(
                "locale",
                format!("expected urban, rural or all, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Appliance {
    RoomAc,
    Fan,
    AirCooler,
}

impl Appliance {
    pub const ALL: [Appliance; 3] = [Appliance::RoomAc, Appliance::Fan, Appliance::AirCooler];

    pub fn index(self) -> usize {
        match self {
            Appliance::RoomAc => 0,
            Appliance::Fan => 1,
            Appliance::AirCooler => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Appliance::RoomAc => "room_ac",
            Appliance::Fan => "fan",
            Appliance::AirCooler => "air_cooler",
        }
    }
}

impl fmt::Display for Appliance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the seasonal efficiency ratio enters the room AC formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IseerMode {
    /// energy = floorspace × load / ISEER
    #[default]
    DivideByIseer,
    /// energy = floorspace × load × ISEER; kept for comparison.
    MultiplyByIseer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomAcParams {
    /// m² of floorspace served by room ACs, per household.
    pub floorspace_per_household: f64,
    /// Annual cooling load, kWh/m²·a.
    pub cooling_load_per_area: f64,
    /// Seasonal energy efficiency ratio, W/W.
    pub iseer: f64,
}

impl RoomAcParams {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("ac_floorspace_m2", self.floorspace_per_household)?;
        check_non_negative("ac_load_kwh_m2", self.cooling_load_per_area)?;
        check_finite("iseer", self.iseer)?;
        if self.iseer <= 0.0 {
            return Err(Error::validation(
                "iseer",
                format!("must be > 0, got {}", self.iseer),
            ));
        }
        Ok(())
    }

    /// Annual electricity use per household, kWh.
    pub fn energy_per_household(&self, mode: IseerMode) -> f64 {
        let load = self.floorspace_per_household * self.cooling_load_per_area;
        match mode {
            IseerMode::DivideByIseer => load / self.iseer,
            IseerMode::MultiplyByIseer => load * self.iseer,
        }
    }
}

/// Parameters shared by fans and air coolers: a stock, its usage and its power.
macro_rules! unit_appliance {
    ($name:ident, $units:literal, $hours:literal, $power:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name {
            pub units_per_household: f64,
            /// h/year
            pub annual_usage_hours: f64,
            /// W
            pub rated_power: f64,
        }

        impl $name {
            pub fn validate(&self) -> Result<()> {
                check_non_negative($units, self.units_per_household)?;
                check_hours($hours, self.annual_usage_hours)?;
                check_non_negative($power, self.rated_power)
            }

            /// Annual electricity use per household, kWh.
            pub fn energy_per_household(&self) -> f64 {
                self.units_per_household * self.annual_usage_hours * (self.rated_power / 1000.0)
            }
        }
    };
}

unit_appliance!(FanParams, "fans_per_hh", "fan_hours", "fan_power_w");
unit_appliance!(
    AirCoolerParams,
    "coolers_per_hh",
    "cooler_hours",
    "cooler_power_w"
);

fn check_emission_factor(k: f64) -> Result<()> {
    check_non_negative("emission_factor", k)
}

pub fn room_ac_intensity(params: &RoomAcParams, k: f64, mode: IseerMode) -> Result<f64> {
    params.validate()?;
    check_emission_factor(k)?;
    Ok(params.energy_per_household(mode) * k)
}

pub fn fan_intensity(params: &FanParams, k: f64) -> Result<f64> {
    params.validate()?;
    check_emission_factor(k)?;
    Ok(params.energy_per_household() * k)
}

pub fn air_cooler_intensity(params: &AirCoolerParams, k: f64) -> Result<f64> {
    params.validate()?;
    check_emission_factor(k)?;
    Ok(params.energy_per_household() * k)
}

/// One (state, year, locale) observation in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct StateYearRecord {
    pub state: String,
    pub year: i32,
    pub locale: Locale,
    pub room_ac: RoomAcParams,
    pub fan: FanParams,
    pub air_cooler: AirCoolerParams,
    /// persons
    pub population: f64,
    pub households: f64,
    /// Net state domestic product, INR.
    pub nsdp: f64,
    /// kgCO₂/kWh
    pub emission_factor: f64,
}

impl StateYearRecord {
    pub fn key(&self) -> (String, i32, Locale) {
        (self.state.clone(), self.year, self.locale)
    }

    pub fn validate(&self) -> Result<()> {
        self.room_ac.validate()?;
        self.fan.validate()?;
        self.air_cooler.validate()?;
        check_finite("households", self.households)?;
        if self.households <= 0.0 {
            return Err(Error::validation(
                "households",
                format!("must be > 0, got {}", self.households),
            ));
        }
        check_finite("population", self.population)?;
        if self.population <= 0.0 {
            return Err(Error::validation(
                "population",
                format!("must be > 0, got {}", self.population),
            ));
        }
        if self.population < self.households {
            return Err(Error::validation(
                "population",
                format!(
                    "population {} is below household count {}",
                    self.population, self.households
                ),
            ));
        }
        check_finite("nsdp_inr", self.nsdp)?;
        if self.nsdp <= 0.0 {
            return Err(Error::validation(
                "nsdp_inr",
                format!("must be > 0, got {}", self.nsdp),
            ));
        }
        check_emission_factor(self.emission_factor)
    }
}

/// Per-household intensity of one (state, year, locale) cell, with the totals
/// needed to aggregate it and to build a decomposition from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityBreakdown {
    pub state: String,
    pub year: i32,
    pub locale: Locale,
    /// kgCO₂/household
    pub c_room_ac: f64,
    pub c_fan: f64,
    pub c_air_cooler: f64,
    pub c_total: f64,
    /// kgCO₂
    pub emissions_total: f64,
    /// kWh
    pub energy_total: f64,
    pub emissions_by_appliance: [f64; 3],
    pub energy_by_appliance: [f64; 3],
    /// Fractions of `energy_total`, indexed by [`Appliance::index`].
    pub energy_shares: [f64; 3],
    /// Set when `energy_total` is zero and the shares are the uniform fallback.
    pub shares_synthetic: bool,
    pub households: f64,
    pub population: f64,
    pub nsdp: f64,
    /// Effective emission factor C/E, or the input factor when E = 0.
    pub emission_factor: f64,
    /// persons per household
    pub p: f64,
    /// INR per person
    pub n: f64,
    /// kWh per INR
    pub e: f64,
}

impl IntensityBreakdown {
    pub fn intensity(&self, appliance: Appliance) -> f64 {
        match appliance {
            Appliance::RoomAc => self.c_room_ac,
            Appliance::Fan => self.c_fan,
            Appliance::AirCooler => self.c_air_cooler,
        }
    }

    /// Per-appliance emission factor C_i/E_i, falling back to the cell factor
    /// when the appliance uses no energy.
    pub fn appliance_emission_factor(&self, appliance: Appliance) -> f64 {
        let i = appliance.index();
        if self.energy_by_appliance[i] > 0.0 {
            self.emissions_by_appliance[i] / self.energy_by_appliance[i]
        } else {
            self.emission_factor
        }
    }

    /// Energy use per household, kWh.
    pub fn energy_per_household(&self) -> f64 {
        self.energy_total / self.households
    }

    fn from_totals(
        state: String,
        year: i32,
        locale: Locale,
        energy_by_appliance: [f64; 3],
        emissions_by_appliance: [f64; 3],
        households: f64,
        population: f64,
        nsdp: f64,
        fallback_factor: f64,
    ) -> Self {
        let energy_total: f64 = energy_by_appliance.iter().sum();
        let emissions_total: f64 = emissions_by_appliance.iter().sum();
        let (energy_shares, shares_synthetic) = if energy_total > 0.0 {
            (energy_by_appliance.map(|x| x / energy_total), false)
        } else {
            ([1.0 / 3.0; 3], true)
        };
        let emission_factor = if energy_total > 0.0 {
            emissions_total / energy_total
        } else {
            fallback_factor
        };
        let per_hh = emissions_by_appliance.map(|x| x / households);
        Self {
            state,
            year,
            locale,
            c_room_ac: per_hh[0],
            c_fan: per_hh[1],
            c_air_cooler: per_hh[2],
            c_total: per_hh[0] + per_hh[1] + per_hh[2],
            emissions_total,
            energy_total,
            emissions_by_appliance,
            energy_by_appliance,
            energy_shares,
            shares_synthetic,
            households,
            population,
            nsdp,
            emission_factor,
            p: population / households,
            n: nsdp / population,
            e: energy_total / nsdp,
        }
    }
}

pub fn household_intensity(record: &StateYearRecord, mode: IseerMode) -> Result<IntensityBreakdown> {
    record.validate()?;
    let k = record.emission_factor;
    let h = record.households;
    let per_hh_energy = [
        record.room_ac.energy_per_household(mode),
        record.fan.energy_per_household(),
        record.air_cooler.energy_per_household(),
    ];
    let per_hh_carbon = per_hh_energy.map(|x| x * k);
    let mut out = IntensityBreakdown::from_totals(
        record.state.clone(),
        record.year,
        record.locale,
        per_hh_energy.map(|x| x * h),
        per_hh_carbon.map(|x| x * h),
        h,
        record.population,
        record.nsdp,
        k,
    );
    // Keep the per-household figures exactly as computed rather than
    // round-tripping them through the totals.
    out.c_room_ac = per_hh_carbon[0];
    out.c_fan = per_hh_carbon[1];
    out.c_air_cooler = per_hh_carbon[2];
    out.c_total = per_hh_carbon[0] + per_hh_carbon[1] + per_hh_carbon[2];
    out.emissions_total = out.c_total * h;
    Ok(out)
}

/// Household-weighted roll-up of cells from the same year (urban + rural into
/// a state, states into a nation). The result is labelled `state`/`locale`.
pub fn aggregate(
    parts: &[IntensityBreakdown],
    state: impl Into<String>,
    locale: Locale,
) -> Result<IntensityBreakdown> {
    let first = parts.first().ok_or(Error::EmptyAggregate)?;
    if let Some(other) = parts.iter().find(|b| b.year != first.year) {
        return Err(Error::MixedYears(first.year, other.year));
    }
    let mut energy = [0.0; 3];
    let mut emissions = [0.0; 3];
    let (mut households, mut population, mut nsdp, mut weighted_k) = (0.0, 0.0, 0.0, 0.0);
    for b in parts {
        for i in 0..3 {
            energy[i] += b.energy_by_appliance[i];
            emissions[i] += b.emissions_by_appliance[i];
        }
        households += b.households;
        population += b.population;
        nsdp += b.nsdp;
        weighted_k += b.emission_factor * b.households;
    }
    if households <= 0.0 {
        return Err(Error::validation(
            "households",
            "aggregate has no households",
        ));
    }
    Ok(IntensityBreakdown::from_totals(
        state.into(),
        first.year,
        locale,
        energy,
        emissions,
        households,
        population,
        nsdp,
        weighted_k / households,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthStats {
    /// c_end / c_start − 1
    pub total_growth: f64,
    /// Compound annual growth rate.
    pub cagr: f64,
}

pub fn growth_stats(c_start: f64, c_end: f64, years: u32) -> Result<GrowthStats> {
    check_finite("c_start", c_start)?;
    check_non_negative("c_end", c_end)?;
    if c_start <= 0.0 {
        return Err(Error::GrowthUndefined(c_start));
    }
    if years == 0 {
        return Err(Error::validation("years", "must be >= 1"));
    }
    let ratio = c_end / c_start;
    Ok(GrowthStats {
        total_growth: ratio - 1.0,
        cagr: ratio.powf(1.0 / f64::from(years)) - 1.0,
    })
}
