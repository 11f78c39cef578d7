//! Reading, writing, checking and gap-filling (state, year, locale) panels.
//!
//! A panel file is UTF-8 CSV whose first line is the schema pragma
//! `# cooldecomp-schema v1`. Further `#` lines are comments; lines of the form
//! `# provenance <column>: <text>` attach source notes to a column.
//!
//! Every value is converted to canonical units while loading (counts per
//! household, INR, kgCO₂/kWh), so nothing downstream converts units.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;
use std::path::Path;

use crate::error::{Error, IngestIssue, IngestIssueKind, Result};
use crate::model::{AirCoolerParams, FanParams, Locale, RoomAcParams, StateYearRecord};

pub const SCHEMA_V1: &str = "v1";
const PRAGMA_PREFIX: &str = "# cooldecomp-schema ";
const PROVENANCE_PREFIX: &str = "# provenance ";

pub type RecordKey = (String, i32, Locale);

/// Where a numeric field comes from and how to scale it into canonical units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    AcFloorspace,
    AcLoad,
    Iseer,
    Fans,
    FanHours,
    FanPower,
    Coolers,
    CoolerHours,
    CoolerPower,
    Population,
    Households,
    Nsdp,
    EmissionFactor,
}

impl Field {
    const ALL: [Field; 13] = [
        Field::AcFloorspace,
        Field::AcLoad,
        Field::Iseer,
        Field::Fans,
        Field::FanHours,
        Field::FanPower,
        Field::Coolers,
        Field::CoolerHours,
        Field::CoolerPower,
        Field::Population,
        Field::Households,
        Field::Nsdp,
        Field::EmissionFactor,
    ];

    /// Name written by the serializer; values in this column need no scaling.
    fn canonical(self) -> &'static str {
        match self {
            Field::AcFloorspace => "ac_floorspace_m2",
            Field::AcLoad => "ac_load_kwh_m2",
            Field::Iseer => "iseer",
            Field::Fans => "fans_per_hh",
            Field::FanHours => "fan_hours",
            Field::FanPower => "fan_power_w",
            Field::Coolers => "coolers_per_hh",
            Field::CoolerHours => "cooler_hours",
            Field::CoolerPower => "cooler_power_w",
            Field::Population => "population",
            Field::Households => "households",
            Field::Nsdp => "nsdp_inr",
            Field::EmissionFactor => "emission_factor_kg_per_kwh",
        }
    }

    /// Accepted alternates and the factor taking them to canonical units.
    fn alternates(self) -> &'static [(&'static str, f64)] {
        match self {
            Field::Fans => &[("fans_per_100hh", 0.01)],
            Field::Coolers => &[("coolers_per_100hh", 0.01)],
            Field::Nsdp => &[("nsdp_lakh_inr", 1e5)],
            Field::EmissionFactor => &[("emission_factor_t_per_kwh", 1000.0)],
            _ => &[],
        }
    }

    /// Value used when an optional column is absent or a cell is blank.
    fn default_value(self) -> Option<f64> {
        match self {
            Field::Population | Field::Households | Field::Nsdp | Field::EmissionFactor => None,
            // any positive ratio; with zero floorspace it has no effect
            Field::Iseer => Some(1.0),
            _ => Some(0.0),
        }
    }

    fn get(self, r: &StateYearRecord) -> f64 {
        match self {
            Field::AcFloorspace => r.room_ac.floorspace_per_household,
            Field::AcLoad => r.room_ac.cooling_load_per_area,
            Field::Iseer => r.room_ac.iseer,
            Field::Fans => r.fan.units_per_household,
            Field::FanHours => r.fan.annual_usage_hours,
            Field::FanPower => r.fan.rated_power,
            Field::Coolers => r.air_cooler.units_per_household,
            Field::CoolerHours => r.air_cooler.annual_usage_hours,
            Field::CoolerPower => r.air_cooler.rated_power,
            Field::Population => r.population,
            Field::Households => r.households,
            Field::Nsdp => r.nsdp,
            Field::EmissionFactor => r.emission_factor,
        }
    }

    fn set(self, r: &mut StateYearRecord, v: f64) {
        let slot = match self {
            Field::AcFloorspace => &mut r.room_ac.floorspace_per_household,
            Field::AcLoad => &mut r.room_ac.cooling_load_per_area,
            Field::Iseer => &mut r.room_ac.iseer,
            Field::Fans => &mut r.fan.units_per_household,
            Field::FanHours => &mut r.fan.annual_usage_hours,
            Field::FanPower => &mut r.fan.rated_power,
            Field::Coolers => &mut r.air_cooler.units_per_household,
            Field::CoolerHours => &mut r.air_cooler.annual_usage_hours,
            Field::CoolerPower => &mut r.air_cooler.rated_power,
            Field::Population => &mut r.population,
            Field::Households => &mut r.households,
            Field::Nsdp => &mut r.nsdp,
            Field::EmissionFactor => &mut r.emission_factor,
        };
        *slot = v;
    }
}

fn blank_record(state: String, year: i32, locale: Locale) -> StateYearRecord {
    StateYearRecord {
        state,
        year,
        locale,
        room_ac: RoomAcParams {
            floorspace_per_household: 0.0,
            cooling_load_per_area: 0.0,
            iseer: 1.0,
        },
        fan: FanParams {
            units_per_household: 0.0,
            annual_usage_hours: 0.0,
            rated_power: 0.0,
        },
        air_cooler: AirCoolerParams {
            units_per_household: 0.0,
            annual_usage_hours: 0.0,
            rated_power: 0.0,
        },
        population: 0.0,
        households: 0.0,
        nsdp: 0.0,
        emission_factor: 0.0,
    }
}

/// Records keyed by (state, year, locale) plus per-column source notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PanelDataset {
    records: BTreeMap<RecordKey, StateYearRecord>,
    pub provenance: BTreeMap<String, String>,
}

impl PanelDataset {
    /// Fails with a duplicate-key issue for every repeated key.
    pub fn from_records(records: impl IntoIterator<Item = StateYearRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut issues = Vec::new();
        for r in records {
            match map.entry(r.key()) {
                Entry::Occupied(e) => issues.push(IngestIssue {
                    line: None,
                    column: None,
                    kind: IngestIssueKind::DuplicateKey,
                    message: format!("duplicate key {}", fmt_key(e.key())),
                }),
                Entry::Vacant(e) => {
                    e.insert(r);
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Ingest(issues));
        }
        Ok(Self {
            records: map,
            provenance: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in (state, year, locale) order.
    pub fn records(&self) -> impl Iterator<Item = &StateYearRecord> {
        self.records.values()
    }

    pub fn get(&self, state: &str, year: i32, locale: Locale) -> Option<&StateYearRecord> {
        self.records.get(&(state.to_string(), year, locale))
    }

    /// `None` for an empty dataset.
    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.records.keys().map(|k| k.1).min()?;
        let max = self.records.keys().map(|k| k.1).max()?;
        Some((min, max))
    }

    pub fn states(&self) -> BTreeSet<&str> {
        self.records.keys().map(|k| k.0.as_str()).collect()
    }

    pub fn locales(&self) -> BTreeSet<Locale> {
        self.records.keys().map(|k| k.2).collect()
    }

    /// Observed years of every (state, locale) series.
    pub fn series(&self) -> BTreeMap<(String, Locale), Vec<i32>> {
        let mut out: BTreeMap<(String, Locale), Vec<i32>> = BTreeMap::new();
        for (state, year, locale) in self.records.keys() {
            out.entry((state.clone(), *locale)).or_default().push(*year);
        }
        out
    }

    /// Keeps the records for which `keep` is true.
    pub fn filter(&self, mut keep: impl FnMut(&StateYearRecord) -> bool) -> Self {
        Self {
            records: self
                .records
                .iter()
                .filter(|(_, r)| keep(r))
                .map(|(k, r)| (k.clone(), r.clone()))
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Canonical-unit CSV text, readable by [`parse`].
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{PRAGMA_PREFIX}{SCHEMA_V1}");
        for (col, note) in &self.provenance {
            let _ = writeln!(out, "{PROVENANCE_PREFIX}{col}: {}", note.replace('\n', " "));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["state", "year", "locale"];
        header.extend(Field::ALL.iter().map(|f| f.canonical()));
        w.write_record(&header).expect("in-memory write");
        for r in self.records.values() {
            let mut row = vec![r.state.clone(), r.year.to_string(), r.locale.to_string()];
            // `{}` on f64 prints the shortest string that parses back to the same bits
            row.extend(Field::ALL.iter().map(|f| format!("{}", f.get(r))));
            w.write_record(&row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn fmt_key((state, year, locale): &RecordKey) -> String {
    format!("{state}/{year}/{locale}")
}

pub fn load(path: impl AsRef<Path>, schema_version: &str) -> Result<PanelDataset> {
    let text = std::fs::read_to_string(path)?;
    parse(&text, schema_version)
}

fn issue(
    line: Option<usize>,
    column: Option<&str>,
    kind: IngestIssueKind,
    message: String,
) -> IngestIssue {
    IngestIssue {
        line,
        column: column.map(str::to_string),
        kind,
        message,
    }
}

/// Parses panel text. All problems found are reported together.
pub fn parse(text: &str, schema_version: &str) -> Result<PanelDataset> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let first = text.lines().next().unwrap_or("").trim_end();
    match first.strip_prefix(PRAGMA_PREFIX) {
        Some(v) if v.trim() == schema_version && schema_version == SCHEMA_V1 => {}
        Some(v) => return Err(Error::Ingest(vec![issue(
            Some(1),
            None,
            IngestIssueKind::Schema,
            format!(
                "unsupported schema version `{}` (expected `{schema_version}`, known: {SCHEMA_V1})",
                v.trim()
            ),
        )])),
        None => {
            return Err(Error::Ingest(vec![issue(
                Some(1),
                None,
                IngestIssueKind::Schema,
                format!("missing schema pragma `{PRAGMA_PREFIX}{SCHEMA_V1}` on the first line"),
            )]))
        }
    }

    let mut provenance = BTreeMap::new();
    for line in text.lines().skip(1) {
        if let Some(rest) = line.strip_prefix(PROVENANCE_PREFIX) {
            if let Some((col, note)) = rest.split_once(':') {
                provenance.insert(col.trim().to_string(), note.trim().to_string());
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut issues = Vec::new();
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            return Err(Error::Ingest(vec![issue(
                None,
                None,
                IngestIssueKind::Schema,
                e.to_string(),
            )]));
        }
    };
    if headers.is_empty() {
        return Err(Error::Ingest(vec![issue(
            None,
            None,
            IngestIssueKind::Schema,
            "header row is missing".into(),
        )]));
    }

    // column index of each key column and each numeric field (with scale)
    let mut key_cols: [Option<usize>; 3] = [None; 3];
    let mut field_cols: Vec<Option<(usize, f64)>> = vec![None; Field::ALL.len()];
    let mut seen = BTreeSet::new();
    for (idx, name) in headers.iter().enumerate() {
        if !seen.insert(name) {
            issues.push(issue(
                None,
                Some(name),
                IngestIssueKind::Schema,
                "column appears more than once".into(),
            ));
            continue;
        }
        if let Some(k) = ["state", "year", "locale"].iter().position(|c| *c == name) {
            key_cols[k] = Some(idx);
            continue;
        }
        let mut matched = false;
        for (fi, f) in Field::ALL.iter().enumerate() {
            let scale = if f.canonical() == name {
                Some(1.0)
            } else {
                f.alternates()
                    .iter()
                    .find(|(alt, _)| *alt == name)
                    .map(|(_, s)| *s)
            };
            if let Some(scale) = scale {
                matched = true;
                if field_cols[fi].is_some() {
                    issues.push(issue(
                        None,
                        Some(name),
                        IngestIssueKind::Schema,
                        format!("conflicts with another column for `{}`", f.canonical()),
                    ));
                } else {
                    field_cols[fi] = Some((idx, scale));
                }
            }
        }
        if !matched {
            issues.push(issue(
                None,
                Some(name),
                IngestIssueKind::UnknownColumn,
                "unknown column".into(),
            ));
        }
    }
    for (k, name) in ["state", "year", "locale"].iter().enumerate() {
        if key_cols[k].is_none() {
            issues.push(issue(
                None,
                Some(name),
                IngestIssueKind::MissingColumn,
                "mandatory column is missing".into(),
            ));
        }
    }
    for (fi, f) in Field::ALL.iter().enumerate() {
        if field_cols[fi].is_none() && f.default_value().is_none() {
            issues.push(issue(
                None,
                Some(f.canonical()),
                IngestIssueKind::MissingColumn,
                "mandatory column is missing".into(),
            ));
        }
    }
    if !issues.is_empty() {
        return Err(Error::Ingest(issues));
    }
    let key_cols = key_cols.map(|c| c.expect("checked above"));

    let mut records: BTreeMap<RecordKey, StateYearRecord> = BTreeMap::new();
    let mut first_line: BTreeMap<RecordKey, usize> = BTreeMap::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize);
                issues.push(issue(line, None, IngestIssueKind::Schema, e.to_string()));
                continue;
            }
        };
        let line = row.position().map(|p| p.line() as usize);
        if row.len() != headers.len() {
            issues.push(issue(
                line,
                None,
                IngestIssueKind::Schema,
                format!("expected {} fields, found {}", headers.len(), row.len()),
            ));
            continue;
        }
        let cell = |idx: usize| row.get(idx).unwrap_or("");

        let mut key_ok = true;
        let state = cell(key_cols[0]).to_string();
        if state.is_empty() {
            issues.push(issue(
                line,
                Some("state"),
                IngestIssueKind::BadKey,
                "state is empty".into(),
            ));
            key_ok = false;
        }
        let year = match cell(key_cols[1]).parse::<i32>() {
            Ok(y) => y,
            Err(_) => {
                issues.push(issue(
                    line,
                    Some("year"),
                    IngestIssueKind::BadKey,
                    format!("`{}` is not an integer year", cell(key_cols[1])),
                ));
                key_ok = false;
                0
            }
        };
        let locale = match cell(key_cols[2]).parse::<Locale>() {
            Ok(l) => l,
            Err(_) => {
                issues.push(issue(
                    line,
                    Some("locale"),
                    IngestIssueKind::BadKey,
                    format!("`{}` is not one of urban, rural, all", cell(key_cols[2])),
                ));
                key_ok = false;
                Locale::All
            }
        };

        let mut record = blank_record(state, year, locale);
        for (fi, f) in Field::ALL.iter().enumerate() {
            let value = match field_cols[fi] {
                None => f.default_value().expect("mandatory columns checked"),
                Some((idx, scale)) => {
                    let raw = cell(idx);
                    let name = headers.get(idx).unwrap_or("");
                    if raw.is_empty() {
                        match f.default_value() {
                            Some(d) => d,
                            None => {
                                issues.push(issue(
                                    line,
                                    Some(name),
                                    IngestIssueKind::NonNumeric,
                                    "empty cell".into(),
                                ));
                                continue;
                            }
                        }
                    } else {
                        match raw.parse::<f64>() {
                            Ok(v) if v.is_finite() => v * scale,
                            _ => {
                                issues.push(issue(
                                    line,
                                    Some(name),
                                    IngestIssueKind::NonNumeric,
                                    format!("`{raw}` is not a finite number"),
                                ));
                                continue;
                            }
                        }
                    }
                }
            };
            f.set(&mut record, value);
        }
        if !key_ok {
            continue;
        }
        let key = record.key();
        if let Some(prev) = first_line.get(&key) {
            issues.push(issue(
                line,
                None,
                IngestIssueKind::DuplicateKey,
                format!(
                    "duplicate key {} (first seen on line {prev})",
                    fmt_key(&key)
                ),
            ));
            continue;
        }
        first_line.insert(key.clone(), line.unwrap_or(0));
        records.insert(key, record);
    }
    if !issues.is_empty() {
        return Err(Error::Ingest(issues));
    }
    Ok(PanelDataset {
        records,
        provenance,
    })
}

/// Fills every (state, locale) series over `target_years` by linear
/// interpolation between its observed years, column by column.
///
/// Observed records are kept unchanged, including those outside the target
/// range. A target year outside a series' observed span is refused.
pub fn interpolate(
    dataset: &PanelDataset,
    target_years: RangeInclusive<i32>,
) -> Result<PanelDataset> {
    let mut out = dataset.clone();
    for ((state, locale), years) in dataset.series() {
        let (lo, hi) = (years[0], *years.last().expect("non-empty series"));
        let outside: Vec<i32> = target_years
            .clone()
            .filter(|y| *y < lo || *y > hi)
            .collect();
        if !outside.is_empty() {
            return Err(Error::Extrapolation {
                series: format!("{state}/{locale}"),
                years: outside,
                span: (lo, hi),
            });
        }
        for year in target_years.clone() {
            if years.binary_search(&year).is_ok() {
                continue;
            }
            // year lies strictly between two observed knots
            let after = years.partition_point(|y| *y < year);
            let (y0, y1) = (years[after - 1], years[after]);
            let r0 = &dataset.records[&(state.clone(), y0, locale)];
            let r1 = &dataset.records[&(state.clone(), y1, locale)];
            let t = f64::from(year - y0) / f64::from(y1 - y0);
            let mut r = blank_record(state.clone(), year, locale);
            for f in Field::ALL {
                let (a, b) = (f.get(r0), f.get(r1));
                f.set(&mut r, a + (b - a) * t);
            }
            out.records.insert(r.key(), r);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    /// `state/year/locale`, or `state/locale` for series-level findings.
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Checks record invariants, cooling-energy shares and year gaps.
///
/// Errors: invariant breaches (non-positive households, population below
/// households, usage hours above 8784, …). Warnings: records with no cooling
/// energy at all, series with missing years.
pub fn validate(dataset: &PanelDataset) -> ValidationReport {
    let mut findings = Vec::new();
    for (key, r) in &dataset.records {
        if let Err(e) = r.validate() {
            findings.push(Finding {
                severity: Severity::Error,
                key: fmt_key(key),
                message: e.to_string(),
            });
            continue;
        }
        let energy = r.room_ac.energy_per_household(Default::default())
            + r.fan.energy_per_household()
            + r.air_cooler.energy_per_household();
        if energy == 0.0 {
            findings.push(Finding {
                severity: Severity::Warning,
                key: fmt_key(key),
                message: "no cooling energy; appliance shares are undefined".into(),
            });
        }
    }
    for ((state, locale), years) in dataset.series() {
        let missing: Vec<i32> = years.windows(2).flat_map(|w| (w[0] + 1)..w[1]).collect();
        if !missing.is_empty() {
            findings.push(Finding {
                severity: Severity::Warning,
                key: format!("{state}/{locale}"),
                message: format!("missing years {missing:?}; interpolate before decomposing"),
            });
        }
    }
    ValidationReport { findings }
}
