//! Domain types shared across the pipeline.
//!
//! A raw [`FareQuote`] is turned into a [`PanelObservation`] by the feature
//! builder; a [`ModelSpec`] says which regressors and which absorbed
//! dimensions to use; the estimator produces a [`FitResult`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One raw price observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FareQuote {
    pub airline: String,
    pub origin: String,
    pub destination: String,
    pub quotation_date: NaiveDate,
    pub departure_date: NaiveDate,
    pub stops: u32,
    pub price: f64,
    pub is_domestic: bool,
}

impl FareQuote {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("airline", &self.airline),
            ("origin", &self.origin),
            ("destination", &self.destination),
        ] {
            if value.trim().is_empty() {
                return Err(Error::validation(format!("empty {field}")));
            }
        }
        if self.departure_date < self.quotation_date {
            return Err(Error::validation(format!(
                "departure date {} precedes quotation date {}",
                self.departure_date, self.quotation_date
            )));
        }
        if !(self.price.is_finite() && self.price > 0.0) {
            return Err(Error::validation(format!(
                "price must be positive, got {}",
                self.price
            )));
        }
        Ok(())
    }
}

/// Whether an airport pair is keyed with its direction (CGH>SDU differs
/// from SDU>CGH) or as an unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairDirection {
    #[default]
    Directed,
    Undirected,
}

/// Airline x airport-pair identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityKey(String);

impl EntityKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Builds the entity key for an airline on an airport pair.
///
/// Components are joined with separators that cannot appear in a trimmed
/// IATA code or airline id, so distinct inputs never collide.
pub fn entity_key(
    airline: &str,
    origin: &str,
    destination: &str,
    direction: PairDirection,
) -> Result<EntityKey> {
    let (airline, origin, destination) = (airline.trim(), origin.trim(), destination.trim());
    for (field, value) in [
        ("airline", airline),
        ("origin", origin),
        ("destination", destination),
    ] {
        if value.is_empty() {
            return Err(Error::validation(format!("entity key: empty {field}")));
        }
        if value.contains(['|', '>', '~']) {
            return Err(Error::validation(format!(
                "entity key: {field} {value:?} contains a reserved separator"
            )));
        }
    }
    let key = match direction {
        PairDirection::Directed => format!("{airline}|{origin}>{destination}"),
        PairDirection::Undirected => {
            let (a, b) = if origin <= destination {
                (origin, destination)
            } else {
                (destination, origin)
            };
            format!("{airline}|{a}~{b}")
        }
    };
    Ok(EntityKey(key))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    #[default]
    Month,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "day" => Ok(Granularity::Day),
            "month" => Ok(Granularity::Month),
            other => Err(Error::validation(format!("unknown granularity {other:?}"))),
        }
    }
}

/// Time period id for the quotation or departure dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeriodKey {
    Month { year: i32, month: u32 },
    Day(NaiveDate),
}

pub fn period_key(date: NaiveDate, granularity: Granularity) -> PeriodKey {
    match granularity {
        Granularity::Month => PeriodKey::Month {
            year: date.year(),
            month: date.month(),
        },
        Granularity::Day => PeriodKey::Day(date),
    }
}

impl fmt::Display for PeriodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodKey::Month { year, month } => write!(f, "{year:04}-{month:02}"),
            PeriodKey::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

/// A named holiday occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolidaySpec {
    pub name: String,
    pub start_date: NaiveDate,
    pub length_days: u32,
    /// Excluded holidays (e.g. Carnival) are kept in the file but ignored.
    #[serde(default)]
    pub excluded: bool,
}

impl HolidaySpec {
    /// First day after the holiday.
    pub fn end_exclusive(&self) -> NaiveDate {
        self.start_date + chrono::Days::new(u64::from(self.length_days))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HolidayCalendar {
    #[serde(rename = "holiday", default)]
    holidays: Vec<HolidaySpec>,
}

impl HolidayCalendar {
    pub fn new(holidays: Vec<HolidaySpec>) -> Result<Self> {
        let cal = HolidayCalendar { holidays };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for h in &self.holidays {
            if h.name.is_empty()
                || !h
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(Error::validation(format!(
                    "holiday name {:?} must be a non-empty identifier",
                    h.name
                )));
            }
            if h.length_days < 1 {
                return Err(Error::validation(format!(
                    "holiday {} on {} has length 0",
                    h.name, h.start_date
                )));
            }
            if !seen.insert((h.start_date.year(), h.name.as_str())) {
                return Err(Error::validation(format!(
                    "holiday {} appears twice in {}",
                    h.name,
                    h.start_date.year()
                )));
            }
        }
        Ok(())
    }

    pub fn holidays(&self) -> &[HolidaySpec] {
        &self.holidays
    }

    /// Holidays that take part in window construction.
    pub fn active(&self) -> impl Iterator<Item = &HolidaySpec> {
        self.holidays.iter().filter(|h| !h.excluded)
    }

    /// Inclusive year range spanned by the calendar's entries.
    pub fn coverage(&self) -> Option<(i32, i32)> {
        let years = self.holidays.iter().map(|h| h.start_date.year());
        let min = years.clone().min()?;
        let max = years.max()?;
        Some((min, max))
    }

    pub fn covers(&self, date: NaiveDate) -> bool {
        self.coverage()
            .is_some_and(|(lo, hi)| (lo..=hi).contains(&date.year()))
    }

    /// Distinct active holiday names in sorted order.
    pub fn names(&self) -> Vec<String> {
        let names: BTreeSet<&str> = self.active().map(|h| h.name.as_str()).collect();
        names.into_iter().map(str::to_owned).collect()
    }

    /// Copy restricted to holidays of the given length.
    pub fn with_length(&self, length_days: u32) -> HolidayCalendar {
        HolidayCalendar {
            holidays: self
                .holidays
                .iter()
                .filter(|h| h.length_days == length_days)
                .cloned()
                .collect(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cal: HolidayCalendar =
            toml::from_str(s).map_err(|e| Error::Schema(format!("holiday calendar: {e}")))?;
        cal.validate()?;
        Ok(cal)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("calendar serializes")
    }
}

/// Half-open date interval `[start, end)`; `end = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<NaiveDate>,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: Option<NaiveDate>) -> Result<Self> {
        if let Some(end) = end {
            if end <= start {
                return Err(Error::validation(format!(
                    "date range end {end} not after start {start}"
                )));
            }
        }
        Ok(DateRange { start, end })
    }

    pub fn from(start: NaiveDate) -> Self {
        DateRange { start, end: None }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.start && self.end.is_none_or(|end| date < end)
    }
}

/// Competition counts for one route on one date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteCounts {
    pub nairlines_a_pair: u32,
    pub nairlines_adj_pair: u32,
    pub nairlines_airp_o: u32,
}

/// Period dummies driven by date ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRanges {
    /// Applied to the quotation date.
    pub fin_crisis: DateRange,
    /// Applied to the departure date.
    pub delay: DateRange,
    /// Applied to the quotation date.
    pub azul: DateRange,
}

impl Default for PeriodRanges {
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        PeriodRanges {
            fin_crisis: DateRange::from(d(2008, 10, 1)),
            delay: DateRange {
                start: d(2008, 11, 15),
                end: Some(d(2009, 2, 16)),
            },
            azul: DateRange::from(d(2008, 12, 15)),
        }
    }
}

/// Exogenous shifters joined onto quotes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExogenousSeries {
    /// BRL per USD, keyed by date.
    pub usd: BTreeMap<NaiveDate, f64>,
    /// Connecting passengers, keyed by date.
    pub conn_pax: BTreeMap<NaiveDate, f64>,
    /// Keyed by (date, origin, destination).
    pub route_counts: BTreeMap<(NaiveDate, String, String), RouteCounts>,
    pub periods: PeriodRanges,
}

impl ExogenousSeries {
    pub fn validate(&self) -> Result<()> {
        if let Some((d, v)) = self.usd.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::validation(format!("usd on {d} must be positive, got {v}")));
        }
        if let Some((d, v)) = self.conn_pax.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::validation(format!(
                "conn_pax on {d} must be non-negative, got {v}"
            )));
        }
        Ok(())
    }
}

/// One estimation row.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelObservation {
    pub y: f64,
    pub x: Vec<f64>,
    pub entity_key: EntityKey,
    pub quote_period_key: PeriodKey,
    pub depart_period_key: PeriodKey,
    /// Kept for subset filters.
    pub origin: String,
    pub stops: u32,
}

/// Absorbed fixed-effect dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeDimension {
    Entity,
    QuotePeriod,
    DepartPeriod,
}

impl fmt::Display for FeDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeDimension::Entity => "entity",
            FeDimension::QuotePeriod => "quote_period",
            FeDimension::DepartPeriod => "depart_period",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepVar {
    Raw,
    /// 100 x ln(price)
    #[default]
    Log100,
}

impl DepVar {
    pub fn transform(self, price: f64) -> f64 {
        match self {
            DepVar::Raw => price,
            DepVar::Log100 => 100.0 * price.ln(),
        }
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            DepVar::Raw => y,
            DepVar::Log100 => (y / 100.0).exp(),
        }
    }
}

impl FromStr for DepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(DepVar::Raw),
            "log100" => Ok(DepVar::Log100),
            other => Err(Error::validation(format!("unknown depvar {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeKind {
    #[default]
    Classical,
    /// Heteroskedasticity-robust sandwich (HC1).
    Robust,
}

/// Holiday window widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HolidayWindowConfig {
    pub eve_days: u32,
    pub post_days: u32,
    /// Restrict the `hday_*` window regressors to holidays of this length.
    pub holiday_length_filter: Option<u32>,
}

impl Default for HolidayWindowConfig {
    fn default() -> Self {
        HolidayWindowConfig {
            eve_days: 1,
            post_days: 1,
            holiday_length_filter: None,
        }
    }
}

impl HolidayWindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eve_days < 1 || self.post_days < 1 {
            return Err(Error::validation("eve_days and post_days must be >= 1"));
        }
        if self.holiday_length_filter == Some(0) {
            return Err(Error::validation("holiday_length_filter must be >= 1"));
        }
        Ok(())
    }
}

/// A named explanatory variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regressor {
    HdayQutEve,
    HdayQuoteNOfDays,
    HdayQutPost,
    HdayDeptEve,
    HdayDeptNOfDays,
    HdayDeptPost,
    /// Quotation date falls inside a holiday lasting exactly this many days.
    QuoteHolidayDays(u32),
    /// Departure date falls inside a holiday lasting exactly this many days.
    DeptHolidayDays(u32),
    /// Departure date falls inside the named holiday.
    HdayDept(String),
    AdvDays,
    /// Advance-purchase bucket whose lower threshold is this many days.
    AdvBucket(u32),
    Nstop,
    Usd,
    FinCrisis,
    Delay,
    Azul,
    ConnPax,
    NairlinesAPair,
    NairlinesAdjPair,
    NairlinesAirpO,
}

impl Regressor {
    /// The sixteen regressors of the base-case model.
    pub fn base_case() -> Vec<Regressor> {
        use Regressor::*;
        vec![
            HdayQutEve,
            HdayQuoteNOfDays,
            HdayQutPost,
            HdayDeptEve,
            HdayDeptNOfDays,
            HdayDeptPost,
            Usd,
            AdvDays,
            Nstop,
            FinCrisis,
            Delay,
            Azul,
            ConnPax,
            NairlinesAPair,
            NairlinesAdjPair,
            NairlinesAirpO,
        ]
    }

    pub fn is_dummy(&self) -> bool {
        !matches!(
            self,
            Regressor::AdvDays
                | Regressor::Usd
                | Regressor::ConnPax
                | Regressor::NairlinesAPair
                | Regressor::NairlinesAdjPair
                | Regressor::NairlinesAirpO
        )
    }
}

const FIXED_NAMES: &[(&str, Regressor)] = &[
    ("hday_qut_eve", Regressor::HdayQutEve),
    ("hday_quote_n_of_days", Regressor::HdayQuoteNOfDays),
    ("hday_qut_post", Regressor::HdayQutPost),
    ("hday_dept_eve", Regressor::HdayDeptEve),
    ("hday_dept_n_of_days", Regressor::HdayDeptNOfDays),
    ("hday_dept_post", Regressor::HdayDeptPost),
    ("adv_days", Regressor::AdvDays),
    ("nstop", Regressor::Nstop),
    ("usd", Regressor::Usd),
    ("fin_crisis", Regressor::FinCrisis),
    ("delay", Regressor::Delay),
    ("azul", Regressor::Azul),
    ("conn_pax", Regressor::ConnPax),
    ("nairlines_a_pair", Regressor::NairlinesAPair),
    ("nairlines_adj_pair", Regressor::NairlinesAdjPair),
    ("nairlines_airp_o", Regressor::NairlinesAirpO),
];

impl fmt::Display for Regressor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regressor::QuoteHolidayDays(n) => write!(f, "qholndays_{n}"),
            Regressor::DeptHolidayDays(n) => write!(f, "dholndays_{n}"),
            Regressor::HdayDept(name) => write!(f, "hday_dept_{name}"),
            Regressor::AdvBucket(t) => write!(f, "adv_days_{t:02}"),
            fixed => {
                let name = FIXED_NAMES
                    .iter()
                    .find(|(_, r)| r == fixed)
                    .map(|(n, _)| *n)
                    .expect("every fixed regressor is named");
                f.write_str(name)
            }
        }
    }
}

impl FromStr for Regressor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((_, r)) = FIXED_NAMES.iter().find(|(n, _)| *n == s) {
            return Ok(r.clone());
        }
        let bad = || Error::validation(format!("unknown regressor {s:?}"));
        let number = |rest: &str| -> Result<u32> {
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            rest.parse().map_err(|_| bad())
        };
        if let Some(rest) = s.strip_prefix("qholndays_") {
            return Ok(Regressor::QuoteHolidayDays(number(rest)?));
        }
        if let Some(rest) = s.strip_prefix("dholndays_") {
            return Ok(Regressor::DeptHolidayDays(number(rest)?));
        }
        if let Some(rest) = s.strip_prefix("adv_days_") {
            return Ok(Regressor::AdvBucket(number(rest)?));
        }
        if let Some(rest) = s.strip_prefix("hday_dept_") {
            if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Ok(Regressor::HdayDept(rest.to_owned()));
            }
        }
        Err(bad())
    }
}

impl Serialize for Regressor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Regressor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Default advance-purchase bucket thresholds in days.
pub const DEFAULT_ADV_THRESHOLDS: [u32; 7] = [3, 5, 7, 10, 30, 45, 60];

/// Configuration of one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    /// Column-group label in rendered tables.
    pub label: String,
    pub regressors: Vec<Regressor>,
    pub fe_dimensions: Vec<FeDimension>,
    pub granularity: Granularity,
    pub pair_direction: PairDirection,
    pub depvar: DepVar,
    /// Keep only rows whose origin is in this set; `None` keeps all.
    pub airports: Option<BTreeSet<String>>,
    /// Keep only rows with this many stops; `None` keeps all.
    pub stops: Option<u32>,
    pub window: HolidayWindowConfig,
    pub adv_thresholds: Vec<u32>,
    pub se: SeKind,
    pub demean_tol: f64,
    pub max_iter: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            label: "price".to_owned(),
            regressors: Regressor::base_case(),
            fe_dimensions: vec![
                FeDimension::Entity,
                FeDimension::QuotePeriod,
                FeDimension::DepartPeriod,
            ],
            granularity: Granularity::Month,
            pair_direction: PairDirection::Directed,
            depvar: DepVar::Log100,
            airports: None,
            stops: None,
            window: HolidayWindowConfig::default(),
            adv_thresholds: DEFAULT_ADV_THRESHOLDS.to_vec(),
            se: SeKind::Classical,
            demean_tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.fe_dimensions.is_empty() {
            return Err(Error::validation("at least one fixed-effect dimension is required"));
        }
        let dims: BTreeSet<_> = self.fe_dimensions.iter().collect();
        if dims.len() != self.fe_dimensions.len() {
            return Err(Error::validation("duplicate fixed-effect dimension"));
        }
        if self.regressors.is_empty() {
            return Err(Error::validation("regressor list is empty"));
        }
        let mut names = BTreeSet::new();
        for r in &self.regressors {
            if !names.insert(r.to_string()) {
                return Err(Error::validation(format!("duplicate regressor {r}")));
            }
            if let Regressor::AdvBucket(t) = r {
                if !self.adv_thresholds.contains(t) {
                    return Err(Error::validation(format!(
                        "{r} does not match any advance-purchase threshold"
                    )));
                }
            }
        }
        if self.adv_thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(
                "advance-purchase thresholds must be strictly increasing",
            ));
        }
        self.window.validate()?;
        if !(self.demean_tol.is_finite() && self.demean_tol >= 0.0) {
            return Err(Error::validation("demean_tol must be finite and non-negative"));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("max_iter must be >= 1"));
        }
        Ok(())
    }

    /// FE dimensions in the fixed sweep order entity -> quote -> depart.
    pub fn sweep_order(&self) -> Vec<FeDimension> {
        let mut dims = self.fe_dimensions.clone();
        dims.sort();
        dims
    }

    pub fn regressor_names(&self) -> Vec<String> {
        self.regressors.iter().map(ToString::to_string).collect()
    }
}

/// Why a regressor received no coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// No variation left after removing the fixed effects.
    AbsorbedByFixedEffects,
    /// Linearly dependent on earlier regressors.
    Collinear,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropReason::AbsorbedByFixedEffects => "absorbed by fixed effects",
            DropReason::Collinear => "collinear with other regressors",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    #[serde(with = "lossless_f64")]
    pub estimate: f64,
    #[serde(with = "lossless_f64")]
    pub std_error: f64,
    #[serde(with = "lossless_f64")]
    pub t_stat: f64,
    #[serde(with = "lossless_f64")]
    pub p_value: f64,
    pub stars: String,
}

/// JSON has no NaN or infinity; those are written as strings.
mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeLevels {
    pub dimension: FeDimension,
    pub levels: usize,
}

/// Bookkeeping for the absorbed dimensions.
///
/// `absorbed` is L1 for one dimension, L1 + L2 - C for two, and
/// L1 + (L2 - C) + (L3 - 1) for three, where C counts connected components
/// of the bipartite graph between the first two dimensions. The third
/// dimension takes the conservative L3 - 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeDiagnostics {
    pub levels: Vec<FeLevels>,
    pub absorbed: usize,
    /// `None` with a single dimension.
    pub components: Option<usize>,
    pub singletons: usize,
    pub demean_iterations: usize,
    #[serde(with = "lossless_f64")]
    pub demean_last_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub label: String,
    /// Every requested regressor in spec order.
    pub regressors: Vec<String>,
    /// Estimated coefficients, in spec order (dropped regressors omitted).
    pub coefficients: Vec<Coefficient>,
    pub dropped: Vec<DroppedColumn>,
    pub n_obs: usize,
    pub df_residual: usize,
    /// Overall R-squared on the untransformed dependent variable, fixed
    /// effects included in the fitted values.
    #[serde(with = "lossless_f64")]
    pub r_squared: f64,
    #[serde(with = "lossless_f64")]
    pub adj_r_squared: f64,
    #[serde(with = "lossless_f64")]
    pub within_r_squared: f64,
    #[serde(with = "lossless_f64")]
    pub adj_within_r_squared: f64,
    pub se_kind: SeKind,
    pub fe: FeDiagnostics,
    /// The intercept is not separately identified under within estimation.
    pub intercept: String,
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn dropped_reason(&self, name: &str) -> Option<DropReason> {
        self.dropped.iter().find(|d| d.name == name).map(|d| d.reason)
    }

    /// Whether the regressor is part of this fit (estimated or dropped).
    pub fn has_term(&self, name: &str) -> bool {
        self.coefficient(name).is_some() || self.dropped_reason(name).is_some()
    }
}
