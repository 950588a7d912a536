//! Regressor construction from selected quotes.

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    entity_key, period_key, ExogenousSeries, FareQuote, HolidayCalendar, HolidaySpec,
    HolidayWindowConfig, ModelSpec, PanelObservation, Regressor,
};

/// Calendar days between quotation and departure.
pub fn adv_days(quotation_date: NaiveDate, departure_date: NaiveDate) -> Result<u32> {
    let days = (departure_date - quotation_date).num_days();
    u32::try_from(days).map_err(|_| {
        Error::validation(format!(
            "departure {departure_date} precedes quotation {quotation_date}"
        ))
    })
}

/// Index of the bucket `adv` falls in: the largest threshold not above it.
/// `None` is the baseline category below the first threshold.
pub fn adv_bucket(adv: u32, thresholds: &[u32]) -> Option<usize> {
    thresholds.iter().rposition(|&t| t <= adv)
}

/// One-hot encoding of [`adv_bucket`] over `thresholds`.
pub fn adv_bucket_dummies(adv: u32, thresholds: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; thresholds.len()];
    if let Some(i) = adv_bucket(adv, thresholds) {
        out[i] = 1.0;
    }
    out
}

/// Position of a date relative to the nearest holiday.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowFlags {
    pub eve: bool,
    pub during: bool,
    pub post: bool,
    pub holiday: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum WindowKind {
    Eve,
    During,
    Post,
}

/// Eve, during and post flags for `date`.
///
/// Windows partition the days around a holiday: `eve_days` days before the
/// start, the holiday itself, and `post_days` days after its last day. When
/// windows of several holidays contain the date, the one at the smallest
/// day distance wins; ties go to the earlier start date, then the name.
pub fn holiday_windows(
    date: NaiveDate,
    calendar: &HolidayCalendar,
    config: &HolidayWindowConfig,
) -> Result<WindowFlags> {
    if !calendar.covers(date) {
        return Err(Error::validation(format!(
            "date {date} is outside the holiday calendar coverage {:?}",
            calendar.coverage()
        )));
    }
    Ok(windows_among(date, calendar.active(), config))
}

fn windows_among<'a>(
    date: NaiveDate,
    holidays: impl Iterator<Item = &'a HolidaySpec>,
    config: &HolidayWindowConfig,
) -> WindowFlags {
    let eve = i64::from(config.eve_days);
    let post = i64::from(config.post_days);
    let mut best: Option<(i64, NaiveDate, &str, WindowKind)> = None;
    for h in holidays {
        let from_start = (date - h.start_date).num_days();
        let len = i64::from(h.length_days);
        let hit = if (-eve..0).contains(&from_start) {
            Some((-from_start, WindowKind::Eve))
        } else if (0..len).contains(&from_start) {
            Some((0, WindowKind::During))
        } else if (len..len + post).contains(&from_start) {
            Some((from_start - len + 1, WindowKind::Post))
        } else {
            None
        };
        if let Some((dist, kind)) = hit {
            let cand = (dist, h.start_date, h.name.as_str(), kind);
            if best.is_none_or(|b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                best = Some(cand);
            }
        }
    }
    match best {
        None => WindowFlags::default(),
        Some((_, _, name, kind)) => WindowFlags {
            eve: kind == WindowKind::Eve,
            during: kind == WindowKind::During,
            post: kind == WindowKind::Post,
            holiday: Some(name.to_owned()),
        },
    }
}

/// Named regressor columns, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(&self.columns[i])
    }
}

/// Rows removed because a join found no value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDrops {
    pub missing_usd: usize,
    pub missing_conn_pax: usize,
    pub missing_route_counts: usize,
}

impl FeatureDrops {
    pub fn total(&self) -> usize {
        self.missing_usd + self.missing_conn_pax + self.missing_route_counts
    }
}

#[derive(Debug, Clone)]
pub struct FeatureBuild {
    pub matrix: FeatureMatrix,
    pub observations: Vec<PanelObservation>,
    pub dropped: FeatureDrops,
}

struct WindowSources {
    windows: HolidayCalendar,
    by_length: HashMap<u32, HolidayCalendar>,
}

#[derive(Default)]
struct DateFlags {
    windows: WindowFlags,
    // keyed by holiday length
    during_by_length: HashMap<u32, bool>,
}

impl WindowSources {
    fn new(calendar: &HolidayCalendar, spec: &ModelSpec) -> Self {
        let windows = match spec.window.holiday_length_filter {
            Some(len) => calendar.with_length(len),
            None => calendar.clone(),
        };
        let mut by_length = HashMap::new();
        for r in &spec.regressors {
            if let Regressor::QuoteHolidayDays(n) | Regressor::DeptHolidayDays(n) = r {
                by_length
                    .entry(*n)
                    .or_insert_with(|| calendar.with_length(*n));
            }
        }
        WindowSources { windows, by_length }
    }

    fn flags(&self, date: NaiveDate, config: &HolidayWindowConfig) -> DateFlags {
        DateFlags {
            windows: windows_among(date, self.windows.active(), config),
            during_by_length: self
                .by_length
                .iter()
                .map(|(&n, cal)| (n, windows_among(date, cal.active(), config).during))
                .collect(),
        }
    }
}

fn needs_calendar(r: &Regressor) -> bool {
    matches!(
        r,
        Regressor::HdayQutEve
            | Regressor::HdayQuoteNOfDays
            | Regressor::HdayQutPost
            | Regressor::HdayDeptEve
            | Regressor::HdayDeptNOfDays
            | Regressor::HdayDeptPost
            | Regressor::QuoteHolidayDays(_)
            | Regressor::DeptHolidayDays(_)
            | Regressor::HdayDept(_)
    )
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Builds the regressor matrix and panel rows for `spec`.
///
/// Rows whose exogenous joins find no value are dropped and counted; only
/// joins that some requested regressor needs are attempted. `usd` joins on
/// the quotation date, `conn_pax` on the departure date, and the route counts
/// on (departure date, origin, destination).
pub fn build_features(
    quotes: &[FareQuote],
    calendar: &HolidayCalendar,
    exogenous: &ExogenousSeries,
    spec: &ModelSpec,
) -> Result<FeatureBuild> {
    spec.validate()?;
    calendar.validate()?;
    exogenous.validate()?;

    let regs = &spec.regressors;
    let uses_calendar = regs.iter().any(needs_calendar);
    let uses_usd = regs.contains(&Regressor::Usd);
    let uses_conn = regs.contains(&Regressor::ConnPax);
    let uses_routes = regs.iter().any(|r| {
        matches!(
            r,
            Regressor::NairlinesAPair | Regressor::NairlinesAdjPair | Regressor::NairlinesAirpO
        )
    });
    let sources = uses_calendar.then(|| WindowSources::new(calendar, spec));
    let mut flag_cache: HashMap<NaiveDate, DateFlags> = HashMap::new();
    let ensure_flags = |cache: &mut HashMap<NaiveDate, DateFlags>, date: NaiveDate| -> Result<()> {
        if let Some(src) = &sources {
            if !cache.contains_key(&date) {
                if !calendar.covers(date) {
                    return Err(Error::validation(format!(
                        "date {date} is outside the holiday calendar coverage {:?}",
                        calendar.coverage()
                    )));
                }
                cache.insert(date, src.flags(date, &spec.window));
            }
        }
        Ok(())
    };

    let mut dropped = FeatureDrops::default();
    let mut observations = Vec::with_capacity(quotes.len());
    for q in quotes {
        q.validate()?;
        let usd = match uses_usd {
            true => match exogenous.usd.get(&q.quotation_date) {
                Some(v) => *v,
                None => {
                    dropped.missing_usd += 1;
                    continue;
                }
            },
            false => f64::NAN,
        };
        let conn = match uses_conn {
            true => match exogenous.conn_pax.get(&q.departure_date) {
                Some(v) => *v,
                None => {
                    dropped.missing_conn_pax += 1;
                    continue;
                }
            },
            false => f64::NAN,
        };
        let counts = match uses_routes {
            true => match exogenous.route_counts.get(&(
                q.departure_date,
                q.origin.clone(),
                q.destination.clone(),
            )) {
                Some(c) => Some(*c),
                None => {
                    dropped.missing_route_counts += 1;
                    continue;
                }
            },
            false => None,
        };

        ensure_flags(&mut flag_cache, q.quotation_date)?;
        ensure_flags(&mut flag_cache, q.departure_date)?;
        let empty = DateFlags::default();
        let qf = flag_cache.get(&q.quotation_date).unwrap_or(&empty);
        let df = flag_cache.get(&q.departure_date).unwrap_or(&empty);
        let adv = adv_days(q.quotation_date, q.departure_date)?;
        let bucket = adv_bucket(adv, &spec.adv_thresholds);
        let periods = &exogenous.periods;

        let x = regs
            .iter()
            .map(|r| match r {
                Regressor::HdayQutEve => flag(qf.windows.eve),
                Regressor::HdayQuoteNOfDays => flag(qf.windows.during),
                Regressor::HdayQutPost => flag(qf.windows.post),
                Regressor::HdayDeptEve => flag(df.windows.eve),
                Regressor::HdayDeptNOfDays => flag(df.windows.during),
                Regressor::HdayDeptPost => flag(df.windows.post),
                Regressor::QuoteHolidayDays(n) => flag(qf.during_by_length[n]),
                Regressor::DeptHolidayDays(n) => flag(df.during_by_length[n]),
                Regressor::HdayDept(name) => {
                    flag(df.windows.during && df.windows.holiday.as_deref() == Some(name))
                }
                Regressor::AdvDays => f64::from(adv),
                Regressor::AdvBucket(t) => {
                    flag(bucket.is_some_and(|i| spec.adv_thresholds[i] == *t))
                }
                Regressor::Nstop => flag(q.stops == 0),
                Regressor::Usd => usd,
                Regressor::FinCrisis => flag(periods.fin_crisis.contains(q.quotation_date)),
                Regressor::Delay => flag(periods.delay.contains(q.departure_date)),
                Regressor::Azul => flag(periods.azul.contains(q.quotation_date)),
                Regressor::ConnPax => conn,
                Regressor::NairlinesAPair => f64::from(counts.map_or(0, |c| c.nairlines_a_pair)),
                Regressor::NairlinesAdjPair => {
                    f64::from(counts.map_or(0, |c| c.nairlines_adj_pair))
                }
                Regressor::NairlinesAirpO => f64::from(counts.map_or(0, |c| c.nairlines_airp_o)),
            })
            .collect();

        observations.push(PanelObservation {
            y: spec.depvar.transform(q.price),
            x,
            entity_key: entity_key(&q.airline, &q.origin, &q.destination, spec.pair_direction)?,
            quote_period_key: period_key(q.quotation_date, spec.granularity),
            depart_period_key: period_key(q.departure_date, spec.granularity),
            origin: q.origin.clone(),
            stops: q.stops,
        });
    }

    if observations.is_empty() {
        return Err(Error::validation(format!(
            "no observations left after joins ({} dropped)",
            dropped.total()
        )));
    }

    let names = spec.regressor_names();
    let columns = (0..names.len())
        .map(|j| observations.iter().map(|o| o.x[j]).collect())
        .collect();
    Ok(FeatureBuild {
        matrix: FeatureMatrix { names, columns },
        observations,
        dropped,
    })
}
