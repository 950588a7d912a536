//! Synthetic fare panels from a known data-generating process.
//!
//! The dependent variable is built as
//! `y = lambda_entity + mu_quote + mu_depart + x'beta + u` with normal draws
//! for every effect and the noise, then mapped to a price through the
//! inverse of the dependent-variable transform. Regressors come from the
//! same feature builder the estimation path uses, applied to generated
//! quotes, a fixed holiday calendar and random exogenous series.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{Datelike, Days, Months, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::demean::{demean_columns, FeGroups};
use crate::estimator::fit::{assemble, ABSORB_TOL_FACTOR};
use crate::features::build_features;
use crate::model::{
    DateRange, DepVar, ExogenousSeries, FareQuote, HolidayCalendar, HolidaySpec,
    HolidayWindowConfig, ModelSpec, PeriodRanges, Regressor, RouteCounts,
};

const AIRLINES: [&str; 6] = ["TAM", "GOL", "AZU", "WEB", "OCE", "TRP"];
const ORIGINS: [&str; 2] = ["CGH", "GRU"];
const DESTINATIONS: [&str; 12] = [
    "SDU", "GIG", "BSB", "POA", "CNF", "SSA", "REC", "CWB", "FLN", "FOR", "BEL", "VIX",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCoefficient {
    pub name: Regressor,
    pub value: f64,
}

/// Data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgpSpec {
    pub coefficients: Vec<PlantedCoefficient>,
    /// Airline x route combinations.
    pub entities: usize,
    /// Calendar months of quotation dates, counted from `start`'s month.
    pub quote_periods: u32,
    /// Calendar months of departure dates, counted from `start`'s month.
    pub depart_periods: u32,
    pub sigma_entity: f64,
    pub sigma_quote: f64,
    pub sigma_depart: f64,
    pub sigma_noise: f64,
    /// Mean of the entity effects, on the dependent-variable scale.
    pub base_level: f64,
    pub rows: usize,
    pub seed: u64,
    pub start: NaiveDate,
    pub max_adv_days: u32,
    pub periods: PeriodRanges,
    pub window: HolidayWindowConfig,
    /// Fractions of extra raw rows that sample selection must remove:
    /// pricier duplicates, international quotes, non-Sao-Paulo origins.
    pub duplicate_share: f64,
    pub international_share: f64,
    pub other_airport_share: f64,
}

impl Default for DgpSpec {
    fn default() -> Self {
        DgpSpec::base_case(1, 50_000)
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

impl DgpSpec {
    /// Sixteen-regressor process with effect sizes shaped like a
    /// holiday-airfare base case: positive departure-window effects,
    /// negative quotation-window and advance-purchase effects.
    pub fn base_case(seed: u64, rows: usize) -> Self {
        use Regressor::*;
        let planted = [
            (HdayQutEve, -2.589),
            (HdayQuoteNOfDays, -0.780),
            (HdayQutPost, -3.608),
            (HdayDeptEve, 12.119),
            (HdayDeptNOfDays, 1.388),
            (HdayDeptPost, 7.200),
            (Usd, 35.849),
            (AdvDays, -0.317),
            (Nstop, -30.891),
            (FinCrisis, -2.378),
            (Delay, 12.554),
            (Azul, -2.905),
            (ConnPax, -38.506),
            (NairlinesAPair, -3.582),
            (NairlinesAdjPair, -0.103),
            (NairlinesAirpO, -1.210),
        ];
        DgpSpec {
            coefficients: planted
                .into_iter()
                .map(|(name, value)| PlantedCoefficient { name, value })
                .collect(),
            entities: 48,
            quote_periods: 23,
            depart_periods: 26,
            sigma_entity: 20.0,
            sigma_quote: 5.0,
            sigma_depart: 5.0,
            sigma_noise: 25.0,
            base_level: 550.0,
            rows,
            seed,
            start: date(2008, 5, 5),
            max_adv_days: 90,
            // Boundaries sit mid-month so the period dummies are not spanned
            // by monthly fixed effects.
            periods: PeriodRanges {
                fin_crisis: DateRange::from(date(2008, 10, 15)),
                delay: DateRange {
                    start: date(2008, 11, 15),
                    end: Some(date(2009, 2, 16)),
                },
                azul: DateRange::from(date(2008, 12, 15)),
            },
            window: HolidayWindowConfig::default(),
            duplicate_share: 0.05,
            international_share: 0.02,
            other_airport_share: 0.03,
        }
    }

    pub fn regressors(&self) -> Vec<Regressor> {
        self.coefficients.iter().map(|c| c.name.clone()).collect()
    }

    /// Month-granularity three-way model matching this process.
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            regressors: self.regressors(),
            window: self.window,
            depvar: DepVar::Log100,
            ..ModelSpec::default()
        }
    }

    pub fn max_entities() -> usize {
        AIRLINES.len() * ORIGINS.len() * DESTINATIONS.len()
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.sigma_entity,
            self.sigma_quote,
            self.sigma_depart,
            self.sigma_noise,
        ];
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::validation("standard deviations must be finite and >= 0"));
        }
        if self.coefficients.is_empty() {
            return Err(Error::validation("at least one planted coefficient is required"));
        }
        if self.rows < 10 * self.coefficients.len() {
            return Err(Error::validation(format!(
                "{} rows is fewer than 10 per planted coefficient",
                self.rows
            )));
        }
        if self.entities == 0 || self.quote_periods == 0 || self.depart_periods == 0 {
            return Err(Error::validation("entity and period counts must be positive"));
        }
        if self.entities > Self::max_entities() {
            return Err(Error::validation(format!(
                "at most {} entities are available",
                Self::max_entities()
            )));
        }
        if self.depart_periods < self.quote_periods {
            return Err(Error::validation(
                "departure window must span at least the quotation window",
            ));
        }
        let shares = [
            self.duplicate_share,
            self.international_share,
            self.other_airport_share,
        ];
        if shares.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::validation("decoy shares must lie in [0, 1]"));
        }
        self.window.validate()?;
        self.model_spec().validate()
    }
}

/// Known truth behind a synthetic panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub seed: u64,
    pub rows: usize,
    pub coefficients: Vec<PlantedCoefficient>,
    pub sigma_noise: f64,
    pub dgp: DgpSpec,
}

impl TruthRecord {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.coefficients
            .iter()
            .find(|c| c.name.to_string() == name)
            .map(|c| c.value)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticPanel {
    /// Raw quotes, decoys included.
    pub quotes: Vec<FareQuote>,
    pub exogenous: ExogenousSeries,
    pub calendar: HolidayCalendar,
    pub truth: TruthRecord,
}

fn observed(
    y: i32,
    month: u32,
    day: u32,
    name: &str,
) -> HolidaySpec {
    // A weekday holiday next to a weekend becomes a three-day break.
    let d = date(y, month, day);
    let (start, length_days) = match d.weekday() {
        Weekday::Fri => (d, 3),
        Weekday::Mon => (d - Days::new(2), 3),
        _ => (d, 1),
    };
    HolidaySpec {
        name: name.to_owned(),
        start_date: start,
        length_days,
        excluded: false,
    }
}

/// Holiday calendar for 2008-2011 with the twelve national and Sao Paulo
/// holidays; Carnival is listed but excluded.
pub fn default_calendar() -> HolidayCalendar {
    // (year, easter sunday)
    const EASTER: [(i32, u32, u32); 4] = [(2008, 3, 23), (2009, 4, 12), (2010, 4, 4), (2011, 4, 24)];
    let fixed = [
        (1, 1, "anonovo"),
        (1, 25, "anivsp"),
        (4, 21, "tiradent"),
        (5, 1, "trabalho"),
        (7, 9, "9jul"),
        (9, 7, "independ"),
        (10, 12, "aparecida"),
        (11, 2, "finados"),
        (11, 20, "consnegra"),
        (12, 25, "natal"),
    ];
    let mut hs = Vec::new();
    for (y, em, ed) in EASTER {
        for (m, d, name) in fixed {
            hs.push(observed(y, m, d, name));
        }
        let easter = date(y, em, ed);
        hs.push(HolidaySpec {
            name: "pascoa".into(),
            start_date: easter - Days::new(2),
            length_days: 3,
            excluded: false,
        });
        hs.push(HolidaySpec {
            name: "chorpus".into(),
            start_date: easter + Days::new(60),
            length_days: 4,
            excluded: false,
        });
        hs.push(HolidaySpec {
            name: "carnaval".into(),
            start_date: easter - Days::new(51),
            length_days: 5,
            excluded: true,
        });
    }
    hs.sort_by(|a, b| (a.start_date, &a.name).cmp(&(b.start_date, &b.name)));
    HolidayCalendar::new(hs).expect("built-in calendar is valid")
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite sd")
}

/// Generates a panel from `dgp`. Identical specs give identical output.
pub fn generate(dgp: &DgpSpec) -> Result<SyntheticPanel> {
    dgp.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(dgp.seed);
    let calendar = default_calendar();
    let spec = dgp.model_spec();

    let month_start = dgp.start.with_day(1).expect("day 1 exists");
    let quote_end = month_start + Months::new(dgp.quote_periods);
    let depart_end = month_start + Months::new(dgp.depart_periods);
    if !calendar.covers(depart_end - Days::new(1)) || !calendar.covers(dgp.start) {
        return Err(Error::validation(format!(
            "dates {}..{depart_end} leave the built-in calendar's coverage",
            dgp.start
        )));
    }
    let quote_days = (quote_end - dgp.start).num_days();
    if quote_days <= 0 {
        return Err(Error::validation("quotation window is empty"));
    }

    let entities: Vec<(&str, &str, &str)> = (0..dgp.entities)
        .map(|i| {
            let airline = AIRLINES[i % AIRLINES.len()];
            let route = i / AIRLINES.len();
            (
                airline,
                ORIGINS[route % ORIGINS.len()],
                DESTINATIONS[route / ORIGINS.len()],
            )
        })
        .collect();

    // Fixed effects.
    let entity_fx: Vec<f64> = (0..dgp.entities)
        .map(|_| dgp.base_level + normal(dgp.sigma_entity).sample(&mut rng))
        .collect();
    let quote_fx: Vec<f64> = (0..dgp.quote_periods)
        .map(|_| normal(dgp.sigma_quote).sample(&mut rng))
        .collect();
    let depart_fx: Vec<f64> = (0..dgp.depart_periods)
        .map(|_| normal(dgp.sigma_depart).sample(&mut rng))
        .collect();
    let month_index = |d: NaiveDate| -> usize {
        ((d.year() - month_start.year()) * 12 + d.month() as i32 - month_start.month() as i32) as usize
    };

    // Exogenous series over every date that can occur.
    let mut exogenous = ExogenousSeries {
        periods: dgp.periods,
        ..ExogenousSeries::default()
    };
    let step = normal(0.01);
    let mut usd = 1.7_f64;
    let mut day = dgp.start;
    while day < depart_end {
        usd = (usd + step.sample(&mut rng)).clamp(1.4, 2.6);
        exogenous.usd.insert(day, usd);
        exogenous.conn_pax.insert(day, 0.2 + 0.2 * rng.random::<f64>());
        day = day + Days::new(1);
    }
    let needs_routes = spec.regressors.iter().any(|r| {
        matches!(
            r,
            Regressor::NairlinesAPair | Regressor::NairlinesAdjPair | Regressor::NairlinesAirpO
        )
    });
    if needs_routes {
        let mut routes: Vec<(&str, &str)> = entities.iter().map(|&(_, o, d)| (o, d)).collect();
        routes.sort_unstable();
        routes.dedup();
        let mut day = dgp.start;
        while day < depart_end {
            for &(o, d) in &routes {
                exogenous.route_counts.insert(
                    (day, o.to_owned(), d.to_owned()),
                    RouteCounts {
                        nairlines_a_pair: rng.random_range(1..=5),
                        nairlines_adj_pair: rng.random_range(2..=7),
                        nairlines_airp_o: rng.random_range(3..=9),
                    },
                );
            }
            day = day + Days::new(1);
        }
    }

    // Planted rows, one per (entity, quotation date, departure date).
    let mut seen = HashSet::new();
    let mut planted = Vec::with_capacity(dgp.rows);
    let mut row_entity = Vec::with_capacity(dgp.rows);
    let max_tries = 1000 * dgp.rows.max(1);
    let mut tries = 0usize;
    while planted.len() < dgp.rows {
        tries += 1;
        if tries > max_tries {
            return Err(Error::validation(
                "cannot place the requested rows in the date windows",
            ));
        }
        let e = rng.random_range(0..dgp.entities);
        let q = dgp.start + Days::new(rng.random_range(0..quote_days as u64));
        let adv = rng.random_range(0..=dgp.max_adv_days);
        let d = q + Days::new(u64::from(adv));
        if d >= depart_end || !seen.insert((e, q, d)) {
            continue;
        }
        let (airline, origin, destination) = entities[e];
        planted.push(FareQuote {
            airline: airline.to_owned(),
            origin: origin.to_owned(),
            destination: destination.to_owned(),
            quotation_date: q,
            departure_date: d,
            stops: rng.random_range(0..=2),
            price: 1.0,
            is_domestic: true,
        });
        row_entity.push(e);
    }

    let features = build_features(&planted, &calendar, &exogenous, &spec)?;
    if features.dropped.total() != 0 {
        return Err(Error::validation("synthetic exogenous series do not cover every row"));
    }
    check_identified(&features.observations, &spec)?;

    let noise = normal(dgp.sigma_noise);
    let beta: Vec<f64> = dgp.coefficients.iter().map(|c| c.value).collect();
    for (i, quote) in planted.iter_mut().enumerate() {
        let obs = &features.observations[i];
        let xb: f64 = obs.x.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let y = entity_fx[row_entity[i]]
            + quote_fx[month_index(quote.quotation_date)]
            + depart_fx[month_index(quote.departure_date)]
            + xb
            + noise.sample(&mut rng);
        quote.price = spec.depvar.inverse(y);
    }

    let quotes = add_decoys(planted, dgp, &mut rng);
    Ok(SyntheticPanel {
        quotes,
        exogenous,
        calendar,
        truth: TruthRecord {
            seed: dgp.seed,
            rows: dgp.rows,
            coefficients: dgp.coefficients.clone(),
            sigma_noise: dgp.sigma_noise,
            dgp: dgp.clone(),
        },
    })
}

/// Every regressor must keep variation once the fixed effects are removed.
fn check_identified(observations: &[crate::model::PanelObservation], spec: &ModelSpec) -> Result<()> {
    let design = assemble(observations, spec)?;
    let groups: &FeGroups = &design.groups;
    let mut within = design.x.clone();
    demean_columns(&mut within, groups, crate::estimator::DemeanOptions::default())?;
    let n = design.y.len() as f64;
    for ((name, raw), col) in design.names.iter().zip(&design.x).zip(&within) {
        let mean = raw.iter().sum::<f64>() / n;
        let centered = raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
        let remaining = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if centered == 0.0 || remaining <= ABSORB_TOL_FACTOR * 1e-8 * centered {
            return Err(Error::validation(format!(
                "planted regressor {name} has no variation after removing fixed effects"
            )));
        }
    }
    Ok(())
}

fn add_decoys(planted: Vec<FareQuote>, dgp: &DgpSpec, rng: &mut ChaCha8Rng) -> Vec<FareQuote> {
    let mut out = Vec::with_capacity(planted.len() * 11 / 10);
    let mut pending: HashMap<usize, FareQuote> = HashMap::new();
    for (i, q) in planted.into_iter().enumerate() {
        if rng.random::<f64>() < dgp.duplicate_share {
            let mut dup = q.clone();
            dup.price *= 1.25;
            dup.stops = rng.random_range(0..=2);
            // emit the pricier copy either before or after the original
            if rng.random::<bool>() {
                out.push(dup);
            } else {
                pending.insert(i, dup);
            }
        }
        if rng.random::<f64>() < dgp.international_share {
            let mut intl = q.clone();
            intl.origin = "GRU".into();
            intl.destination = ["MIA", "EZE", "LIS"][rng.random_range(0..3)].into();
            intl.is_domestic = false;
            intl.price *= 3.0;
            out.push(intl);
        }
        if rng.random::<f64>() < dgp.other_airport_share {
            let mut other = q.clone();
            other.origin = ["BSB", "GIG", "VCP"][rng.random_range(0..3)].into();
            out.push(other);
        }
        out.push(q);
        if let Some(dup) = pending.remove(&i) {
            out.push(dup);
        }
    }
    out
}

/// Planted values keyed by regressor name.
pub fn truth_map(truth: &TruthRecord) -> BTreeMap<String, f64> {
    truth
        .coefficients
        .iter()
        .map(|c| (c.name.to_string(), c.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{select_sample, AirportFilter};

    fn small(seed: u64) -> DgpSpec {
        DgpSpec {
            rows: 600,
            ..DgpSpec::base_case(seed, 600)
        }
    }

    #[test]
    fn same_seed_same_panel() {
        let a = generate(&small(7)).unwrap();
        let b = generate(&small(7)).unwrap();
        assert_eq!(a.quotes, b.quotes);
        assert_eq!(a.exogenous, b.exogenous);
        let c = generate(&small(8)).unwrap();
        assert_ne!(a.quotes, c.quotes);
    }

    #[test]
    fn degenerate_process_gives_equal_prices() {
        let mut dgp = small(3);
        dgp.sigma_entity = 0.0;
        dgp.sigma_quote = 0.0;
        dgp.sigma_depart = 0.0;
        dgp.sigma_noise = 0.0;
        dgp.coefficients.iter_mut().for_each(|c| c.value = 0.0);
        let panel = generate(&dgp).unwrap();
        let (sample, _) = select_sample(&panel.quotes, &AirportFilter::sao_paulo());
        let p0 = sample[0].price;
        assert!(sample.iter().all(|q| q.price == p0));
        assert!((p0 - (5.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn decoys_are_removed_by_selection() {
        let panel = generate(&small(11)).unwrap();
        assert!(panel.quotes.len() > 600);
        let (sample, report) = select_sample(&panel.quotes, &AirportFilter::sao_paulo());
        assert_eq!(sample.len(), 600);
        assert!(report.rows_dropped_international > 0);
        assert!(report.rows_dropped_airport_filter > 0);
    }

    #[test]
    fn infeasible_specs_fail() {
        let mut dgp = small(1);
        dgp.quote_periods = 0;
        assert!(generate(&dgp).is_err());
        let mut dgp = small(1);
        dgp.rows = 20;
        assert!(generate(&dgp).is_err());
        let mut dgp = small(1);
        dgp.sigma_noise = -1.0;
        assert!(generate(&dgp).is_err());
    }

    #[test]
    fn period_dummy_on_a_month_boundary_is_rejected() {
        let mut dgp = small(2);
        dgp.periods.fin_crisis = DateRange::from(date(2008, 10, 1));
        let err = generate(&dgp).unwrap_err();
        assert!(err.to_string().contains("fin_crisis"), "{err}");
    }

    #[test]
    fn calendar_has_three_day_holidays() {
        let cal = default_calendar();
        assert!(cal.holidays().iter().any(|h| h.length_days == 3 && !h.excluded));
        assert_eq!(cal.names().len(), 12);
    }
}
