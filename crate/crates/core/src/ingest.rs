//! Fare-quote file parsing and sample selection.
//!
//! Selection runs in a fixed order: minimum-fare reduction per
//! (airline, origin, destination, quotation date, departure date), then the
//! domestic-only and airport filters.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FareQuote;

pub const QUOTE_COLUMNS: [&str; 8] = [
    "airline",
    "origin",
    "destination",
    "quotation_date",
    "departure_date",
    "stops",
    "price",
    "is_domestic",
];

/// A rejected input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedQuotes {
    pub quotes: Vec<FareQuote>,
    pub rejects: Vec<RowError>,
}

/// Parses delimited quote rows. Missing columns are fatal; malformed rows
/// are collected in `rejects` with their line numbers.
pub fn parse_quotes<R: Read>(reader: R, delimiter: u8) -> Result<ParsedQuotes> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
        .clone();
    let mut index = [0usize; QUOTE_COLUMNS.len()];
    for (slot, col) in index.iter_mut().zip(QUOTE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| Error::Schema(format!("missing column {col:?}")))?;
    }

    let mut out = ParsedQuotes::default();
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line() + 1;
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                match parse_row(&record, &index) {
                    Ok(q) => out.quotes.push(q),
                    Err(message) => out.rejects.push(RowError { line, message }),
                }
            }
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                out.rejects.push(RowError {
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

pub fn read_quotes_file(path: &Path, delimiter: u8) -> Result<ParsedQuotes> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_quotes(std::io::BufReader::new(file), delimiter).map_err(|e| match e {
        Error::Schema(msg) => Error::Format {
            path: path.to_owned(),
            message: msg,
        },
        other => other,
    })
}

fn parse_row(record: &csv::StringRecord, index: &[usize]) -> std::result::Result<FareQuote, String> {
    let field = |i: usize| -> std::result::Result<&str, String> {
        record
            .get(index[i])
            .map(str::trim)
            .ok_or_else(|| format!("missing field {}", QUOTE_COLUMNS[i]))
    };
    let date = |i: usize| -> std::result::Result<NaiveDate, String> {
        let s = field(i)?;
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|_| format!("{}: invalid ISO-8601 date {s:?}", QUOTE_COLUMNS[i]))
    };
    let stops_s = field(5)?;
    let stops = stops_s
        .parse::<u32>()
        .map_err(|_| format!("stops: invalid count {stops_s:?}"))?;
    let price_s = field(6)?;
    let price = price_s
        .parse::<f64>()
        .ok()
        .filter(|p| p.is_finite())
        .ok_or_else(|| format!("price: invalid number {price_s:?}"))?;
    let dom_s = field(7)?;
    let is_domestic = match dom_s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => true,
        "false" | "0" | "no" => false,
        _ => return Err(format!("is_domestic: invalid flag {dom_s:?}")),
    };
    let q = FareQuote {
        airline: field(0)?.to_owned(),
        origin: field(1)?.to_owned(),
        destination: field(2)?.to_owned(),
        quotation_date: date(3)?,
        departure_date: date(4)?,
        stops,
        price,
        is_domestic,
    };
    q.validate().map_err(|e| match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    })?;
    Ok(q)
}

/// Writes quotes in the input schema.
pub fn write_quotes<W: Write>(writer: W, quotes: &[FareQuote], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    let csv_err = |e: csv::Error| Error::Validation(format!("csv write: {e}"));
    w.write_record(QUOTE_COLUMNS).map_err(csv_err)?;
    for q in quotes {
        w.write_record([
            q.airline.as_str(),
            q.origin.as_str(),
            q.destination.as_str(),
            &q.quotation_date.format("%Y-%m-%d").to_string(),
            &q.departure_date.format("%Y-%m-%d").to_string(),
            &q.stops.to_string(),
            &q.price.to_string(),
            if q.is_domestic { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Validation(format!("csv flush: {e}")))?;
    Ok(())
}

type GroupKey = (String, String, String, NaiveDate, NaiveDate, bool);

fn group_key(q: &FareQuote) -> GroupKey {
    (
        q.airline.clone(),
        q.origin.clone(),
        q.destination.clone(),
        q.quotation_date,
        q.departure_date,
        q.is_domestic,
    )
}

/// Keeps the cheapest quote of each (airline, origin, destination,
/// quotation date, departure date) group; equal prices keep the first seen.
///
/// The domestic flag is part of the group so the later domestic filter acts
/// on whole groups. Output is sorted by the group key.
pub fn select_min_fare(quotes: &[FareQuote]) -> Vec<FareQuote> {
    let mut best: BTreeMap<GroupKey, &FareQuote> = BTreeMap::new();
    for q in quotes {
        match best.entry(group_key(q)) {
            Entry::Vacant(v) => {
                v.insert(q);
            }
            Entry::Occupied(mut o) => {
                if q.price < o.get().price {
                    o.insert(q);
                }
            }
        }
    }
    best.into_values().cloned().collect()
}

/// Counts from the selection procedure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Rows rejected by the parser; not part of `rows_read`.
    pub rows_rejected: usize,
    pub rows_read: usize,
    pub rows_after_min_fare: usize,
    pub rows_dropped_international: usize,
    pub rows_dropped_airport_filter: usize,
    pub final_count: usize,
}

impl SelectionReport {
    pub fn is_consistent(&self) -> bool {
        self.rows_read >= self.rows_after_min_fare
            && self.rows_after_min_fare
                == self.final_count + self.rows_dropped_international + self.rows_dropped_airport_filter
    }
}

/// Origin airports kept by the sample filter; `None` keeps every origin.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AirportFilter(pub Option<BTreeSet<String>>);

impl AirportFilter {
    pub fn sao_paulo() -> Self {
        AirportFilter(Some(["CGH", "GRU"].map(str::to_owned).into()))
    }

    pub fn any() -> Self {
        AirportFilter(None)
    }

    pub fn allows(&self, origin: &str) -> bool {
        self.0.as_ref().is_none_or(|set| set.contains(origin))
    }
}

/// Drops international quotes, then quotes whose origin is outside the
/// filter. A row failing both is tallied as international.
pub fn filter_sample(quotes: &[FareQuote], airports: &AirportFilter) -> (Vec<FareQuote>, SelectionReport) {
    let mut report = SelectionReport {
        rows_read: quotes.len(),
        rows_after_min_fare: quotes.len(),
        ..SelectionReport::default()
    };
    let mut kept = Vec::with_capacity(quotes.len());
    for q in quotes {
        if !q.is_domestic {
            report.rows_dropped_international += 1;
        } else if !airports.allows(&q.origin) {
            report.rows_dropped_airport_filter += 1;
        } else {
            kept.push(q.clone());
        }
    }
    report.final_count = kept.len();
    (kept, report)
}

/// Full selection: minimum fare, then filters.
pub fn select_sample(quotes: &[FareQuote], airports: &AirportFilter) -> (Vec<FareQuote>, SelectionReport) {
    let reduced = select_min_fare(quotes);
    let (kept, mut report) = filter_sample(&reduced, airports);
    report.rows_read = quotes.len();
    report.rows_after_min_fare = reduced.len();
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "airline,origin,destination,quotation_date,departure_date,stops,price,is_domestic\n";

    fn quote(airline: &str, origin: &str, q: &str, d: &str, price: f64, domestic: bool) -> FareQuote {
        FareQuote {
            airline: airline.into(),
            origin: origin.into(),
            destination: "SDU".into(),
            quotation_date: q.parse().unwrap(),
            departure_date: d.parse().unwrap(),
            stops: 0,
            price,
            is_domestic: domestic,
        }
    }

    #[test]
    fn parses_well_formed_rows() {
        let body = "TAM,CGH,SDU,2009-01-01,2009-01-10,0,350.5,true\n\
                    GOL,GRU,SDU,2009-01-01,2009-01-10,1,299,true\n\
                    GOL,GRU,MIA,2009-01-01,2009-01-10,1,1999.9,false\n\
                    AZU,CGH,POA,2009-02-01,2009-02-01,2,410,1\n\
                    TAM,BSB,SDU,2009-02-01,2009-03-01,0,120.25,0\n";
        let parsed = parse_quotes(format!("{HEADER}{body}").as_bytes(), b',').unwrap();
        assert_eq!(parsed.quotes.len(), 5);
        assert!(parsed.rejects.is_empty());
        // parsing does not filter international rows
        assert_eq!(parsed.quotes.iter().filter(|q| !q.is_domestic).count(), 2);
    }

    #[test]
    fn bad_price_is_a_row_error() {
        let body = "TAM,CGH,SDU,2009-01-01,2009-01-10,0,abc,true\n\
                    GOL,GRU,SDU,2009-01-01,2009-01-10,1,299,true\n\
                    GOL,GRU,SDU,2009-13-01,2009-01-10,1,299,true\n";
        let parsed = parse_quotes(format!("{HEADER}{body}").as_bytes(), b',').unwrap();
        assert_eq!(parsed.quotes.len(), 1);
        assert_eq!(parsed.rejects.len(), 2);
        assert_eq!(parsed.rejects[0].line, 2);
        assert!(parsed.rejects[0].message.contains("price"));
        assert_eq!(parsed.rejects[1].line, 4);
    }

    #[test]
    fn missing_column_is_fatal() {
        let text = "airline,origin,destination,quotation_date,departure_date,price,is_domestic\n";
        let err = parse_quotes(text.as_bytes(), b',').unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("stops")));
    }

    #[test]
    fn tab_delimited_input() {
        let text = HEADER.replace(',', "\t") + "TAM\tCGH\tSDU\t2009-01-01\t2009-01-10\t0\t350\ttrue\n";
        let parsed = parse_quotes(text.as_bytes(), b'\t').unwrap();
        assert_eq!(parsed.quotes.len(), 1);
    }

    #[test]
    fn min_fare_keeps_cheapest_and_first_tie() {
        let a = quote("TAM", "CGH", "2009-01-01", "2009-01-05", 500.0, true);
        let b = quote("TAM", "CGH", "2009-01-01", "2009-01-05", 450.0, true);
        let out = select_min_fare(&[a.clone(), b.clone()]);
        assert_eq!(out, vec![b]);

        let mut c = a.clone();
        c.stops = 2;
        let out = select_min_fare(&[a.clone(), c]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].stops, 0);

        let other = quote("GOL", "CGH", "2009-01-01", "2009-01-05", 500.0, true);
        assert_eq!(select_min_fare(&[a, other]).len(), 2);
        assert!(select_min_fare(&[]).is_empty());
    }

    #[test]
    fn filter_tallies_reasons() {
        let rows = vec![
            quote("TAM", "GRU", "2009-01-01", "2009-01-05", 500.0, false),
            quote("TAM", "BSB", "2009-01-01", "2009-01-05", 500.0, true),
            quote("TAM", "BSB", "2009-01-01", "2009-01-06", 500.0, false),
            quote("TAM", "CGH", "2009-01-01", "2009-01-05", 500.0, true),
        ];
        let (kept, report) = filter_sample(&rows, &AirportFilter::sao_paulo());
        assert_eq!(kept.len(), 1);
        assert_eq!(report.rows_dropped_international, 2);
        assert_eq!(report.rows_dropped_airport_filter, 1);
        assert!(report.is_consistent());
    }

    #[test]
    fn write_then_parse_preserves_quotes() {
        let rows = vec![
            quote("TAM", "GRU", "2009-01-01", "2009-01-05", 512.123456789, false),
            quote("GOL", "CGH", "2009-01-01", "2009-01-05", 0.1 + 0.2, true),
        ];
        let mut buf = Vec::new();
        write_quotes(&mut buf, &rows, b',').unwrap();
        let parsed = parse_quotes(buf.as_slice(), b',').unwrap();
        assert_eq!(parsed.quotes, rows);
    }
}
