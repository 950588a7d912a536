//! Readers and writers for the exogenous series and holiday calendar files.
//!
//! `usd` and `conn_pax` files have columns `date,<value>`; the route file has
//! `date,origin,destination,nairlines_a_pair,nairlines_adj_pair,nairlines_airp_o`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HolidayCalendar, RouteCounts};

#[derive(Debug, Serialize, Deserialize)]
struct RouteRow {
    date: NaiveDate,
    origin: String,
    destination: String,
    nairlines_a_pair: u32,
    nairlines_adj_pair: u32,
    nairlines_airp_o: u32,
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

/// Reads a `date,<value_column>` series.
pub fn read_date_series<R: Read>(reader: R, value_column: &str, delimiter: u8) -> Result<BTreeMap<NaiveDate, f64>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let (di, vi) = (find("date")?, find(value_column)?);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row_err = |message: String| Error::Row { line, message };
        let date_s = rec.get(di).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d")
            .map_err(|_| row_err(format!("invalid date {date_s:?}")))?;
        let val_s = rec.get(vi).unwrap_or("").trim();
        let value: f64 = val_s
            .parse()
            .map_err(|_| row_err(format!("invalid {value_column} {val_s:?}")))?;
        if out.insert(date, value).is_some() {
            return Err(row_err(format!("duplicate date {date}")));
        }
    }
    Ok(out)
}

pub fn write_date_series<W: Write>(writer: W, value_column: &str, series: &BTreeMap<NaiveDate, f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Validation(format!("csv write: {e}"));
    w.write_record(["date", value_column]).map_err(err)?;
    for (d, v) in series {
        w.write_record([d.format("%Y-%m-%d").to_string(), v.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

pub type RouteTable = BTreeMap<(NaiveDate, String, String), RouteCounts>;

pub fn read_route_counts<R: Read>(reader: R, delimiter: u8) -> Result<RouteTable> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.deserialize::<RouteRow>() {
        let row = rec.map_err(|e| match e.position() {
            Some(p) => Error::Row {
                line: p.line(),
                message: e.to_string(),
            },
            None => Error::Schema(e.to_string()),
        })?;
        let key = (row.date, row.origin, row.destination);
        let counts = RouteCounts {
            nairlines_a_pair: row.nairlines_a_pair,
            nairlines_adj_pair: row.nairlines_adj_pair,
            nairlines_airp_o: row.nairlines_airp_o,
        };
        if out.insert(key.clone(), counts).is_some() {
            return Err(Error::validation(format!(
                "duplicate route counts for {} {}>{}",
                key.0, key.1, key.2
            )));
        }
    }
    Ok(out)
}

pub fn write_route_counts<W: Write>(writer: W, table: &RouteTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for ((date, origin, destination), c) in table {
        w.serialize(RouteRow {
            date: *date,
            origin: origin.clone(),
            destination: destination.clone(),
            nairlines_a_pair: c.nairlines_a_pair,
            nairlines_adj_pair: c.nairlines_adj_pair,
            nairlines_airp_o: c.nairlines_airp_o,
        })
        .map_err(|e| Error::Validation(format!("csv write: {e}")))?;
    }
    w.flush().map_err(|e| Error::Validation(e.to_string()))
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { .. } | Error::Format { .. } => e,
        other => format_err(path, other),
    })
}

pub fn load_date_series(path: &Path, value_column: &str, delimiter: u8) -> Result<BTreeMap<NaiveDate, f64>> {
    with_path(path, read_date_series(open(path)?, value_column, delimiter))
}

pub fn load_route_counts(path: &Path, delimiter: u8) -> Result<RouteTable> {
    with_path(path, read_route_counts(open(path)?, delimiter))
}

pub fn load_calendar(path: &Path) -> Result<HolidayCalendar> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    with_path(path, HolidayCalendar::from_toml_str(&text))
}
