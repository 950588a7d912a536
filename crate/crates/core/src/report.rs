//! Regression tables and machine-readable result records.
//!
//! Each fit becomes a column group of two columns: the coefficient with its
//! significance stars, and the standard error. Display precision is three
//! decimals; the JSON record keeps full precision.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FitResult, ModelSpec};

pub const STAR_LEGEND: &str = "* p<0.05, ** p<0.01, *** p<0.001";
pub const SE_NOTE: &str = "Standard errors in second column";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    /// Comma-separated.
    Delim,
    /// Markdown table.
    Markup,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Delim => "csv",
            Format::Markup => "md",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "delim" => Ok(Format::Delim),
            "markup" => Ok(Format::Markup),
            other => Err(Error::validation(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FooterRow {
    Observations,
    AdjustedRSquared,
    WithinRSquared,
}

impl FooterRow {
    fn label(self) -> &'static str {
        match self {
            FooterRow::Observations => "Observations",
            FooterRow::AdjustedRSquared => "Adjusted R-squared",
            FooterRow::WithinRSquared => "Within R-squared",
        }
    }

    fn value(self, fit: &FitResult) -> String {
        match self {
            FooterRow::Observations => fit.n_obs.to_string(),
            FooterRow::AdjustedRSquared => fmt3(fit.adj_r_squared),
            FooterRow::WithinRSquared => fmt3(fit.within_r_squared),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableLayout {
    pub title: String,
    /// One label per fit, in column order.
    pub groups: Vec<String>,
    pub rows: Vec<String>,
    pub footer: Vec<FooterRow>,
    pub notes: Vec<String>,
}

impl TableLayout {
    /// Rows are the union of the fits' regressors in first-seen order.
    pub fn for_fits(title: &str, fits: &[FitResult]) -> Self {
        let mut rows: Vec<String> = Vec::new();
        for f in fits {
            for r in &f.regressors {
                if !rows.contains(r) {
                    rows.push(r.clone());
                }
            }
        }
        TableLayout {
            title: title.to_owned(),
            groups: fits.iter().map(|f| f.label.clone()).collect(),
            rows,
            footer: vec![FooterRow::Observations, FooterRow::AdjustedRSquared],
            notes: vec![SE_NOTE.to_owned(), STAR_LEGEND.to_owned()],
        }
    }
}

/// Three decimals, never a negative zero.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_owned()
    } else {
        s
    }
}

/// Coefficient cell: estimate with star suffix.
pub fn coefficient_cell(estimate: f64, stars: &str) -> String {
    format!("{}{stars}", fmt3(estimate))
}

struct Grid {
    header: Vec<String>,
    body: Vec<Vec<String>>,
    footer: Vec<Vec<String>>,
    notes: Vec<String>,
}

fn build_grid(fits: &[FitResult], layout: &TableLayout) -> Result<Grid> {
    if fits.is_empty() {
        return Err(Error::Render("no fits to render".into()));
    }
    if layout.groups.len() != fits.len() {
        return Err(Error::Render(format!(
            "layout has {} column groups for {} fits",
            layout.groups.len(),
            fits.len()
        )));
    }
    for row in &layout.rows {
        if !fits.iter().any(|f| f.has_term(row)) {
            return Err(Error::Render(format!("row {row:?} is missing from every fit")));
        }
    }
    let mut header = vec![String::new()];
    for (i, g) in layout.groups.iter().enumerate() {
        header.push(format!("({}) {g}", i + 1));
        header.push(String::new());
    }
    let body = layout
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![row.clone()];
            for f in fits {
                match f.coefficient(row) {
                    Some(c) => {
                        cells.push(coefficient_cell(c.estimate, &c.stars));
                        cells.push(fmt3(c.std_error));
                    }
                    None => cells.extend([String::new(), String::new()]),
                }
            }
            cells
        })
        .collect();
    let footer = layout
        .footer
        .iter()
        .map(|row| {
            let mut cells = vec![row.label().to_owned()];
            for f in fits {
                cells.push(row.value(f));
                cells.push(String::new());
            }
            cells
        })
        .collect();
    let mut notes = layout.notes.clone();
    notes.push("Constant absorbed by the fixed effects".to_owned());
    for (i, f) in fits.iter().enumerate() {
        for d in &f.dropped {
            if layout.rows.contains(&d.name) {
                notes.push(format!("({}) {} dropped: {}", i + 1, d.name, d.reason));
            }
        }
    }
    Ok(Grid {
        header,
        body,
        footer,
        notes,
    })
}

/// Renders `fits` side by side.
pub fn render_table(fits: &[FitResult], layout: &TableLayout, format: Format) -> Result<String> {
    let grid = build_grid(fits, layout)?;
    match format {
        Format::Text => Ok(render_text(&grid, &layout.title)),
        Format::Delim => render_delim(&grid, &layout.title),
        Format::Markup => Ok(render_markup(&grid, &layout.title)),
    }
}

fn render_text(grid: &Grid, title: &str) -> String {
    let ncol = grid.header.len();
    let all = std::iter::once(&grid.header)
        .chain(&grid.body)
        .chain(&grid.footer);
    let mut widths = vec![0usize; ncol];
    for row in all {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    // group headers span the coefficient and error columns
    for g in (1..ncol).step_by(2) {
        let span = widths[g] + 2 + widths[g + 1];
        let need = grid.header[g].chars().count();
        if need > span {
            widths[g] += need - span;
        }
    }
    let total: usize = widths.iter().sum::<usize>() + 2 * (ncol - 1);
    let rule = "-".repeat(total);
    let mut out = String::new();
    if !title.is_empty() {
        let _ = writeln!(out, "{title}");
    }
    let _ = writeln!(out, "{rule}");
    let mut line = format!("{:<w$}", "", w = widths[0]);
    for g in (1..ncol).step_by(2) {
        let span = widths[g] + 2 + widths[g + 1];
        let _ = write!(line, "  {:<span$}", grid.header[g]);
    }
    let _ = writeln!(out, "{}", line.trim_end());
    let _ = writeln!(out, "{rule}");
    let emit = |rows: &[Vec<String>], out: &mut String| {
        for row in rows {
            let mut line = format!("{:<w$}", row[0], w = widths[0]);
            for (c, w) in row.iter().zip(&widths).skip(1) {
                let _ = write!(line, "  {c:>w$}");
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    };
    emit(&grid.body, &mut out);
    let _ = writeln!(out, "{rule}");
    emit(&grid.footer, &mut out);
    let _ = writeln!(out, "{rule}");
    for n in &grid.notes {
        let _ = writeln!(out, "{n}");
    }
    out
}

fn render_delim(grid: &Grid, title: &str) -> Result<String> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Render(e.to_string());
    if !title.is_empty() {
        w.write_record([title]).map_err(err)?;
    }
    w.write_record(&grid.header).map_err(err)?;
    for row in grid.body.iter().chain(&grid.footer) {
        w.write_record(row).map_err(err)?;
    }
    for n in &grid.notes {
        w.write_record([n]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Render(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Render(e.to_string()))
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|").replace('*', "\\*")
}

fn render_markup(grid: &Grid, title: &str) -> String {
    let mut out = String::new();
    if !title.is_empty() {
        let _ = writeln!(out, "**{}**\n", md_escape(title));
    }
    let row = |cells: &[String]| {
        let inner: Vec<String> = cells.iter().map(|c| md_escape(c)).collect();
        format!("| {} |", inner.join(" | "))
    };
    let _ = writeln!(out, "{}", row(&grid.header));
    let mut align = vec!["---".to_owned()];
    align.extend(std::iter::repeat_n("---:".to_owned(), grid.header.len() - 1));
    let _ = writeln!(out, "| {} |", align.join(" | "));
    for r in grid.body.iter().chain(&grid.footer) {
        let _ = writeln!(out, "{}", row(r));
    }
    out.push('\n');
    for n in &grid.notes {
        let _ = writeln!(out, "{}  ", md_escape(n));
    }
    out
}

/// Full-precision record of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub spec: Option<ModelSpec>,
    pub result: FitResult,
}

pub fn export_results(fit: &FitResult, spec: Option<&ModelSpec>) -> ResultRecord {
    ResultRecord {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        spec: spec.cloned(),
        result: fit.clone(),
    }
}

/// A rendered table's fits together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub title: String,
    pub fits: Vec<ResultRecord>,
}

pub fn to_json<T: Serialize>(record: &T) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("results record: {e}")))
}
