//! Run configuration file.
//!
//! ```toml
//! [paths]
//! quotes = "data/quotes.csv"
//! sample = "out/sample.csv"
//! calendar = "data/calendar.toml"
//! usd = "data/usd.csv"
//! conn_pax = "data/conn_pax.csv"
//! nairlines = "data/nairlines.csv"
//! output_dir = "out"
//!
//! [ingest]
//! delimiter = ","
//! airports = ["GRU", "CGH"]
//!
//! [model]            # defaults shared by every spec below
//! granularity = "month"
//!
//! [[tables]]
//! name = "base"
//! title = "Holiday effects on fares"
//! [[tables.specs]]
//! label = "GRU and CGH price"
//! [[tables.specs]]
//! label = "GRU price"
//! airports = ["GRU"]
//!
//! [synth]
//! seed = 1
//! rows = 50000
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use farepanel::report::Format;
use farepanel::synthgen::DgpSpec;
use farepanel::{DepVar, Granularity, ModelSpec, PeriodRanges, SeKind};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub quotes: Option<PathBuf>,
    pub sample: Option<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub usd: Option<PathBuf>,
    pub conn_pax: Option<PathBuf>,
    pub nairlines: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub delimiter: char,
    /// Origins kept by sample selection; empty keeps every origin.
    pub airports: Vec<String>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            delimiter: ',',
            airports: vec!["CGH".into(), "GRU".into()],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub name: String,
    #[serde(default)]
    pub title: String,
    /// Partial specs merged over `[model]`.
    pub specs: Vec<toml::Table>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    paths: PathsConfig,
    #[serde(default)]
    ingest: IngestConfig,
    #[serde(default)]
    periods: Option<PeriodRanges>,
    #[serde(default)]
    model: toml::Table,
    #[serde(default)]
    tables: Vec<TableConfig>,
    #[serde(default)]
    synth: Option<DgpSpec>,
    #[serde(default)]
    format: Option<Format>,
}

/// One table of a fit batch with its specs resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePlan {
    pub name: String,
    pub title: String,
    pub specs: Vec<ModelSpec>,
}

/// Command-line overrides applied after the file is read.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub robust_se: bool,
    pub granularity: Option<Granularity>,
    pub depvar: Option<DepVar>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub base_dir: PathBuf,
    pub paths: PathsConfig,
    pub ingest: IngestConfig,
    pub periods: PeriodRanges,
    pub tables: Vec<TablePlan>,
    pub synth: DgpSpec,
    pub format: Format,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_toml(&text, &base, overrides)
            .map_err(|e| e.context(format!("config {}", path.display())))
    }

    pub fn from_toml(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut tables = Vec::with_capacity(raw.tables.len());
        for t in &raw.tables {
            if t.specs.is_empty() {
                return Err(CliError::Validate(format!("table {:?} lists no specs", t.name)));
            }
            let specs = t
                .specs
                .iter()
                .map(|partial| resolve_spec(&raw.model, partial, overrides))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.context(format!("table {:?}", t.name)))?;
            tables.push(TablePlan {
                name: t.name.clone(),
                title: t.title.clone(),
                specs,
            });
        }
        let names: BTreeSet<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        if names.len() != tables.len() {
            return Err(CliError::Validate("table names must be unique".into()));
        }
        if let Some(bad) = tables.iter().find(|t| !valid_stem(&t.name)) {
            return Err(CliError::Validate(format!(
                "table name {:?} must be a plain file stem",
                bad.name
            )));
        }
        let mut synth = raw.synth.unwrap_or_default();
        if let Some(seed) = overrides.seed {
            synth.seed = seed;
        }
        if !raw.ingest.delimiter.is_ascii() {
            return Err(CliError::Validate("delimiter must be a single ASCII character".into()));
        }
        Ok(RunConfig {
            base_dir: base_dir.to_path_buf(),
            paths: raw.paths,
            ingest: raw.ingest,
            periods: raw.periods.unwrap_or_default(),
            tables,
            synth,
            format: overrides.format.or(raw.format).unwrap_or_default(),
        })
    }

    pub fn delimiter(&self) -> u8 {
        self.ingest.delimiter as u8
    }

    pub fn airports(&self) -> farepanel::AirportFilter {
        if self.ingest.airports.is_empty() {
            farepanel::AirportFilter::any()
        } else {
            farepanel::AirportFilter(Some(self.ingest.airports.iter().cloned().collect()))
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.paths.output_dir.as_deref().unwrap_or(Path::new("out")))
    }

    /// A configured path, or an error naming the missing key.
    pub fn path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.optional_path(key)
            .ok_or_else(|| CliError::Validate(format!("[paths] {key} is not set")))
    }

    pub fn optional_path(&self, key: &str) -> Option<PathBuf> {
        let p = match key {
            "quotes" => self.paths.quotes.as_deref(),
            "sample" => {
                return Some(match &self.paths.sample {
                    Some(p) => self.resolve(p),
                    None => self.output_dir().join("sample.csv"),
                })
            }
            "calendar" => self.paths.calendar.as_deref(),
            "usd" => self.paths.usd.as_deref(),
            "conn_pax" => self.paths.conn_pax.as_deref(),
            "nairlines" => self.paths.nairlines.as_deref(),
            _ => None,
        }?;
        Some(self.resolve(p))
    }
}

fn valid_stem(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn resolve_spec(
    defaults: &toml::Table,
    partial: &toml::Table,
    overrides: &Overrides,
) -> Result<ModelSpec, CliError> {
    let mut merged = defaults.clone();
    for (k, v) in partial {
        merged.insert(k.clone(), v.clone());
    }
    let mut spec: ModelSpec = toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    if overrides.robust_se {
        spec.se = SeKind::Robust;
    }
    if let Some(g) = overrides.granularity {
        spec.granularity = g;
    }
    if let Some(d) = overrides.depvar {
        spec.depvar = d;
    }
    spec.validate().map_err(CliError::from)?;
    Ok(spec)
}
