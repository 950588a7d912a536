//! Subcommand implementations. Each returns the text destined for standard
//! output; files are written under the configured paths.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use farepanel::exogenous::{
    load_calendar, load_date_series, load_route_counts, write_date_series, write_route_counts,
};
use farepanel::ingest::{read_quotes_file, write_quotes};
use farepanel::report::{export_results, render_table, to_json, TableLayout, TableRecord};
use farepanel::selfcheck::{run_checks, CheckOptions};
use farepanel::synthgen::generate;
use farepanel::{
    build_features, fit, select_sample, Error, ExogenousSeries, FitResult, HolidayCalendar,
    ModelSpec, Regressor, SelectionReport, Stage, StageExt,
};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;

const MAX_LOGGED_REJECTS: usize = 20;

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        ))
    }
}

pub fn render_selection_report(r: &SelectionReport) -> String {
    let rows = [
        ("rows rejected by parser", r.rows_rejected),
        ("rows read", r.rows_read),
        ("rows after minimum-fare selection", r.rows_after_min_fare),
        ("dropped: international", r.rows_dropped_international),
        ("dropped: origin airport", r.rows_dropped_airport_filter),
        ("final sample", r.final_count),
    ];
    let mut out = String::new();
    for (label, n) in rows {
        let _ = writeln!(out, "{label:<34} {n:>10}");
    }
    out
}

/// Reads raw quotes, applies sample selection and writes the sample and
/// its report.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<String, CliError> {
    let input = cfg.path("quotes")?;
    require_file(&input)?;
    let parsed = read_quotes_file(&input, cfg.delimiter()).stage(Stage::Parse)?;
    for r in parsed.rejects.iter().take(MAX_LOGGED_REJECTS) {
        warn!("{}: line {}: {}", input.display(), r.line, r.message);
    }
    if parsed.rejects.len() > MAX_LOGGED_REJECTS {
        warn!("{} more rejected rows", parsed.rejects.len() - MAX_LOGGED_REJECTS);
    }
    let (sample, mut report) = select_sample(&parsed.quotes, &cfg.airports());
    report.rows_rejected = parsed.rejects.len();

    let mut buf = Vec::new();
    write_quotes(&mut buf, &sample, cfg.delimiter()).stage(Stage::Select)?;
    write_file(&cfg.path("sample")?, &buf)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_file(&cfg.output_dir().join("selection_report.json"), json.as_bytes())?;
    Ok(render_selection_report(&report))
}

fn needs(specs: &[&ModelSpec], pred: impl Fn(&Regressor) -> bool) -> bool {
    specs.iter().any(|s| s.regressors.iter().any(&pred))
}

fn load_inputs(cfg: &RunConfig, specs: &[&ModelSpec]) -> Result<(HolidayCalendar, ExogenousSeries), CliError> {
    let delim = cfg.delimiter();
    let calendar = match cfg.optional_path("calendar") {
        Some(p) => {
            require_file(&p)?;
            load_calendar(&p).stage(Stage::Parse)?
        }
        None => HolidayCalendar::default(),
    };
    let mut exo = ExogenousSeries {
        periods: cfg.periods,
        ..ExogenousSeries::default()
    };
    let wanted = [
        ("usd", needs(specs, |r| *r == Regressor::Usd)),
        ("conn_pax", needs(specs, |r| *r == Regressor::ConnPax)),
        (
            "nairlines",
            needs(specs, |r| {
                matches!(
                    r,
                    Regressor::NairlinesAPair | Regressor::NairlinesAdjPair | Regressor::NairlinesAirpO
                )
            }),
        ),
    ];
    for (key, used) in wanted {
        if !used {
            continue;
        }
        let path = cfg.path(key)?;
        require_file(&path)?;
        match key {
            "usd" => exo.usd = load_date_series(&path, "usd", delim).stage(Stage::Parse)?,
            "conn_pax" => exo.conn_pax = load_date_series(&path, "conn_pax", delim).stage(Stage::Parse)?,
            _ => exo.route_counts = load_route_counts(&path, delim).stage(Stage::Parse)?,
        }
    }
    Ok((calendar, exo))
}

fn fit_spec(
    sample: &[farepanel::FareQuote],
    calendar: &HolidayCalendar,
    exo: &ExogenousSeries,
    spec: &ModelSpec,
) -> Result<FitResult, Error> {
    let fb = build_features(sample, calendar, exo, spec).stage(Stage::Features)?;
    if fb.dropped.total() > 0 {
        warn!(
            "{}: {} rows lack exogenous data (usd {}, conn_pax {}, route counts {})",
            spec.label,
            fb.dropped.total(),
            fb.dropped.missing_usd,
            fb.dropped.missing_conn_pax,
            fb.dropped.missing_route_counts
        );
    }
    let result = fit(&fb.observations, spec)?;
    info!(
        "{}: n = {}, df = {}, {} sweeps",
        spec.label, result.n_obs, result.df_residual, result.fe.demean_iterations
    );
    Ok(result)
}

/// Fits every configured table and writes rendered tables and records.
pub fn cmd_fit(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.tables.is_empty() {
        return Err(CliError::Validate("no [[tables]] configured".into()));
    }
    let sample_path = cfg.path("sample")?;
    require_file(&sample_path)?;
    let parsed = read_quotes_file(&sample_path, cfg.delimiter()).stage(Stage::Parse)?;
    if let Some(r) = parsed.rejects.first() {
        return Err(CliError::from(Error::Row {
            line: r.line,
            message: r.message.clone(),
        })
        .context(format!("sample {}", sample_path.display())));
    }
    let specs: Vec<(usize, &ModelSpec)> = cfg
        .tables
        .iter()
        .enumerate()
        .flat_map(|(t, plan)| plan.specs.iter().map(move |s| (t, s)))
        .collect();
    let spec_refs: Vec<&ModelSpec> = specs.iter().map(|(_, s)| *s).collect();
    let (calendar, exo) = load_inputs(cfg, &spec_refs)?;

    // Independent specs fit in parallel; collection keeps config order.
    let fits: Vec<Result<FitResult, CliError>> = specs
        .par_iter()
        .map(|(t, spec)| {
            fit_spec(&parsed.quotes, &calendar, &exo, spec).map_err(|e| {
                CliError::from(e).context(format!(
                    "table {:?}, spec {:?}",
                    cfg.tables[*t].name, spec.label
                ))
            })
        })
        .collect();
    let mut fits = fits.into_iter();

    let out_dir = cfg.output_dir();
    let mut summary = String::new();
    for plan in &cfg.tables {
        let table_fits: Vec<FitResult> = fits.by_ref().take(plan.specs.len()).collect::<Result<_, _>>()?;
        let layout = TableLayout::for_fits(&plan.title, &table_fits);
        let text = render_table(&table_fits, &layout, cfg.format)
            .stage(Stage::Render)
            .map_err(|e| CliError::from(e).context(format!("table {:?}", plan.name)))?;
        let table_path = out_dir.join(format!("{}.{}", plan.name, cfg.format.extension()));
        write_file(&table_path, text.as_bytes())?;
        let record = TableRecord {
            title: plan.title.clone(),
            fits: table_fits
                .iter()
                .zip(&plan.specs)
                .map(|(f, s)| export_results(f, Some(s)))
                .collect(),
        };
        let record_path = out_dir.join(format!("{}.json", plan.name));
        write_file(&record_path, to_json(&record).as_bytes())?;
        let _ = writeln!(summary, "{}", table_path.display());
        let _ = writeln!(summary, "{}", record_path.display());
    }
    Ok(summary)
}

fn synth_target(cfg: &RunConfig, key: &str, default_name: &str) -> PathBuf {
    cfg.optional_path(key)
        .unwrap_or_else(|| cfg.output_dir().join(default_name))
}

/// Generates a synthetic raw panel with its inputs and the planted truth.
pub fn cmd_synth(cfg: &RunConfig) -> Result<String, CliError> {
    let dgp = &cfg.synth;
    if dgp.periods != cfg.periods {
        warn!("[synth] periods differ from [periods]; fits will use [periods]");
    }
    let panel = generate(dgp)?;
    let delim = cfg.delimiter();
    let mut written = Vec::new();

    let mut buf = Vec::new();
    write_quotes(&mut buf, &panel.quotes, delim)?;
    let quotes = synth_target(cfg, "quotes", "quotes.csv");
    write_file(&quotes, &buf)?;
    written.push(quotes);

    let calendar = synth_target(cfg, "calendar", "calendar.toml");
    write_file(&calendar, panel.calendar.to_toml_string().as_bytes())?;
    written.push(calendar);

    for (key, series) in [("usd", &panel.exogenous.usd), ("conn_pax", &panel.exogenous.conn_pax)] {
        if series.is_empty() {
            continue;
        }
        let mut buf = Vec::new();
        write_date_series(&mut buf, key, series)?;
        let path = synth_target(cfg, key, &format!("{key}.csv"));
        write_file(&path, &buf)?;
        written.push(path);
    }
    if !panel.exogenous.route_counts.is_empty() {
        let mut buf = Vec::new();
        write_route_counts(&mut buf, &panel.exogenous.route_counts)?;
        let path = synth_target(cfg, "nairlines", "nairlines.csv");
        write_file(&path, &buf)?;
        written.push(path);
    }

    let truth = cfg.output_dir().join("truth.json");
    write_file(&truth, to_json(&panel.truth).as_bytes())?;
    written.push(truth);

    let mut out = format!("{} raw quotes, seed {}\n", panel.quotes.len(), dgp.seed);
    for p in written {
        let _ = writeln!(out, "{}", p.display());
    }
    Ok(out)
}

/// Runs the bundled estimator checks.
pub fn cmd_check(opts: CheckOptions) -> Result<String, CliError> {
    let report = run_checks(opts);
    let text = report.render();
    let failed = report.outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::CheckFailed {
            failed,
            report: text,
        });
    }
    Ok(text)
}
