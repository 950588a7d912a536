//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use farepanel::estimator::{
    demean, fit_design, p_value, significance_stars, t_critical, DemeanOptions, Design, FeGroups,
    FitOptions,
};
use farepanel::ingest::{filter_sample, select_min_fare};
use farepanel::selfcheck::{random_fixture, run_checks, CheckOptions};
use farepanel::synthgen::{generate, DgpSpec, PlantedCoefficient};
use farepanel::{build_features, fit, select_sample, AirportFilter, FareQuote};
use farepanel_cli::{cmd_fit, cmd_ingest, cmd_synth, Overrides, RunConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass_if(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

// ---------------------------------------------------------------------------
// Independent reference computations.

/// Dense dummy design with every level of every dimension; the rank
/// computation absorbs the redundancy.
fn dummy_design(x: &[Vec<f64>], labels: &[Vec<usize>]) -> DMatrix<f64> {
    let n = labels[0].len();
    let levels: Vec<usize> = labels.iter().map(|l| l.iter().max().unwrap() + 1).collect();
    let p = x.len() + levels.iter().sum::<usize>();
    let mut z = DMatrix::zeros(n, p);
    for (j, c) in x.iter().enumerate() {
        for i in 0..n {
            z[(i, j)] = c[i];
        }
    }
    let mut off = x.len();
    for (l, &count) in labels.iter().zip(&levels) {
        for i in 0..n {
            z[(i, off + l[i])] = 1.0;
        }
        off += count;
    }
    z
}

fn svd_rank(z: &DMatrix<f64>) -> usize {
    let sv = z.singular_values();
    let tol = sv.max() * z.nrows().max(z.ncols()) as f64 * f64::EPSILON;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Slopes of y on [X D] by minimum-norm least squares.
fn reference_slopes(y: &[f64], x: &[Vec<f64>], labels: &[Vec<usize>]) -> Vec<f64> {
    let z = dummy_design(x, labels);
    let svd = z.clone().svd(true, true);
    let tol = svd.singular_values.max() * z.nrows().max(z.ncols()) as f64 * f64::EPSILON;
    let b = svd.solve(&DVector::from_column_slice(y), tol).unwrap();
    b.iter().take(x.len()).copied().collect()
}

fn labels_to_groups(labels: &[Vec<usize>]) -> FeGroups {
    FeGroups::from_labels(labels).unwrap()
}

fn design(y: Vec<f64>, x: Vec<Vec<f64>>, labels: &[Vec<usize>]) -> Design {
    Design {
        names: (0..x.len()).map(|j| format!("x{j}")).collect(),
        y,
        x,
        groups: labels_to_groups(labels),
    }
}

fn estimates(f: &farepanel::FitResult) -> Vec<f64> {
    f.coefficients.iter().map(|c| c.estimate).collect()
}

// ---------------------------------------------------------------------------

/// Randomized fixture generator owned by this test.
fn panel_fixture(rng: &mut ChaCha8Rng, n: usize, levels: &[usize], k: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let z = Normal::new(0.0, 1.0).unwrap();
    let labels: Vec<Vec<usize>> = levels
        .iter()
        .map(|&l| (0..n).map(|i| if i < l { i } else { rng.random_range(0..l) }).collect())
        .collect();
    let fx: Vec<Vec<f64>> = levels.iter().map(|&l| (0..l).map(|_| 2.0 * z.sample(rng)).collect()).collect();
    let effect = |i: usize| -> f64 { labels.iter().zip(&fx).map(|(l, e)| e[l[i]]).sum() };
    let x: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let load: f64 = rng.random_range(-0.8..0.8);
            (0..n).map(|i| load * effect(i) + z.sample(rng)).collect()
        })
        .collect();
    let y = (0..n)
        .map(|i| {
            let xb: f64 = x.iter().enumerate().map(|(j, c)| (j as f64 - 1.0) * c[i]).sum();
            5.0 + xb + effect(i) + z.sample(rng)
        })
        .collect();
    (y, x, labels)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    let mut fixtures = 0;
    let mut max_n = 0;
    for i in 0..24usize {
        let dims = 1 + i % 3;
        let n = rng.random_range(200..=5000);
        let levels: Vec<usize> = (0..dims).map(|d| rng.random_range(4..[120, 40, 30][d])).collect();
        let k = 1 + i % 4;
        let (y, x, labels) = panel_fixture(&mut rng, n, &levels, k);
        let f = match fit_design(&design(y.clone(), x.clone(), &labels), "c1", FitOptions::default()) {
            Ok(f) => f,
            Err(e) => return pass_if(false, format!("fixture {i}: {e}")),
        };
        let reference = reference_slopes(&y, &x, &labels);
        let got = estimates(&f);
        if got.len() != reference.len() {
            return pass_if(false, format!("fixture {i}: {} slopes vs {}", got.len(), reference.len()));
        }
        for (a, b) in got.iter().zip(&reference) {
            worst = worst.max((a - b).abs());
        }
        fixtures += 1;
        max_n = max_n.max(n);
    }
    let elapsed = start.elapsed();
    pass_if(
        worst <= 1e-6 && elapsed < Duration::from_secs(30),
        format!(
            "{fixtures} fixtures (n <= {max_n}, 1-3 FE dims), max |within - LSDV| = {worst:.1e} (tol 1e-6), {:.1}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn base_case_fit(seed: u64, rows: usize) -> farepanel::Result<(farepanel::FitResult, DgpSpec)> {
    let dgp = DgpSpec::base_case(seed, rows);
    let panel = generate(&dgp)?;
    let (sample, _) = select_sample(&panel.quotes, &AirportFilter::sao_paulo());
    let mut exo = panel.exogenous.clone();
    exo.periods = dgp.periods;
    let spec = dgp.model_spec();
    let fb = build_features(&sample, &panel.calendar, &exo, &spec)?;
    Ok((fit(&fb.observations, &spec)?, dgp))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    // planted values shaped like the published base-case table
    let expected: [(&str, f64); 16] = [
        ("hday_qut_eve", -2.589),
        ("hday_quote_n_of_days", -0.780),
        ("hday_qut_post", -3.608),
        ("hday_dept_eve", 12.119),
        ("hday_dept_n_of_days", 1.388),
        ("hday_dept_post", 7.200),
        ("usd", 35.849),
        ("adv_days", -0.317),
        ("nstop", -30.891),
        ("fin_crisis", -2.378),
        ("delay", 12.554),
        ("azul", -2.905),
        ("conn_pax", -38.506),
        ("nairlines_a_pair", -3.582),
        ("nairlines_adj_pair", -0.103),
        ("nairlines_airp_o", -1.210),
    ];
    let (f, dgp) = match base_case_fit(1, 50_000) {
        Ok(r) => r,
        Err(e) => return pass_if(false, e.to_string()),
    };
    let planted: Vec<(String, f64)> = dgp
        .coefficients
        .iter()
        .map(|PlantedCoefficient { name, value }| (name.to_string(), *value))
        .collect();
    if planted.len() != expected.len()
        || planted.iter().zip(&expected).any(|((n, v), (en, ev))| n != en || v != ev)
    {
        return pass_if(false, "generator does not plant the base-case values".into());
    }
    let mut worst_z: f64 = 0.0;
    let mut worst_name = String::new();
    for (name, value) in &planted {
        let Some(c) = f.coefficient(name) else {
            return pass_if(false, format!("{name} not estimated"));
        };
        let z = (c.estimate - value).abs() / c.std_error;
        if z > worst_z {
            worst_z = z;
            worst_name = name.clone();
        }
    }
    let elapsed = start.elapsed();
    pass_if(
        f.n_obs == 50_000 && worst_z <= 3.0 && elapsed < Duration::from_secs(60),
        format!(
            "n = {}, 16 coefficients, max |est - planted| / se = {worst_z:.2} ({worst_name}; limit 3), {:.1}s (limit 60s)",
            f.n_obs,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let cases = [
        (0.0009, "***"),
        (0.001, "**"),
        (0.009, "**"),
        (0.01, "*"),
        (0.049, "*"),
        (0.05, ""),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(p, s)| significance_stars(*p) != *s)
        .map(|(p, s)| format!("p={p}: got {:?}, want {s:?}", significance_stars(*p)))
        .collect();
    // the same thresholds must hold for p-values the estimator produces
    let df = 500;
    let t_at = |p: f64| t_critical(1.0 - p, df);
    let consistent = [0.001, 0.01, 0.05].iter().all(|&p| {
        let t = t_at(p);
        significance_stars(p_value(t * 1.000_001, df)).len() > significance_stars(p_value(t * 0.999_999, df)).len()
    });
    pass_if(
        bad.is_empty() && consistent,
        if bad.is_empty() {
            format!("{} boundary p-values, strict thresholds 0.05 / 0.01 / 0.001", cases.len())
        } else {
            bad.join("; ")
        },
    )
}

/// 100 rows over 70 groups: 60 base groups, 30 duplicates of groups 0-29
/// and 10 rows that differ from groups 30-39 only in departure date.
fn selection_fixture() -> Vec<FareQuote> {
    let airlines = ["TAM", "GOL", "AZU"];
    let origins = ["GRU", "CGH", "BSB", "GIG"];
    let day = |d: u64| NaiveDate::from_ymd_opt(2009, 6, 1).unwrap() + chrono::Days::new(d);
    let base = |g: usize| FareQuote {
        airline: airlines[g % 3].into(),
        origin: origins[(g / 3) % 4].into(),
        destination: if g % 2 == 0 { "SDU" } else { "POA" }.into(),
        quotation_date: day((g % 5) as u64),
        departure_date: day(10 + (g % 7) as u64),
        stops: (g % 2) as u32,
        price: 200.0 + g as f64,
        is_domestic: g % 10 != 9,
    };
    let mut rows: Vec<FareQuote> = (0..60).map(base).collect();
    for g in 0..30 {
        let mut dup = base(g);
        dup.price += if g % 2 == 0 { -15.0 } else { 40.0 };
        rows.push(dup);
    }
    for g in 30..40 {
        let mut near = base(g);
        near.departure_date = near.departure_date + chrono::Days::new(30);
        rows.push(near);
    }
    // interleave so duplicates are not adjacent
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| (i * 37) % 101);
    order.into_iter().map(|i| rows[i].clone()).collect()
}

fn criterion_4() -> Outcome {
    let rows = selection_fixture();
    // brute force: a row opens a group unless an earlier row has its key
    let same = |a: &FareQuote, b: &FareQuote| {
        a.airline == b.airline
            && a.origin == b.origin
            && a.destination == b.destination
            && a.quotation_date == b.quotation_date
            && a.departure_date == b.departure_date
            && a.is_domestic == b.is_domestic
    };
    let distinct = (0..rows.len())
        .filter(|&i| !(0..i).any(|j| same(&rows[i], &rows[j])))
        .count();
    let selected = select_min_fare(&rows);
    let minimal = selected.iter().all(|s| rows.iter().filter(|r| same(r, s)).all(|r| s.price <= r.price));
    let (kept, report) = filter_sample(&selected, &AirportFilter::sao_paulo());
    // hand counts over the 70 groups:
    //   international (g % 10 == 9): 9, 19, 29, 39, 49, 59 and the near copy of 39 -> 7
    //   domestic BSB/GIG origins: 27 base groups + near copies of 30-35 -> 33
    //   kept: 70 - 7 - 33 = 30
    let (hand_groups, hand_intl, hand_airport, hand_final) = (70, 7, 33, 30);
    let ok = rows.len() == 100
        && distinct == hand_groups
        && selected.len() == distinct
        && minimal
        && report.rows_dropped_international == hand_intl
        && report.rows_dropped_airport_filter == hand_airport
        && report.final_count == hand_final
        && kept.len() == hand_final;
    pass_if(
        ok,
        format!(
            "100 rows: {} groups (brute force {distinct}), dropped intl {} / airport {}, final {} (hand counts 7 / 33 / 30)",
            selected.len(),
            report.rows_dropped_international,
            report.rows_dropped_airport_filter,
            report.final_count
        ),
    )
}

/// Subtracts group means of one dimension; exact in one pass.
fn demean_one_dim(col: &[f64], labels: &[usize]) -> Vec<f64> {
    let l = labels.iter().max().unwrap() + 1;
    let mut sum = vec![0.0; l];
    let mut cnt = vec![0.0; l];
    for (v, &g) in col.iter().zip(labels) {
        sum[g] += v;
        cnt[g] += 1.0;
    }
    col.iter().zip(labels).map(|(v, &g)| v - sum[g] / cnt[g]).collect()
}

fn lstsq(y: &[f64], cols: &[Vec<f64>]) -> Vec<f64> {
    let n = y.len();
    let z = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let svd = z.svd(true, true);
    svd.solve(&DVector::from_column_slice(y), 1e-12).unwrap().iter().copied().collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    // tight demeaning so the stated slope tolerances measure the algebra,
    // not the stopping rule
    let opts = FitOptions {
        demean: DemeanOptions {
            tol: 1e-13,
            max_iter: 200_000,
        },
        ..FitOptions::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;

    // Frisch-Waugh-Lovell
    let mut fwl: f64 = 0.0;
    for seed in [11u64, 12, 13] {
        let fx = random_fixture(seed, 400, &[25, 9], 2);
        let both = fit_design(&design(fx.y.clone(), fx.x.clone(), &fx.labels), "fwl", opts).unwrap();
        let a = &fx.labels[0];
        let mut cols: Vec<Vec<f64>> = fx.x.iter().map(|c| demean_one_dim(c, a)).collect();
        for level in 1..9 {
            let d: Vec<f64> = fx.labels[1].iter().map(|&b| f64::from(u8::from(b == level))).collect();
            cols.push(demean_one_dim(&d, a));
        }
        let partial = lstsq(&demean_one_dim(&fx.y, a), &cols);
        for (p, q) in estimates(&both).iter().zip(&partial) {
            fwl = fwl.max((p - q).abs());
        }
    }
    ok &= fwl <= 1e-8;
    lines.push(format!("FWL {fwl:.1e} (1e-8)"));

    // idempotence
    let fx = random_fixture(21, 500, &[30, 12, 8], 2);
    let g = labels_to_groups(&fx.labels);
    let dopts = DemeanOptions::default();
    let once = demean(&fx.y, &fx.x, &g, dopts).unwrap();
    let twice = demean(&once.y, &once.x, &g, dopts).unwrap();
    let scale = fx.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let idem = once
        .y
        .iter()
        .zip(&twice.y)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);
    ok &= idem <= 1e-8;
    lines.push(format!("idempotence {idem:.1e} (1e-8)"));

    // y translation
    let fx = random_fixture(31, 600, &[40, 10, 6], 3);
    let base = fit_design(&design(fx.y.clone(), fx.x.clone(), &fx.labels), "t", opts).unwrap();
    let shifted_y: Vec<f64> = fx.y.iter().map(|v| v + 250.0).collect();
    let shifted = fit_design(&design(shifted_y, fx.x.clone(), &fx.labels), "t", opts).unwrap();
    let trans = estimates(&base)
        .iter()
        .zip(estimates(&shifted))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ok &= trans <= 1e-10;
    lines.push(format!("translation {trans:.1e} (1e-10)"));

    // scale equivariance on column 1
    let s = 7.5;
    let fx = random_fixture(41, 600, &[40, 10], 3);
    let base = fit_design(&design(fx.y.clone(), fx.x.clone(), &fx.labels), "s", opts).unwrap();
    let mut xs = fx.x.clone();
    xs[1].iter_mut().for_each(|v| *v *= s);
    let scaled = fit_design(&design(fx.y.clone(), xs, &fx.labels), "s", opts).unwrap();
    let (b, c) = (&base.coefficients[1], &scaled.coefficients[1]);
    let sc = rel(b.estimate / s, c.estimate)
        .max(rel(b.std_error / s, c.std_error))
        .max(rel(b.t_stat, c.t_stat))
        .max(rel(b.p_value, c.p_value));
    let stars_same = base.coefficients.iter().zip(&scaled.coefficients).all(|(p, q)| p.stars == q.stars);
    ok &= sc <= 1e-10 && stars_same;
    lines.push(format!("scale {sc:.1e} (1e-10)"));

    // row permutation
    let fx = random_fixture(51, 700, &[35, 11, 7], 3);
    let base = fit_design(&design(fx.y.clone(), fx.x.clone(), &fx.labels), "p", opts).unwrap();
    let mut order: Vec<usize> = (0..fx.y.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let plabels: Vec<Vec<usize>> = fx.labels.iter().map(|l| order.iter().map(|&i| l[i]).collect()).collect();
    let perm = fit_design(
        &design(pick(&fx.y), fx.x.iter().map(|c| pick(c)).collect(), &plabels),
        "p",
        opts,
    )
    .unwrap();
    let mut pm = rel(base.r_squared, perm.r_squared).max(rel(base.adj_r_squared, perm.adj_r_squared));
    for (p, q) in base.coefficients.iter().zip(&perm.coefficients) {
        pm = pm
            .max(rel(p.estimate, q.estimate))
            .max(rel(p.std_error, q.std_error))
            .max(rel(p.t_stat, q.t_stat));
    }
    ok &= pm <= 1e-10 && base.df_residual == perm.df_residual;
    lines.push(format!("permutation {pm:.1e} (1e-10)"));

    // the shipped self-check over the same fixtures
    let report = run_checks(CheckOptions::default());
    ok &= report.all_passed();
    lines.push(format!(
        "self-check {}/{}",
        report.outcomes.iter().filter(|o| o.passed).count(),
        report.outcomes.len()
    ));

    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    pass_if(ok, format!("{}, {:.1}s (limit 10s)", lines.join(", "), elapsed.as_secs_f64()))
}

fn criterion_6() -> Outcome {
    // dimension-1 levels 0-3 only meet dimension-2 levels 0-2, levels 4-6
    // only meet 3-4: two components
    let mut a = Vec::new();
    let mut b = Vec::new();
    for rep in 0..4 {
        for la in 0..4 {
            a.push(la);
            b.push((la + rep) % 3);
        }
        for la in 4..7 {
            a.push(la);
            b.push(3 + (la + rep) % 2);
        }
    }
    let n = a.len();
    let x = vec![
        (0..n).map(|i| ((i * 5 + 1) % 9) as f64).collect::<Vec<f64>>(),
        (0..n).map(|i| ((i * i) % 7) as f64 - 3.0).collect(),
    ];
    let y: Vec<f64> = (0..n).map(|i| x[0][i] - 2.0 * x[1][i] + (i % 3) as f64).collect();
    let labels = vec![a, b];
    let f = fit_design(&design(y, x.clone(), &labels), "df", FitOptions::default()).unwrap();
    let rank = svd_rank(&dummy_design(&x, &labels));
    pass_if(
        f.df_residual == n - rank && f.fe.components == Some(2),
        format!(
            "n = {n}, components {:?}, df_residual {} vs n - rank [X D] = {}",
            f.fe.components,
            f.df_residual,
            n - rank
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let reps = 1000;
    let names = ["hday_dept_eve", "adv_days", "nstop", "usd"];
    let mut dgp = DgpSpec::base_case(0, 2000);
    dgp.coefficients.retain(|c| names.contains(&c.name.to_string().as_str()));
    dgp.duplicate_share = 0.0;
    dgp.international_share = 0.0;
    dgp.other_airport_share = 0.0;
    dgp.entities = 24;
    let spec = dgp.model_spec();
    let mut covered = [0usize; 4];
    let mut failures = 0;
    for rep in 0..reps {
        dgp.seed = 70_000 + rep as u64;
        let run = || -> farepanel::Result<farepanel::FitResult> {
            let panel = generate(&dgp)?;
            let mut exo = panel.exogenous.clone();
            exo.periods = dgp.periods;
            let fb = build_features(&panel.quotes, &panel.calendar, &exo, &spec)?;
            fit(&fb.observations, &spec)
        };
        let f = match run() {
            Ok(f) => f,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let crit = t_critical(0.95, f.df_residual);
        for (k, name) in names.iter().enumerate() {
            let truth = dgp.coefficients.iter().find(|c| c.name.to_string() == *name).unwrap().value;
            if let Some(c) = f.coefficient(name) {
                if (c.estimate - truth).abs() <= crit * c.std_error {
                    covered[k] += 1;
                }
            }
        }
    }
    let rates: Vec<f64> = covered.iter().map(|&c| c as f64 / reps as f64).collect();
    let elapsed = start.elapsed();
    let ok = failures == 0
        && rates.iter().all(|r| (0.93..=0.97).contains(r))
        && elapsed < Duration::from_secs(300);
    let listed: Vec<String> = names.iter().zip(&rates).map(|(n, r)| format!("{n} {r:.3}")).collect();
    pass_if(
        ok,
        format!(
            "{reps} reps at n = 2000: {} (band [0.93, 0.97]), {failures} failed runs, {:.0}s (limit 300s)",
            listed.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn pipeline_config(dir: &Path) -> RunConfig {
    let text = r#"
[paths]
quotes = "raw/quotes.csv"
calendar = "raw/calendar.toml"
usd = "raw/usd.csv"
conn_pax = "raw/conn_pax.csv"
nairlines = "raw/nairlines.csv"
output_dir = "out"

[periods]
fin_crisis = { start = "2008-10-15" }
delay = { start = "2008-11-15", end = "2009-02-16" }
azul = { start = "2008-12-15" }

[[tables]]
name = "airports"
title = "Synthetic fares"
[[tables.specs]]
label = "GRU and CGH price"
[[tables.specs]]
label = "GRU price"
airports = ["GRU"]
[[tables.specs]]
label = "CGH price"
airports = ["CGH"]

[synth]
seed = 17
rows = 12000
"#;
    RunConfig::from_toml(text, dir, &Overrides::default()).unwrap()
}

fn run_pipeline(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let cfg = pipeline_config(dir);
    cmd_synth(&cfg).map_err(|e| e.to_string())?;
    cmd_ingest(&cfg).map_err(|e| e.to_string())?;
    cmd_fit(&cfg).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for name in ["airports.txt", "airports.json", "selection_report.json", "truth.json"] {
        let bytes = std::fs::read(dir.join("out").join(name)).map_err(|e| e.to_string())?;
        files.push((name.to_owned(), bytes));
    }
    Ok(files)
}

fn criterion_8() -> Outcome {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    match (run_pipeline(d1.path()), run_pipeline(d2.path())) {
        (Ok(a), Ok(b)) => {
            let differing: Vec<&str> = a
                .iter()
                .zip(&b)
                .filter(|(x, y)| x.1 != y.1)
                .map(|(x, _)| x.0.as_str())
                .collect();
            let bytes: usize = a.iter().map(|f| f.1.len()).sum();
            pass_if(
                differing.is_empty(),
                if differing.is_empty() {
                    format!("synth -> ingest -> fit twice (seed 17): {} files, {bytes} bytes identical", a.len())
                } else {
                    format!("differing outputs: {}", differing.join(", "))
                },
            )
        }
        (Err(e), _) | (_, Err(e)) => pass_if(false, e),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter selects nothing here
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", criterion_1),
        ("base-case recovery", criterion_2),
        ("star convention", criterion_3),
        ("sample selection", criterion_4),
        ("FWL and invariance", criterion_5),
        ("df correction", criterion_6),
        ("CI coverage", criterion_7),
        ("end-to-end determinism", criterion_8),
    ];
    let only: BTreeSet<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {id} [{status}] {name}: {}", o.detail);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
