//! Bundled estimator self-check: oracle equivalence, partialling-out,
//! invariance properties, degrees-of-freedom correction and demeaning
//! convergence on small deterministic fixtures.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::estimator::demean::max_group_mean;
use crate::estimator::{
    absorption, demean, df_residual, fit_design, lsdv_oracle, lsdv_rank, ols, DemeanOptions, Design,
    FeGroups, FitOptions, DEFAULT_RANK_TOL,
};
use crate::model::FitResult;

/// Demeaning tolerance used by the property checks, tight enough that the
/// stated slope tolerances are not dominated by demeaning residue.
pub const PROPERTY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Tolerance for the convergence check only.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        let d = DemeanOptions::default();
        CheckOptions {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub fixtures: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn render(&self) -> String {
        let w = self.outcomes.iter().map(|o| o.name.len()).max().unwrap_or(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<w$}  {:>8}  status  detail", "check", "fixtures");
        for o in &self.outcomes {
            let status = if o.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<w$}  {:>8}  {status:<6}  {}", o.name, o.fixtures, o.detail);
        }
        out
    }
}

/// A small panel with planted slopes and fixed effects.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub labels: Vec<Vec<usize>>,
    pub beta: Vec<f64>,
}

impl Fixture {
    pub fn groups(&self) -> FeGroups {
        FeGroups::from_labels(&self.labels).expect("fixture labels are consistent")
    }

    pub fn design(&self) -> Design {
        Design {
            y: self.y.clone(),
            x: self.x.clone(),
            names: (0..self.x.len()).map(|j| format!("x{}", j + 1)).collect(),
            groups: self.groups(),
        }
    }
}

/// Random fixture. Regressors load on the group effects so that absorbing
/// them matters.
pub fn random_fixture(seed: u64, n: usize, levels: &[usize], k: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let labels: Vec<Vec<usize>> = levels
        .iter()
        .map(|&l| (0..n).map(|i| if i < l { i } else { rng.random_range(0..l) }).collect())
        .collect();
    let effects: Vec<Vec<f64>> = levels
        .iter()
        .map(|&l| (0..l).map(|_| 3.0 * std.sample(&mut rng)).collect())
        .collect();
    let fe_sum = |i: usize| -> f64 { labels.iter().zip(&effects).map(|(lab, e)| e[lab[i]]).sum() };
    let x: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let load = rng.random_range(-1.0..1.0);
            (0..n).map(|i| load * fe_sum(i) + std.sample(&mut rng)).collect()
        })
        .collect();
    let beta: Vec<f64> = (0..k).map(|j| [1.5, -0.75, 4.0, 0.2][j % 4]).collect();
    let y = (0..n)
        .map(|i| {
            let xb: f64 = x.iter().zip(&beta).map(|(c, b)| c[i] * b).sum();
            10.0 + xb + fe_sum(i) + std.sample(&mut rng)
        })
        .collect();
    Fixture { y, x, labels, beta }
}

/// Two-dimension fixture whose bipartite level graph has two components.
pub fn disconnected_fixture() -> Fixture {
    // dimension 1 levels {0,1,2} only meet dimension 2 levels {0,1};
    // levels {3,4} only meet {2,3}
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..3 {
        for (la, lb) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1), (3, 2), (3, 3), (4, 2), (4, 3)] {
            a.push(la);
            b.push(lb);
        }
    }
    let n = a.len();
    let x1: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
    let x2: Vec<f64> = (0..n).map(|i| ((i * i + 1) % 13) as f64 * 0.5).collect();
    let y = (0..n)
        .map(|i| 2.0 * x1[i] - x2[i] + a[i] as f64 - 0.5 * b[i] as f64 + ((i % 5) as f64 - 2.0) * 0.3)
        .collect();
    Fixture {
        y,
        x: vec![x1, x2],
        labels: vec![a, b],
        beta: vec![2.0, -1.0],
    }
}

/// Fixture specifications for the oracle check: (seed, n, levels, k).
pub fn oracle_fixtures() -> Vec<(u64, usize, Vec<usize>, usize)> {
    (0..20u64)
        .map(|i| {
            let dims = 1 + (i % 3) as usize;
            let levels: Vec<usize> = [12 + i as usize, 7 + (i as usize % 5), 5 + (i as usize % 4)][..dims].to_vec();
            let n = 150 + 40 * i as usize;
            (1000 + i, n, levels, 1 + (i % 4) as usize)
        })
        .collect()
}

fn property_options() -> FitOptions {
    FitOptions {
        demean: DemeanOptions {
            tol: PROPERTY_TOL,
            max_iter: 100_000,
        },
        ..FitOptions::default()
    }
}

fn estimates(f: &FitResult) -> Vec<f64> {
    f.coefficients.iter().map(|c| c.estimate).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn outcome(name: &'static str, fixtures: usize, r: Result<(bool, String)>) -> CheckOutcome {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        name,
        fixtures,
        passed,
        detail,
    }
}

pub fn check_oracle() -> CheckOutcome {
    let specs = oracle_fixtures();
    let r = (|| {
        let mut worst: f64 = 0.0;
        for (seed, n, levels, k) in &specs {
            let fx = random_fixture(*seed, *n, levels, *k);
            let within = fit_design(&fx.design(), "oracle", property_options())?;
            let oracle = lsdv_oracle(&fx.y, &fx.x, &fx.groups())?;
            worst = worst.max(max_abs_diff(&estimates(&within), &oracle));
        }
        Ok((worst <= 1e-6, format!("max |within - lsdv| = {worst:.2e} (tol 1e-6)")))
    })();
    outcome("oracle_equivalence", specs.len(), r)
}

/// Demean by the first dimension only, keep the second as explicit dummies,
/// and compare with absorbing both.
pub fn check_fwl() -> CheckOutcome {
    let seeds = [11u64, 12, 13];
    let r = (|| {
        let mut worst: f64 = 0.0;
        for seed in seeds {
            let fx = random_fixture(seed, 400, &[25, 9], 2);
            let both = fit_design(&fx.design(), "both", property_options())?;
            let a_only = FeGroups::from_labels(&fx.labels[..1])?;
            let lb = 9;
            let mut cols = fx.x.clone();
            for level in 1..lb {
                cols.push(fx.labels[1].iter().map(|&l| f64::from(u8::from(l == level))).collect());
            }
            let dm = demean(&fx.y, &cols, &a_only, DemeanOptions::default())?;
            let partial = ols(&dm.y, &dm.x, DEFAULT_RANK_TOL)?;
            if partial.kept.len() != cols.len() {
                return Ok((false, format!("seed {seed}: dummy design rank deficient")));
            }
            worst = worst.max(max_abs_diff(&estimates(&both), &partial.beta[..fx.x.len()]));
        }
        Ok((worst <= 1e-8, format!("max slope difference {worst:.2e} (tol 1e-8)")))
    })();
    outcome("fwl", seeds.len(), r)
}

pub fn check_idempotence() -> CheckOutcome {
    let r = (|| {
        let fx = random_fixture(21, 500, &[30, 12, 8], 2);
        let g = fx.groups();
        let opts = DemeanOptions {
            tol: PROPERTY_TOL,
            max_iter: 100_000,
        };
        let once = demean(&fx.y, &fx.x, &g, opts)?;
        let twice = demean(&once.y, &once.x, &g, opts)?;
        let scale = fx.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut worst = max_abs_diff(&once.y, &twice.y);
        for (a, b) in once.x.iter().zip(&twice.x) {
            worst = worst.max(max_abs_diff(a, b));
        }
        let rel = worst / scale;
        Ok((rel <= 1e-8, format!("max relative change {rel:.2e} (tol 1e-8)")))
    })();
    outcome("idempotence", 1, r)
}

pub fn check_translation() -> CheckOutcome {
    let r = (|| {
        let fx = random_fixture(31, 600, &[40, 10, 6], 3);
        let base = fit_design(&fx.design(), "base", property_options())?;
        let mut shifted = fx.design();
        shifted.y.iter_mut().for_each(|v| *v += 250.0);
        let moved = fit_design(&shifted, "shifted", property_options())?;
        let d = max_abs_diff(&estimates(&base), &estimates(&moved));
        Ok((d <= 1e-10, format!("max slope change {d:.2e} (tol 1e-10)")))
    })();
    outcome("translation", 1, r)
}

pub fn check_scale() -> CheckOutcome {
    let r = (|| {
        let fx = random_fixture(41, 600, &[40, 10], 3);
        let s = 7.5;
        let base = fit_design(&fx.design(), "base", property_options())?;
        let mut scaled = fx.design();
        scaled.x[1].iter_mut().for_each(|v| *v *= s);
        let sc = fit_design(&scaled, "scaled", property_options())?;
        let (b, c) = (&base.coefficients[1], &sc.coefficients[1]);
        let mut worst = rel_diff(b.estimate / s, c.estimate)
            .max(rel_diff(b.std_error / s, c.std_error))
            .max(rel_diff(b.t_stat, c.t_stat))
            .max(rel_diff(b.p_value, c.p_value));
        for (p, q) in base.coefficients.iter().zip(&sc.coefficients) {
            if p.stars != q.stars {
                worst = f64::INFINITY;
            }
        }
        Ok((worst <= 1e-10, format!("max relative deviation {worst:.2e} (tol 1e-10)")))
    })();
    outcome("scale", 1, r)
}

pub fn check_permutation() -> CheckOutcome {
    let r = (|| {
        let fx = random_fixture(51, 700, &[35, 11, 7], 3);
        let base = fit_design(&fx.design(), "p", property_options())?;
        let mut order: Vec<usize> = (0..fx.y.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(52));
        let permuted = Fixture {
            y: order.iter().map(|&i| fx.y[i]).collect(),
            x: fx.x.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect(),
            labels: fx.labels.iter().map(|l| order.iter().map(|&i| l[i]).collect()).collect(),
            beta: fx.beta.clone(),
        };
        let perm = fit_design(&permuted.design(), "p", property_options())?;
        let mut worst: f64 = 0.0;
        for (p, q) in base.coefficients.iter().zip(&perm.coefficients) {
            worst = worst
                .max(rel_diff(p.estimate, q.estimate))
                .max(rel_diff(p.std_error, q.std_error))
                .max(rel_diff(p.t_stat, q.t_stat));
            if p.stars != q.stars || p.name != q.name {
                worst = f64::INFINITY;
            }
        }
        worst = worst
            .max(rel_diff(base.r_squared, perm.r_squared))
            .max(rel_diff(base.adj_r_squared, perm.adj_r_squared));
        let (bf, pf) = (&base.fe, &perm.fe);
        let same_counts = base.df_residual == perm.df_residual
            && bf.levels == pf.levels
            && bf.absorbed == pf.absorbed
            && bf.components == pf.components
            && bf.singletons == pf.singletons;
        Ok((
            worst <= 1e-10 && same_counts,
            format!("max relative deviation {worst:.2e} (tol 1e-10), df {}", perm.df_residual),
        ))
    })();
    outcome("permutation", 1, r)
}

pub fn check_df_correction() -> CheckOutcome {
    let r = (|| {
        let fx = disconnected_fixture();
        let g = fx.groups();
        let abs = absorption(&g);
        let n = fx.y.len();
        let df = df_residual(n, fx.x.len(), abs.absorbed)?;
        let rank = lsdv_rank(&fx.x, &g)?;
        Ok((
            abs.components == Some(2) && df == n - rank,
            format!(
                "components {:?}, df {df}, n - lsdv rank {}",
                abs.components,
                n - rank
            ),
        ))
    })();
    outcome("df_correction", 1, r)
}

pub fn check_convergence(opts: CheckOptions) -> CheckOutcome {
    let r = (|| {
        let fx = random_fixture(61, 500, &[30, 12, 8], 2);
        let g = fx.groups();
        let dm = demean(
            &fx.y,
            &fx.x,
            &g,
            DemeanOptions {
                tol: opts.tol,
                max_iter: opts.max_iter,
            },
        );
        let dm = match dm {
            Ok(d) => d,
            Err(e) => return Ok((false, format!("tol {:e}: {e}", opts.tol))),
        };
        let mut worst: f64 = 0.0;
        for (raw, col) in std::iter::once((&fx.y, &dm.y)).chain(fx.x.iter().zip(&dm.x)) {
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let scale = raw.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
            worst = worst.max(max_group_mean(col, &g) / scale);
        }
        Ok((
            worst <= opts.tol,
            format!(
                "{} sweeps, max scaled group mean {worst:.2e} (tol {:e})",
                dm.state.iterations, opts.tol
            ),
        ))
    })();
    outcome("convergence", 1, r)
}

/// Runs every check in a fixed order.
pub fn run_checks(opts: CheckOptions) -> CheckReport {
    CheckReport {
        outcomes: vec![
            check_oracle(),
            check_fwl(),
            check_idempotence(),
            check_translation(),
            check_scale(),
            check_permutation(),
            check_df_correction(),
            check_convergence(opts),
        ],
    }
}
