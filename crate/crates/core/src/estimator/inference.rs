//! Standard errors, p-values, significance stars and goodness of fit.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ols::OlsFit;
use crate::error::{Error, Result};
use crate::model::{Coefficient, SeKind};

/// `"***"` for p < 0.001, `"**"` for p < 0.01, `"*"` for p < 0.05, else `""`.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn p_value(t: f64, df: usize) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Two-sided critical value at confidence `level` (e.g. 0.95).
pub fn t_critical(level: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    dist.inverse_cdf(0.5 + level / 2.0)
}

/// Coefficient covariance for the kept columns of `fit`.
///
/// Classical: `s^2 (X'X)^{-1}` with `s^2 = u'u / df`. Robust: HC1 sandwich
/// `n/df (X'X)^{-1} X' diag(u^2) X (X'X)^{-1}`.
pub fn covariance(fit: &OlsFit, x: &[Vec<f64>], df: usize, kind: SeKind) -> Vec<Vec<f64>> {
    let bread = fit.r.gram_inverse();
    let k = bread.len();
    match kind {
        SeKind::Classical => {
            let s2 = fit.ssr() / df as f64;
            bread
                .into_iter()
                .map(|row| row.into_iter().map(|v| v * s2).collect())
                .collect()
        }
        SeKind::Robust => {
            let n = fit.residuals.len();
            let cols: Vec<&[f64]> = fit.kept.iter().map(|&j| x[j].as_slice()).collect();
            let mut meat = vec![vec![0.0; k]; k];
            for i in 0..n {
                let u2 = fit.residuals[i] * fit.residuals[i];
                for a in 0..k {
                    let xa = cols[a][i] * u2;
                    for b in a..k {
                        meat[a][b] += xa * cols[b][i];
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    meat[a][b] = meat[b][a];
                }
            }
            let scale = n as f64 / df as f64;
            let bm = matmul(&bread, &meat);
            matmul(&bm, &bread)
                .into_iter()
                .map(|row| row.into_iter().map(|v| v * scale).collect())
                .collect()
        }
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..k)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

/// Per-coefficient statistics for the kept columns of `fit`; `names` covers
/// every input column.
pub fn inference(
    fit: &OlsFit,
    x: &[Vec<f64>],
    names: &[String],
    df: usize,
    kind: SeKind,
) -> Result<Vec<Coefficient>> {
    if df == 0 {
        return Err(Error::DegreesOfFreedom(0));
    }
    let bad: Vec<String> = fit
        .kept
        .iter()
        .zip(fit.r.diagonal())
        .filter(|(_, d)| !(d.is_finite() && *d != 0.0))
        .map(|(&j, _)| names[j].clone())
        .collect();
    if !bad.is_empty() {
        return Err(Error::Singular { columns: bad });
    }
    let cov = covariance(fit, x, df, kind);
    let singular: Vec<String> = fit
        .kept
        .iter()
        .enumerate()
        .filter(|(i, _)| !(cov[*i][*i].is_finite() && cov[*i][*i] >= 0.0))
        .map(|(_, &j)| names[j].clone())
        .collect();
    if !singular.is_empty() {
        return Err(Error::Singular { columns: singular });
    }
    Ok(fit
        .kept
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let estimate = fit.beta[i];
            let std_error = cov[i][i].sqrt();
            let t_stat = estimate / std_error;
            let p = p_value(t_stat, df);
            Coefficient {
                name: names[j].clone(),
                estimate,
                std_error,
                t_stat,
                p_value: p,
                stars: significance_stars(p).to_owned(),
            }
        })
        .collect())
}

/// `1 - (1 - R^2)(n - 1)/df`, with `R^2 = 1 - u'u / sum (y - mean y)^2`.
///
/// `u` are residuals of the full model, so the fitted values `y - u`
/// include the recovered fixed-effect contributions.
pub fn adjusted_r2(y: &[f64], u: &[f64], df: usize, n: usize) -> f64 {
    let r2 = r_squared(y, u);
    1.0 - (1.0 - r2) * (n as f64 - 1.0) / df as f64
}

pub fn r_squared(y: &[f64], u: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ssr: f64 = u.iter().map(|v| v * v).sum();
    if tss == 0.0 {
        // constant y leaves only rounding in u
        return 1.0;
    }
    1.0 - ssr / tss
}
