//! Least-squares-dummy-variables reference fit.
//!
//! Every fixed-effect level becomes an explicit dummy column (all levels of
//! the first dimension, all but the first level of the others) and the
//! system is solved by SVD. This path shares nothing with the
//! demean-then-QR route and is meant only for small problems.

use nalgebra::{DMatrix, DVector};

use super::demean::FeGroups;
use crate::error::{Error, Result};

pub const ORACLE_MAX_ROWS: usize = 10_000;
pub const ORACLE_MAX_DUMMIES: usize = 2_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LsdvFit {
    /// Minimum-norm slope coefficients.
    pub slopes: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Numerical rank of the full design `[X D]`.
    pub rank: usize,
    pub n_columns: usize,
}

/// Explicit design `[X D]`.
pub fn lsdv_design(x: &[Vec<f64>], groups: &FeGroups) -> Result<DMatrix<f64>> {
    let n = groups.n_rows();
    if x.iter().any(|c| c.len() != n) {
        return Err(Error::validation("regressor columns differ in length from groups"));
    }
    let dummies: usize = groups
        .dims()
        .iter()
        .enumerate()
        .map(|(d, g)| if d == 0 { g.n_groups() } else { g.n_groups() - 1 })
        .sum();
    if n > ORACLE_MAX_ROWS || dummies > ORACLE_MAX_DUMMIES {
        return Err(Error::Guard(format!(
            "{n} rows and {dummies} dummies exceed {ORACLE_MAX_ROWS} / {ORACLE_MAX_DUMMIES}"
        )));
    }
    let k = x.len();
    let mut z = DMatrix::<f64>::zeros(n, k + dummies);
    for (j, col) in x.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            z[(i, j)] = *v;
        }
    }
    let mut offset = k;
    for (d, g) in groups.dims().iter().enumerate() {
        let skip = usize::from(d > 0);
        for (i, &id) in g.ids().iter().enumerate() {
            let id = id as usize;
            if id >= skip {
                z[(i, offset + id - skip)] = 1.0;
            }
        }
        offset += g.n_groups() - skip;
    }
    Ok(z)
}

pub fn lsdv_fit(y: &[f64], x: &[Vec<f64>], groups: &FeGroups) -> Result<LsdvFit> {
    if y.len() != groups.n_rows() {
        return Err(Error::validation("y length differs from groups"));
    }
    let z = lsdv_design(x, groups)?;
    let (n, p) = z.shape();
    let yv = DVector::from_column_slice(y);
    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * n.max(p) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let coef = svd
        .solve(&yv, eps)
        .map_err(|e| Error::validation(format!("LSDV solve failed: {e}")))?;
    let residuals = (&yv - &z * &coef).iter().copied().collect();
    Ok(LsdvFit {
        slopes: coef.iter().take(x.len()).copied().collect(),
        residuals,
        rank,
        n_columns: p,
    })
}

/// Slope coefficients from the explicit dummy regression.
pub fn lsdv_oracle(y: &[f64], x: &[Vec<f64>], groups: &FeGroups) -> Result<Vec<f64>> {
    Ok(lsdv_fit(y, x, groups)?.slopes)
}

/// Numerical rank of `[X D]`.
pub fn lsdv_rank(x: &[Vec<f64>], groups: &FeGroups) -> Result<usize> {
    let z = lsdv_design(x, groups)?;
    let (n, p) = z.shape();
    let sv = z.singular_values();
    let eps = sv.max() * n.max(p) as f64 * f64::EPSILON;
    Ok(sv.iter().filter(|&&s| s > eps).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_is_enforced() {
        let labels: Vec<usize> = (0..ORACLE_MAX_ROWS + 1).collect();
        let g = FeGroups::from_labels(&[labels]).unwrap();
        let y = vec![0.0; ORACLE_MAX_ROWS + 1];
        assert!(matches!(lsdv_oracle(&y, &[], &g), Err(Error::Guard(_))));
    }

    #[test]
    fn recovers_planted_slope_without_noise() {
        let a = vec![0, 0, 1, 1, 2, 2];
        let b = vec![0, 1, 0, 1, 0, 1];
        let x = vec![vec![0.3, 1.0, -2.0, 0.5, 4.0, 1.5]];
        let y: Vec<f64> = (0..6)
            .map(|i| 2.5 * x[0][i] + [1.0, -1.0, 3.0][a[i]] + [0.0, 0.7][b[i]])
            .collect();
        let g = FeGroups::from_labels(&[a, b]).unwrap();
        let slopes = lsdv_oracle(&y, &x, &g).unwrap();
        assert!((slopes[0] - 2.5).abs() < 1e-10);
        assert_eq!(lsdv_rank(&x, &g).unwrap(), 5);
    }
}
