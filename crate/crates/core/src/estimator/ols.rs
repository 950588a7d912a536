//! Least squares by Householder QR with column dropping.
//!
//! Columns are factorized left to right. A column whose norm, after the
//! reflections of the columns already kept, is at most `rank_tol` times its
//! original norm is linearly dependent on those columns; it is dropped and
//! gets no coefficient.

use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Upper-triangular factor, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    cols: Vec<Vec<f64>>,
}

impl UpperTriangular {
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row > col {
            0.0
        } else {
            self.cols[col][row]
        }
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        self.cols.iter().enumerate().map(|(j, c)| c[j])
    }

    /// Solves `R b = rhs` by back substitution.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let mut b = rhs[..k].to_vec();
        for i in (0..k).rev() {
            let mut s = b[i];
            for j in i + 1..k {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
        b
    }

    /// `R^{-1}`, row-major dense.
    pub fn inverse(&self) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut inv = vec![vec![0.0; k]; k];
        for c in 0..k {
            // column c of R^{-1} solves R z = e_c
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for j in i + 1..=c {
                    s -= self.get(i, j) * inv[j][c];
                }
                inv[i][c] = s / self.get(i, i);
            }
        }
        inv
    }

    /// `(R^T R)^{-1} = R^{-1} R^{-T}`, i.e. `(X^T X)^{-1}` for the kept columns.
    pub fn gram_inverse(&self) -> Vec<Vec<f64>> {
        let inv = self.inverse();
        let k = self.dim();
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let s: f64 = (j..k).map(|l| inv[i][l] * inv[j][l]).sum();
                out[i][j] = s;
                out[j][i] = s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Coefficients of the kept columns, in kept order.
    pub beta: Vec<f64>,
    /// Indices of kept input columns.
    pub kept: Vec<usize>,
    /// Indices of dropped input columns.
    pub dropped: Vec<usize>,
    pub residuals: Vec<f64>,
    pub r: UpperTriangular,
}

impl OlsFit {
    pub fn ssr(&self) -> f64 {
        self.residuals.iter().map(|u| u * u).sum()
    }
}

/// Least squares without an intercept.
pub fn ols(y: &[f64], x: &[Vec<f64>], rank_tol: f64) -> Result<OlsFit> {
    let n = y.len();
    if x.iter().any(|c| c.len() != n) {
        return Err(Error::validation("regressor columns differ in length from y"));
    }
    if n < x.len() {
        return Err(Error::validation(format!(
            "{n} rows cannot identify {} columns",
            x.len()
        )));
    }

    let mut qty = y.to_vec();
    // (v, tau, start row): H = I - tau v v^T acting on rows start..
    let mut reflectors: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    let mut r_cols = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();

    for (j, source) in x.iter().enumerate() {
        let row = kept.len();
        let orig_norm = norm(source);
        let mut col = source.clone();
        for (v, tau, start) in &reflectors {
            apply_reflector(v, *tau, &mut col[*start..]);
        }
        let rem = norm(&col[row.min(n)..]);
        if row >= n || orig_norm == 0.0 || !(rem > rank_tol * orig_norm) {
            dropped.push(j);
            continue;
        }
        let x0 = col[row];
        let alpha = if x0 >= 0.0 { -rem } else { rem };
        let mut v = col[row..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        let tau = 2.0 / vtv;
        apply_reflector(&v, tau, &mut qty[row..]);
        let mut r_col = col[..row].to_vec();
        r_col.push(alpha);
        r_cols.push(r_col);
        reflectors.push((v, tau, row));
        kept.push(j);
    }

    if kept.is_empty() {
        return Err(Error::NoUsableColumns);
    }
    let r = UpperTriangular { cols: r_cols };
    let beta = r.solve(&qty);
    let mut residuals = y.to_vec();
    for (&j, &b) in kept.iter().zip(&beta) {
        for (u, xv) in residuals.iter_mut().zip(&x[j]) {
            *u -= b * xv;
        }
    }
    Ok(OlsFit {
        beta,
        kept,
        dropped,
        residuals,
        r,
    })
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large magnitudes
    let scale = v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|a| (a / scale) * (a / scale)).sum::<f64>().sqrt()
}

fn apply_reflector(v: &[f64], tau: f64, target: &mut [f64]) {
    let s: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let s = s * tau;
    for (t, a) in target.iter_mut().zip(v) {
        *t -= s * a;
    }
}
