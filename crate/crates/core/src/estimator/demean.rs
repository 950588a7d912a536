//! Alternating-projection demeaning.
//!
//! Each sweep subtracts group means for every fixed-effect dimension in turn.
//! Iteration stops when the largest absolute change of any value during one
//! sweep, divided by the column's max-abs after centering, drops below the
//! tolerance. Columns are independent and processed in parallel; each column
//! is swept sequentially, so results do not depend on thread scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::FeDimension;

/// Dense group ids for one fixed-effect dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIndex {
    pub dimension: FeDimension,
    ids: Vec<u32>,
    counts: Vec<u32>,
}

impl GroupIndex {
    /// Assigns ids in sorted key order, so the mapping does not depend on
    /// row order.
    pub fn from_keys<K: Ord>(dimension: FeDimension, keys: &[K]) -> Self {
        let mut lookup: BTreeMap<&K, u32> = keys.iter().map(|k| (k, 0)).collect();
        for (i, v) in lookup.values_mut().enumerate() {
            *v = i as u32;
        }
        let ids: Vec<u32> = keys.iter().map(|k| lookup[k]).collect();
        let mut counts = vec![0u32; lookup.len()];
        for &g in &ids {
            counts[g as usize] += 1;
        }
        GroupIndex {
            dimension,
            ids,
            counts,
        }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn n_groups(&self) -> usize {
        self.counts.len()
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn singletons(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 1).count()
    }

    /// Copy restricted to `rows`, with ids re-densified.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let keys: Vec<u32> = rows.iter().map(|&r| self.ids[r]).collect();
        GroupIndex::from_keys(self.dimension, &keys)
    }
}

/// Fixed-effect groups in sweep order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeGroups {
    dims: Vec<GroupIndex>,
}

impl FeGroups {
    pub fn new(dims: Vec<GroupIndex>) -> Result<Self> {
        let Some(first) = dims.first() else {
            return Err(Error::validation("at least one fixed-effect dimension is required"));
        };
        let n = first.n_rows();
        if dims.iter().any(|d| d.n_rows() != n) {
            return Err(Error::validation("fixed-effect dimensions differ in length"));
        }
        Ok(FeGroups { dims })
    }

    /// Convenience constructor from raw integer labels, one vector per
    /// dimension, tagged entity / quote / depart in order.
    pub fn from_labels(labels: &[Vec<usize>]) -> Result<Self> {
        const TAGS: [FeDimension; 3] = [
            FeDimension::Entity,
            FeDimension::QuotePeriod,
            FeDimension::DepartPeriod,
        ];
        if labels.len() > TAGS.len() {
            return Err(Error::validation("at most three fixed-effect dimensions"));
        }
        FeGroups::new(
            labels
                .iter()
                .zip(TAGS)
                .map(|(l, tag)| GroupIndex::from_keys(tag, l))
                .collect(),
        )
    }

    pub fn dims(&self) -> &[GroupIndex] {
        &self.dims
    }

    pub fn n_rows(&self) -> usize {
        self.dims[0].n_rows()
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        FeGroups {
            dims: self.dims.iter().map(|d| d.subset(rows)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemeanOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DemeanOptions {
    fn default() -> Self {
        DemeanOptions {
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemeanState {
    /// Largest sweep count over all columns.
    pub iterations: usize,
    /// Largest scaled change of the final sweep over all columns.
    pub last_change: f64,
    pub column_iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demeaned {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub state: DemeanState,
}

/// Demeans `y` and every column of `x` against all dimensions of `groups`.
pub fn demean(y: &[f64], x: &[Vec<f64>], groups: &FeGroups, opts: DemeanOptions) -> Result<Demeaned> {
    let n = groups.n_rows();
    if y.len() != n || x.iter().any(|c| c.len() != n) {
        return Err(Error::validation(format!(
            "column lengths do not match the {n} grouped rows"
        )));
    }
    let mut columns: Vec<Vec<f64>> = std::iter::once(y.to_vec()).chain(x.iter().cloned()).collect();
    let (iters, changes) = demean_columns(&mut columns, groups, opts)?;
    let y = columns.remove(0);
    Ok(Demeaned {
        y,
        x: columns,
        state: DemeanState {
            iterations: iters.iter().copied().max().unwrap_or(0),
            last_change: changes.iter().copied().fold(0.0, f64::max),
            column_iterations: iters,
        },
    })
}

/// Demeans columns in place; returns per-column sweep counts and final
/// scaled changes.
pub fn demean_columns(
    columns: &mut [Vec<f64>],
    groups: &FeGroups,
    opts: DemeanOptions,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if !(opts.tol >= 0.0) || opts.max_iter == 0 {
        return Err(Error::validation("demean tolerance must be >= 0 and max_iter >= 1"));
    }
    let outcomes: Vec<Result<(usize, f64)>> = columns
        .par_iter_mut()
        .map(|col| demean_one(col, groups, opts))
        .collect();
    let mut iters = Vec::with_capacity(outcomes.len());
    let mut changes = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (i, c) = o?;
        iters.push(i);
        changes.push(c);
    }
    Ok((iters, changes))
}

fn sweep_dimension(col: &mut [f64], dim: &GroupIndex, sums: &mut Vec<f64>) -> f64 {
    sums.clear();
    sums.resize(dim.n_groups(), 0.0);
    for (&g, &v) in dim.ids.iter().zip(col.iter()) {
        sums[g as usize] += v;
    }
    let mut change: f64 = 0.0;
    for (s, &c) in sums.iter_mut().zip(&dim.counts) {
        *s /= f64::from(c);
        change = change.max(s.abs());
    }
    for (&g, v) in dim.ids.iter().zip(col.iter_mut()) {
        *v -= sums[g as usize];
    }
    change
}

fn demean_one(col: &mut [f64], groups: &FeGroups, opts: DemeanOptions) -> Result<(usize, f64)> {
    let n = col.len();
    if n == 0 {
        return Ok((0, 0.0));
    }
    // Every dimension spans the constant, so centering first is part of the
    // projection; it also makes the convergence scale shift-invariant.
    let mean = col.iter().sum::<f64>() / n as f64;
    col.iter_mut().for_each(|v| *v -= mean);
    let scale = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok((0, 0.0));
    }

    let mut sums = Vec::new();
    let dims = groups.dims();
    if dims.len() == 1 {
        // A single dimension is an exact projection in one sweep.
        sweep_dimension(col, &dims[0], &mut sums);
        return Ok((1, 0.0));
    }

    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        change = 0.0;
        for dim in dims {
            change = change.max(sweep_dimension(col, dim, &mut sums));
        }
        change /= scale;
        if change < opts.tol {
            return Ok((it, change));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_change: change,
    })
}

/// Largest absolute group mean of `col` over all dimensions.
pub fn max_group_mean(col: &[f64], groups: &FeGroups) -> f64 {
    let mut sums = Vec::new();
    groups
        .dims()
        .iter()
        .map(|dim| {
            sums.clear();
            sums.resize(dim.n_groups(), 0.0);
            for (&g, &v) in dim.ids().iter().zip(col) {
                sums[g as usize] += v;
            }
            sums.iter()
                .zip(dim.counts())
                .map(|(s, &c)| (s / f64::from(c)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
