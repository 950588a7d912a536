//! End-to-end fit: subset filter, fixed-effect assembly, demeaning, least
//! squares and inference.

use super::demean::{demean, DemeanOptions, FeGroups, GroupIndex};
use super::dof::{absorption, df_residual};
use super::inference::{inference, r_squared};
use super::ols::{ols, DEFAULT_RANK_TOL};
use crate::error::{Error, Result, Stage, StageExt};
use crate::model::{
    DropReason, DroppedColumn, FeDiagnostics, FeDimension, FeLevels, FitResult, ModelSpec,
    PanelObservation, SeKind,
};

/// A column is treated as absorbed when its demeaned norm is at most this
/// multiple of the demeaning tolerance, relative to its centered norm.
pub const ABSORB_TOL_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub demean: DemeanOptions,
    pub se: SeKind,
    pub rank_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            demean: DemeanOptions::default(),
            se: SeKind::Classical,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl FitOptions {
    pub fn from_spec(spec: &ModelSpec) -> Self {
        FitOptions {
            demean: DemeanOptions {
                tol: spec.demean_tol,
                max_iter: spec.max_iter,
            },
            se: spec.se,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Estimation arrays for one spec.
#[derive(Debug, Clone)]
pub struct Design {
    pub y: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub names: Vec<String>,
    pub groups: FeGroups,
}

/// Applies the spec's airport and stop filters and builds the group index.
pub fn assemble(observations: &[PanelObservation], spec: &ModelSpec) -> Result<Design> {
    spec.validate()?;
    let k = spec.regressors.len();
    let rows: Vec<&PanelObservation> = observations
        .iter()
        .filter(|o| spec.airports.as_ref().is_none_or(|a| a.contains(&o.origin)))
        .filter(|o| spec.stops.is_none_or(|s| o.stops == s))
        .collect();
    if rows.is_empty() {
        return Err(Error::validation(format!(
            "no observations match the subset filter of {:?}",
            spec.label
        )));
    }
    if let Some(bad) = rows.iter().find(|o| o.x.len() != k) {
        return Err(Error::validation(format!(
            "observation has {} regressor values, spec lists {k}",
            bad.x.len()
        )));
    }
    let dims = spec
        .sweep_order()
        .into_iter()
        .map(|dim| match dim {
            FeDimension::Entity => {
                let keys: Vec<_> = rows.iter().map(|o| &o.entity_key).collect();
                GroupIndex::from_keys(dim, &keys)
            }
            FeDimension::QuotePeriod => {
                let keys: Vec<_> = rows.iter().map(|o| o.quote_period_key).collect();
                GroupIndex::from_keys(dim, &keys)
            }
            FeDimension::DepartPeriod => {
                let keys: Vec<_> = rows.iter().map(|o| o.depart_period_key).collect();
                GroupIndex::from_keys(dim, &keys)
            }
        })
        .collect();
    Ok(Design {
        y: rows.iter().map(|o| o.y).collect(),
        x: (0..k).map(|j| rows.iter().map(|o| o.x[j]).collect()).collect(),
        names: spec.regressor_names(),
        groups: FeGroups::new(dims)?,
    })
}

/// Fits `spec` on `observations`.
pub fn fit(observations: &[PanelObservation], spec: &ModelSpec) -> Result<FitResult> {
    let design = assemble(observations, spec).stage(Stage::Filter)?;
    fit_design(&design, &spec.label, FitOptions::from_spec(spec))
}

pub fn fit_design(design: &Design, label: &str, opts: FitOptions) -> Result<FitResult> {
    let Design { y, x, names, groups } = design;
    let n = y.len();
    if names.len() != x.len() {
        return Err(Error::validation("one name per regressor column is required")).stage(Stage::Filter);
    }

    let dm = demean(y, x, groups, opts.demean).stage(Stage::Demean)?;

    let absorb_tol = opts.rank_tol.max(ABSORB_TOL_FACTOR * opts.demean.tol);
    let mut dropped = Vec::new();
    let mut candidates = Vec::new();
    for (j, (raw, within)) in x.iter().zip(&dm.x).enumerate() {
        let mean = raw.iter().sum::<f64>() / n as f64;
        let centered = raw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
        let remaining = within.iter().map(|v| v * v).sum::<f64>().sqrt();
        if centered == 0.0 || remaining <= absorb_tol * centered {
            dropped.push((j, DropReason::AbsorbedByFixedEffects));
        } else {
            candidates.push(j);
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoUsableColumns).stage(Stage::Ols);
    }
    let cand_x: Vec<Vec<f64>> = candidates.iter().map(|&j| dm.x[j].clone()).collect();
    let cand_names: Vec<String> = candidates.iter().map(|&j| names[j].clone()).collect();
    let ols_fit = ols(&dm.y, &cand_x, opts.rank_tol).stage(Stage::Ols)?;
    dropped.extend(ols_fit.dropped.iter().map(|&c| (candidates[c], DropReason::Collinear)));
    dropped.sort_by_key(|&(j, _)| j);

    let abs = absorption(groups);
    let df = df_residual(n, ols_fit.kept.len(), abs.absorbed).stage(Stage::Inference)?;
    let coefficients = inference(&ols_fit, &cand_x, &cand_names, df, opts.se).stage(Stage::Inference)?;

    let u = ols_fit.residuals;
    let r2 = r_squared(y, &u);
    let within_r2 = r_squared(&dm.y, &u);
    let adj = |r2: f64, m: f64| 1.0 - (1.0 - r2) * m / df as f64;

    Ok(FitResult {
        label: label.to_owned(),
        regressors: names.clone(),
        coefficients,
        dropped: dropped
            .into_iter()
            .map(|(j, reason)| DroppedColumn {
                name: names[j].clone(),
                reason,
            })
            .collect(),
        n_obs: n,
        df_residual: df,
        r_squared: r2,
        adj_r_squared: adj(r2, n as f64 - 1.0),
        within_r_squared: within_r2,
        adj_within_r_squared: adj(within_r2, (n - abs.absorbed) as f64),
        se_kind: opts.se,
        fe: FeDiagnostics {
            levels: groups
                .dims()
                .iter()
                .zip(&abs.levels)
                .map(|(g, &levels)| FeLevels {
                    dimension: g.dimension,
                    levels,
                })
                .collect(),
            absorbed: abs.absorbed,
            components: abs.components,
            singletons: abs.singletons,
            demean_iterations: dm.state.iterations,
            demean_last_change: dm.state.last_change,
        },
        intercept: "absorbed".to_owned(),
        residuals: u,
    })
}
