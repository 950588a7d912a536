//! Fare-quote panel econometrics: sample selection, holiday and
//! advance-purchase regressors, and a within estimator that absorbs
//! airline-route, quotation-period and departure-period fixed effects.

pub mod error;
pub mod estimator;
pub mod exogenous;
pub mod features;
pub mod ingest;
pub mod model;
pub mod report;
pub mod selfcheck;
pub mod synthgen;

pub use error::{Error, Result, Stage, StageExt};
pub use estimator::{fit, FitOptions};
pub use features::{build_features, FeatureBuild, FeatureMatrix};
pub use ingest::{select_sample, AirportFilter, SelectionReport};
pub use model::*;
