//! Multi-way fixed-effects within estimator.

pub mod demean;
pub mod dof;
pub mod fit;
pub mod inference;
pub mod ols;
pub mod oracle;

pub use demean::{demean, DemeanOptions, DemeanState, Demeaned, FeGroups, GroupIndex};
pub use dof::{absorption, connected_components, df_residual, Absorption};
pub use fit::{assemble, fit, fit_design, Design, FitOptions};
pub use inference::{adjusted_r2, inference, p_value, r_squared, significance_stars, t_critical};
pub use ols::{ols, OlsFit, DEFAULT_RANK_TOL};
pub use oracle::{lsdv_fit, lsdv_oracle, lsdv_rank, LsdvFit};
