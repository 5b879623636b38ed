//! Synthetic difference-in-differences: regularized unit weights, time
//! weights, the weighted two-way fixed-effects estimate and a stratified
//! unit bootstrap.

mod block;
mod bootstrap;
mod covariates;
mod estimate;
mod simplex;
mod weights;

pub(crate) use block::BlockData;
pub use bootstrap::{bootstrap_variance, BootstrapOptions, BootstrapResult};
pub use covariates::residualize_covariates;
pub use estimate::{
    sdid_att, sdid_att_regression, sdid_estimate, CovariateTiming, SdidOptions, SdidResult,
};
pub use simplex::{
    simplex_ls_minimize, SimplexLsProblem, SimplexSolution, SolverOptions, SolverReport,
};
pub use weights::{
    compute_zeta, default_zeta_scaling, solve_time_weights, solve_unit_weights, SdidWeights,
    SolverReports, Zeta,
};
