//! Classic two-way fixed-effects difference-in-differences with
//! unit-clustered inference and parallel-trends diagnostics.

mod assignment;
mod cluster;
mod trends;
pub(crate) mod twfe;

pub use assignment::{
    event_window, window_end, window_label, AttEstimate, Estimator, TreatmentAssignment,
};
pub use cluster::{cluster_robust_se, cluster_robust_vcov, ClusterMode, ClusterVcov};
pub use trends::{
    parallel_trends_test, trend_diagnostics, FTestResult, TrendDiagnostics, TrendTestForm,
    TrendTestOptions,
};
pub use twfe::{four_means_did, twfe_did, twfe_fit, CiMethod, DidOptions, TREATMENT_COLUMN};
