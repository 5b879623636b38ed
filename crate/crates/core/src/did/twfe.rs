use serde::Serialize;

use super::assignment::{AttEstimate, Estimator, TreatmentAssignment};
use super::cluster::{cluster_robust_vcov, ClusterMode};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel_core::Panel;
use crate::regression::{ols, Design, OlsFit};
use crate::stats::{student_t_quantile, Z_975};
use crate::Scalar;

pub const TREATMENT_COLUMN: &str = "treatment";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum CiMethod {
    /// tau +/- 1.96 se
    #[default]
    Normal,
    /// t critical value with Bell-McCaffrey degrees of freedom (CR2 only).
    BellMcCaffreyT,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DidOptions {
    pub cluster_mode: ClusterMode,
    pub ci: CiMethod,
}

/// Extra regressor appended after the fixed effects and covariates.
pub(crate) struct ExtraColumn<'a> {
    pub name: String,
    pub value: &'a dyn Fn(usize, usize) -> f64,
}

/// Two-way fixed-effects design, unit-major rows (row = i * T + t).
///
/// Column order: intercept, unit dummies (first unit dropped), period
/// dummies (first period dropped), covariates, then extras.
pub(crate) fn twfe_design<T: Scalar>(
    panel: &Panel<T>,
    covariates: &[&str],
    extras: &[ExtraColumn<'_>],
) -> Result<Design<T>> {
    let (n, t) = (panel.n_units(), panel.n_periods());
    let mut cov_mats = Vec::with_capacity(covariates.len());
    for &name in covariates {
        let m = panel
            .covariate(name)
            .ok_or_else(|| Error::invalid(format!("unknown covariate `{name}`")))?;
        cov_mats.push(m);
    }
    let p = 1 + (n - 1) + (t - 1) + covariates.len() + extras.len();
    let mut x = Matrix::zeros(n * t, p);
    for i in 0..n {
        for s in 0..t {
            let row = x.row_mut(i * t + s);
            row[0] = T::one();
            if i > 0 {
                row[i] = T::one();
            }
            if s > 0 {
                row[n - 1 + s] = T::one();
            }
            let mut col = n + t - 1;
            for m in &cov_mats {
                row[col] = m[(i, s)];
                col += 1;
            }
            for e in extras {
                row[col] = T::lit((e.value)(i, s));
                col += 1;
            }
        }
    }
    let mut names = Vec::with_capacity(p);
    names.push("intercept".to_string());
    names.extend(panel.units()[1..].iter().map(|u| format!("unit[{u}]")));
    names.extend(panel.dates()[1..].iter().map(|d| format!("time[{d}]")));
    names.extend(covariates.iter().map(|c| c.to_string()));
    names.extend(extras.iter().map(|e| e.name.clone()));
    Ok(Design::new(x, names))
}

pub(crate) fn stacked_outcomes<T: Scalar>(panel: &Panel<T>) -> Vec<T> {
    panel.outcomes().as_slice().to_vec()
}

pub(crate) fn unit_clusters<T: Scalar>(panel: &Panel<T>) -> Vec<usize> {
    let t = panel.n_periods();
    (0..panel.n_units() * t).map(|r| r / t).collect()
}

/// The fitted TWFE regression with the treatment indicator as last column.
pub fn twfe_fit<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    covariates: &[&str],
) -> Result<(Design<T>, OlsFit<T>)> {
    assignment.check_panel(panel)?;
    let exposed = |i: usize, s: usize| f64::from(u8::from(assignment.exposed(i, s)));
    let design = twfe_design(
        panel,
        covariates,
        &[ExtraColumn {
            name: TREATMENT_COLUMN.to_string(),
            value: &exposed,
        }],
    )?;
    let fit = ols(&design, &stacked_outcomes(panel))?;
    Ok((design, fit))
}

/// Least-squares DID: outcomes on unit and period fixed effects, optional
/// covariates and the treatment indicator, with unit-clustered errors.
pub fn twfe_did<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    covariates: &[&str],
    options: &DidOptions,
) -> Result<AttEstimate<T>> {
    let (design, fit) = twfe_fit(panel, assignment, covariates)?;
    let tau_col = design.matrix.ncols() - 1;
    let tau = fit.coefficients[tau_col];
    let want_df = options.ci == CiMethod::BellMcCaffreyT;
    let v = cluster_robust_vcov(
        &fit.qr,
        &fit.residuals,
        &unit_clusters(panel),
        &[tau_col],
        options.cluster_mode,
        want_df,
    )?;
    let se = v.vcov[(0, 0)].max(T::zero()).sqrt();
    let crit = match (options.ci, &v.bm_df) {
        (CiMethod::BellMcCaffreyT, Some(df)) => student_t_quantile(0.975, df[0].as_f64()),
        (CiMethod::BellMcCaffreyT, None) => student_t_quantile(0.975, (v.n_clusters - 1) as f64),
        (CiMethod::Normal, _) => Z_975,
    };
    Ok(AttEstimate::new(
        tau,
        se,
        T::lit(crit),
        Estimator::Did,
        "full",
        None,
    ))
}

/// (mean_tr,post - mean_tr,pre) - (mean_co,post - mean_co,pre)
pub fn four_means_did<T: Scalar>(panel: &Panel<T>, assignment: &TreatmentAssignment) -> T {
    let y = panel.outcomes();
    let t_pre = assignment.t_pre();
    let mean_over = |units: &[usize], periods: std::ops::Range<usize>| {
        let mut s = T::zero();
        let mut c = 0usize;
        for &i in units {
            for t in periods.clone() {
                s = s + y[(i, t)];
                c += 1;
            }
        }
        s / T::from_usize_lossy(c)
    };
    let tr = assignment.treated();
    let co = assignment.controls();
    let t = assignment.n_periods();
    (mean_over(tr, t_pre..t) - mean_over(tr, 0..t_pre))
        - (mean_over(&co, t_pre..t) - mean_over(&co, 0..t_pre))
}
