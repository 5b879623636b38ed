//! Pre-treatment parallel-trends diagnostics.

use chrono::NaiveDate;
use serde::Serialize;

use super::assignment::TreatmentAssignment;
use super::cluster::{cluster_robust_vcov, ClusterMode};
use super::twfe::{stacked_outcomes, twfe_design, unit_clusters, ExtraColumn, TREATMENT_COLUMN};
use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, Matrix};
use crate::panel_core::Panel;
use crate::regression::ols;
use crate::stats::f_sf;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FTestResult {
    pub f_stat: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrendTestForm {
    /// Treated x linear period index.
    #[default]
    LinearTrend,
    /// Treated x each pre-period dummy (leads), tested jointly.
    EventStudy,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TrendTestOptions {
    pub form: TrendTestForm,
    pub cluster_mode: ClusterMode,
}

/// Wald F-test, with unit-clustered covariance, that the treated-specific
/// pre-treatment trend terms are zero.
pub fn parallel_trends_test<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    options: &TrendTestOptions,
) -> Result<FTestResult> {
    assignment.check_panel(panel)?;
    let t_pre = assignment.t_pre();
    if t_pre < 3 {
        return Err(Error::Unidentified(format!(
            "pre-treatment trend with only {t_pre} pre-periods (need 3)"
        )));
    }
    let pre = panel.slice_periods(0..t_pre)?;
    let trend = |i: usize, s: usize| {
        if assignment.is_treated(i) {
            (s + 1) as f64
        } else {
            0.0
        }
    };
    let leads: Vec<Box<dyn Fn(usize, usize) -> f64 + '_>> = (1..t_pre)
        .map(|k| {
            Box::new(move |i: usize, s: usize| {
                f64::from(u8::from(assignment.is_treated(i) && s == k))
            }) as Box<dyn Fn(usize, usize) -> f64>
        })
        .collect();
    let extras: Vec<ExtraColumn<'_>> = match options.form {
        TrendTestForm::LinearTrend => vec![ExtraColumn {
            name: "treated_x_trend".to_string(),
            value: &trend,
        }],
        TrendTestForm::EventStudy => leads
            .iter()
            .zip(pre.dates()[1..].iter())
            .map(|(f, d)| ExtraColumn {
                name: format!("treated_x_time[{d}]"),
                value: f.as_ref(),
            })
            .collect(),
    };
    let q = extras.len();
    let design = twfe_design(&pre, &[], &extras)?;
    let y = stacked_outcomes(&pre);
    let fit = ols(&design, &y)?;
    let p = design.matrix.ncols();
    let coefs: Vec<usize> = (p - q..p).collect();
    let v = cluster_robust_vcov(
        &fit.qr,
        &fit.residuals,
        &unit_clusters(&pre),
        &coefs,
        options.cluster_mode,
        false,
    )?;
    let b: Vec<T> = coefs.iter().map(|&c| fit.coefficients[c]).collect();
    let df_den = v.n_clusters - 1;

    let scale = y.iter().fold(T::one(), |a, &x| a.max(x.abs()));
    let tiny = T::lit(1e3) * T::epsilon() * scale;
    let var_tiny = (0..q).all(|k| v.vcov[(k, k)].max(T::zero()).sqrt() <= tiny);
    if var_tiny {
        // Exact fit: trends are either exactly zero or perfectly determined.
        let (f_stat, p) = if b.iter().all(|x| x.abs() <= tiny) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        };
        return Ok(FTestResult {
            f_stat,
            df_num: q,
            df_den,
            p,
        });
    }
    let inv = spd_inverse(&v.vcov)
        .ok_or_else(|| Error::Unidentified("robust covariance of the trend terms".to_string()))?;
    let quad = crate::linalg::dot(&b, &inv.matvec(&b));
    let f_stat = (quad / T::from_usize_lossy(q)).as_f64().max(0.0);
    Ok(FTestResult {
        f_stat,
        df_num: q,
        df_den,
        p: f_sf(f_stat, q as f64, df_den as f64),
    })
}

/// Per-period group means alongside the fitted group means of the linear
/// trends model (unit and period effects, treated x trend, treatment).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendDiagnostics {
    pub dates: Vec<NaiveDate>,
    pub treated_mean: Vec<f64>,
    pub control_mean: Vec<f64>,
    pub treated_fitted: Vec<f64>,
    pub control_fitted: Vec<f64>,
}

pub fn trend_diagnostics<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
) -> Result<TrendDiagnostics> {
    assignment.check_panel(panel)?;
    let trend = |i: usize, s: usize| {
        if assignment.is_treated(i) {
            (s + 1) as f64
        } else {
            0.0
        }
    };
    let exposed = |i: usize, s: usize| f64::from(u8::from(assignment.exposed(i, s)));
    let design = twfe_design(
        panel,
        &[],
        &[
            ExtraColumn {
                name: "treated_x_trend".to_string(),
                value: &trend,
            },
            ExtraColumn {
                name: TREATMENT_COLUMN.to_string(),
                value: &exposed,
            },
        ],
    )?;
    let fit = ols(&design, &stacked_outcomes(panel))?;
    let t = panel.n_periods();
    let fitted = Matrix::from_row_major(panel.n_units(), t, fit.fitted.clone());
    let group_means = |m: &Matrix<T>, units: &[usize]| -> Vec<f64> {
        (0..t)
            .map(|s| units.iter().map(|&i| m[(i, s)].as_f64()).sum::<f64>() / units.len() as f64)
            .collect()
    };
    let tr = assignment.treated().to_vec();
    let co = assignment.controls();
    Ok(TrendDiagnostics {
        dates: panel.dates().to_vec(),
        treated_mean: group_means(panel.outcomes(), &tr),
        control_mean: group_means(panel.outcomes(), &co),
        treated_fitted: group_means(&fitted, &tr),
        control_fitted: group_means(&fitted, &co),
    })
}
