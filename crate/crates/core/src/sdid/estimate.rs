use serde::Serialize;

use super::block::BlockData;
use super::bootstrap::{bootstrap_blocks, BootstrapOptions, BootstrapResult};
use super::covariates::{residualize_block, residualize_covariates};
use super::simplex::SolverOptions;
use super::weights::{fit_weights, FittedWeights, SdidWeights, SolverReports};
use crate::did::{AttEstimate, Estimator, TreatmentAssignment};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel_core::Panel;
use crate::regression::{ols, Design};
use crate::stats::Z_975;
use crate::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum CovariateTiming {
    /// Residualize once on the full panel before solving weights.
    #[default]
    Once,
    /// Residualize inside every bootstrap replicate as well.
    PerReplicate,
}

#[derive(Clone, Debug)]
pub struct SdidOptions<T> {
    /// Overrides the (N_tr T_post)^(1/4) zeta scaling factor.
    pub zeta_scaling: Option<T>,
    /// Fixes zeta instead of estimating it from the data.
    pub zeta: Option<T>,
    pub solver: SolverOptions<T>,
    pub covariates: Vec<String>,
    pub covariate_timing: CovariateTiming,
    /// Without bootstrap the standard error and interval are NaN.
    pub bootstrap: Option<BootstrapOptions>,
    /// Skip the weight solves and use uniform weights (plain DID).
    pub uniform_weights: bool,
    pub window: String,
}

impl<T: Scalar> Default for SdidOptions<T> {
    fn default() -> Self {
        Self {
            zeta_scaling: None,
            zeta: None,
            solver: SolverOptions::default(),
            covariates: Vec::new(),
            covariate_timing: CovariateTiming::Once,
            bootstrap: None,
            uniform_weights: false,
            window: "full".to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdidResult<T> {
    pub att: AttEstimate<T>,
    pub weights: SdidWeights<T>,
    pub solver_report: Option<SolverReports>,
    pub covariate_coefficients: Vec<T>,
    pub replicate_taus: Vec<T>,
    pub failed_replicates: usize,
    pub notes: Vec<String>,
}

/// Weighted double difference:
/// (treated post mean - lambda-weighted treated pre) -
/// sum_i omega_i (control_i post mean - lambda-weighted control_i pre).
pub fn sdid_att<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    weights: &SdidWeights<T>,
) -> Result<T> {
    let block = BlockData::from_panel(panel, assignment)?;
    weights.validate(block.n_co, block.t_pre)?;
    Ok(block_att(&block, weights))
}

pub(crate) fn block_att<T: Scalar>(block: &BlockData<T>, weights: &SdidWeights<T>) -> T {
    let pre_weighted = |i: usize| {
        weights
            .lambda
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (t, &l)| acc + l * block.y[(i, t)])
    };
    let diff = |i: usize| block.post_mean(i) - pre_weighted(i);
    let treated =
        (block.n_co..block.n_units()).map(diff).sum::<T>() / T::from_usize_lossy(block.n_tr);
    let control = weights
        .omega
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, &w)| acc + w * diff(i));
    treated - control
}

/// The same estimate from the weighted two-way fixed-effects regression:
/// cells (i, t) weighted by omega_i lambda_t (treated units 1/N_tr, post
/// periods 1/T_post), zero-weight cells dropped.
pub fn sdid_att_regression<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    weights: &SdidWeights<T>,
) -> Result<T> {
    let block = BlockData::from_panel(panel, assignment)?;
    weights.validate(block.n_co, block.t_pre)?;
    let unit_w: Vec<T> = (0..block.n_units())
        .map(|i| {
            if i < block.n_co {
                weights.omega[i]
            } else {
                T::one() / T::from_usize_lossy(block.n_tr)
            }
        })
        .collect();
    let time_w: Vec<T> = (0..block.n_periods())
        .map(|t| {
            if t < block.t_pre {
                weights.lambda[t]
            } else {
                T::one() / T::from_usize_lossy(block.t_post())
            }
        })
        .collect();
    let units: Vec<usize> = (0..block.n_units())
        .filter(|&i| unit_w[i] > T::zero())
        .collect();
    let periods: Vec<usize> = (0..block.n_periods())
        .filter(|&t| time_w[t] > T::zero())
        .collect();
    let (nu, np) = (units.len(), periods.len());
    let p = 1 + (nu - 1) + (np - 1) + 1;
    let mut x = Matrix::zeros(nu * np, p);
    let mut y = Vec::with_capacity(nu * np);
    for (a, &i) in units.iter().enumerate() {
        for (b, &t) in periods.iter().enumerate() {
            let sw = (unit_w[i] * time_w[t]).sqrt();
            let row = x.row_mut(a * np + b);
            row[0] = sw;
            if a > 0 {
                row[a] = sw;
            }
            if b > 0 {
                row[nu - 1 + b] = sw;
            }
            if i >= block.n_co && t >= block.t_pre {
                row[p - 1] = sw;
            }
            y.push(sw * block.y[(i, t)]);
        }
    }
    let names = (0..p).map(|j| format!("c{j}")).collect();
    let fit = ols(&Design::new(x, names), &y)?;
    Ok(fit.coefficients[p - 1])
}

/// Full estimator: optional covariate adjustment, zeta, both weight
/// solves, the point estimate and (when requested) bootstrap inference.
pub fn sdid_estimate<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    options: &SdidOptions<T>,
) -> Result<SdidResult<T>> {
    assignment.check_panel(panel)?;
    let per_replicate =
        options.covariate_timing == CovariateTiming::PerReplicate && !options.covariates.is_empty();
    let names: Vec<&str> = options.covariates.iter().map(String::as_str).collect();
    let (adjusted, beta) = residualize_covariates(panel, &names)?;
    let block = BlockData::from_panel(&adjusted, assignment)?;

    let fitted = weights_for(&block, options)?;
    let tau = block_att(&block, &fitted.weights);
    if !tau.is_finite() {
        return Err(Error::Unidentified(
            "SDID point estimate (non-finite)".to_string(),
        ));
    }

    let mut notes = fitted.notes.clone();
    let (se, n_boot, boot) = match &options.bootstrap {
        Some(b) => {
            let source = if per_replicate {
                BlockData::with_covariates(panel, assignment, &options.covariates)?
            } else {
                block.clone()
            };
            let r = bootstrap_blocks(&source, b, |rep| {
                let rep = if per_replicate {
                    residualize_block(rep)?
                } else {
                    rep.clone()
                };
                let w = weights_for(&rep, options)?;
                Ok(block_att(&rep, &w.weights))
            })?;
            if r.failed > 0 {
                notes.push(format!(
                    "{} of {} bootstrap replicates failed",
                    r.failed, b.replications
                ));
            }
            (r.se, Some(b.replications), r)
        }
        None => (T::nan(), None, BootstrapResult::empty()),
    };
    let att = AttEstimate::new(
        tau,
        se,
        T::lit(Z_975),
        Estimator::Sdid,
        options.window.clone(),
        n_boot,
    );
    Ok(SdidResult {
        att,
        weights: fitted.weights,
        solver_report: fitted.reports,
        covariate_coefficients: beta,
        replicate_taus: boot.replicate_taus,
        failed_replicates: boot.failed,
        notes,
    })
}

fn weights_for<T: Scalar>(
    block: &BlockData<T>,
    options: &SdidOptions<T>,
) -> Result<FittedWeightsOpt<T>> {
    if options.uniform_weights {
        return Ok(FittedWeightsOpt {
            weights: SdidWeights::uniform(block.n_co, block.t_pre),
            reports: None,
            notes: vec!["uniform weights requested".to_string()],
        });
    }
    let FittedWeights {
        weights,
        reports,
        notes,
    } = fit_weights(block, options.zeta_scaling, options.zeta, &options.solver)?;
    Ok(FittedWeightsOpt {
        weights,
        reports: Some(reports),
        notes,
    })
}

struct FittedWeightsOpt<T> {
    weights: SdidWeights<T>,
    reports: Option<SolverReports>,
    notes: Vec<String>,
}
