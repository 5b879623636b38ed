use serde::Serialize;

use super::block::BlockData;
use super::simplex::{simplex_ls_minimize, SimplexSolution, SolverOptions, SolverReport};
use crate::did::TreatmentAssignment;
use crate::error::{Error, Result};
use crate::panel_core::Panel;
use crate::stats::sample_sd;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdidWeights<T> {
    pub omega0: T,
    pub omega: Vec<T>,
    pub lambda0: T,
    pub lambda: Vec<T>,
    pub zeta: T,
}

impl<T: Scalar> SdidWeights<T> {
    /// Uniform unit and time weights; the estimator then reduces to DID.
    pub fn uniform(n_co: usize, t_pre: usize) -> Self {
        Self {
            omega0: T::zero(),
            omega: vec![T::one() / T::from_usize_lossy(n_co); n_co],
            lambda0: T::zero(),
            lambda: vec![T::one() / T::from_usize_lossy(t_pre); t_pre],
            zeta: T::zero(),
        }
    }

    pub fn validate(&self, n_co: usize, t_pre: usize) -> Result<()> {
        if self.omega.len() != n_co {
            return Err(Error::invalid(format!(
                "{} unit weights for {n_co} control units",
                self.omega.len()
            )));
        }
        if self.lambda.len() != t_pre {
            return Err(Error::invalid(format!(
                "{} time weights for {t_pre} pre-periods",
                self.lambda.len()
            )));
        }
        let tol = T::lit(1e-9);
        for (name, w) in [("unit", &self.omega), ("time", &self.lambda)] {
            if w.iter().any(|&x| !(x >= T::zero())) {
                return Err(Error::invalid(format!("negative {name} weight")));
            }
            if (w.iter().copied().sum::<T>() - T::one()).abs() > tol {
                return Err(Error::invalid(format!("{name} weights do not sum to one")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Zeta<T> {
    pub zeta: T,
    pub sigma: T,
    pub scaling: T,
    /// True when the control pre-period changes have no spread.
    pub degenerate: bool,
}

/// (N_tr T_post)^(1/4) unless overridden.
pub fn default_zeta_scaling<T: Scalar>(n_tr: usize, t_post: usize) -> T {
    T::from_usize_lossy(n_tr * t_post).powf(T::lit(0.25))
}

/// zeta = scaling * sd of control one-period changes over the pre-period.
pub fn compute_zeta<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    scaling: Option<T>,
) -> Result<Zeta<T>> {
    block_zeta(&BlockData::from_panel(panel, assignment)?, scaling)
}

pub(crate) fn block_zeta<T: Scalar>(block: &BlockData<T>, scaling: Option<T>) -> Result<Zeta<T>> {
    if block.t_pre < 2 {
        return Err(Error::invalid("zeta needs at least two pre-periods"));
    }
    if block.n_co < 1 {
        return Err(Error::invalid("zeta needs at least one control unit"));
    }
    let scaling = scaling.unwrap_or_else(|| default_zeta_scaling(block.n_tr, block.t_post()));
    let mut diffs = Vec::with_capacity(block.n_co * (block.t_pre - 1));
    for i in 0..block.n_co {
        for t in 1..block.t_pre {
            diffs.push(block.y[(i, t)] - block.y[(i, t - 1)]);
        }
    }
    let sigma = if diffs.len() >= 2 {
        sample_sd(&diffs)
    } else {
        T::zero()
    };
    let degenerate = !(sigma > T::zero());
    if degenerate {
        log::warn!("control pre-period outcome changes are constant; zeta set to 0");
        return Ok(Zeta {
            zeta: T::zero(),
            sigma: T::zero(),
            scaling,
            degenerate,
        });
    }
    Ok(Zeta {
        zeta: scaling * sigma,
        sigma,
        scaling,
        degenerate,
    })
}

/// (omega0, omega) minimising the ridge-penalised pre-period fit of the
/// treated average by weighted controls.
pub fn solve_unit_weights<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    zeta: T,
    options: &SolverOptions<T>,
) -> Result<SimplexSolution<T>> {
    block_unit_weights(&BlockData::from_panel(panel, assignment)?, zeta, options)
}

/// (lambda0, lambda) minimising the fit of each control's post-period mean
/// by its weighted pre-period outcomes.
pub fn solve_time_weights<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    options: &SolverOptions<T>,
) -> Result<SimplexSolution<T>> {
    block_time_weights(&BlockData::from_panel(panel, assignment)?, options)
}

pub(crate) fn block_unit_weights<T: Scalar>(
    block: &BlockData<T>,
    zeta: T,
    options: &SolverOptions<T>,
) -> Result<SimplexSolution<T>> {
    if !(zeta >= T::zero()) {
        return Err(Error::invalid("zeta must be non-negative"));
    }
    simplex_ls_minimize(&block.unit_problem(zeta).view(), options)
        .map_err(|e| rename(e, "unit weights"))
}

pub(crate) fn block_time_weights<T: Scalar>(
    block: &BlockData<T>,
    options: &SolverOptions<T>,
) -> Result<SimplexSolution<T>> {
    simplex_ls_minimize(&block.time_problem().view(), options)
        .map_err(|e| rename(e, "time weights"))
}

fn rename(e: Error, what: &str) -> Error {
    match e {
        Error::NonConvergence {
            iterations,
            gap,
            objective_trace,
            ..
        } => Error::NonConvergence {
            what: what.to_string(),
            iterations,
            gap,
            objective_trace,
        },
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverReports {
    pub unit: SolverReport,
    pub time: SolverReport,
}

#[derive(Clone, Debug)]
pub(crate) struct FittedWeights<T> {
    pub weights: SdidWeights<T>,
    pub reports: SolverReports,
    pub notes: Vec<String>,
}

pub(crate) fn fit_weights<T: Scalar>(
    block: &BlockData<T>,
    scaling: Option<T>,
    fixed_zeta: Option<T>,
    options: &SolverOptions<T>,
) -> Result<FittedWeights<T>> {
    let mut notes = Vec::new();
    let zeta = match fixed_zeta {
        Some(z) => z,
        None => {
            let z = block_zeta(block, scaling)?;
            if z.degenerate {
                notes.push("zeta is 0: control pre-period changes are constant".to_string());
            }
            z.zeta
        }
    };
    let unit = block_unit_weights(block, zeta, options)?;
    let time = block_time_weights(block, options)?;
    if block.n_co == 1 {
        notes.push(
            "single control unit: time-weight objective is flat, uniform time weights returned"
                .to_string(),
        );
    }
    Ok(FittedWeights {
        weights: SdidWeights {
            omega0: unit.intercept,
            omega: unit.weights,
            lambda0: time.intercept,
            lambda: time.weights,
            zeta,
        },
        reports: SolverReports {
            unit: unit.report,
            time: time.report,
        },
        notes,
    })
}
