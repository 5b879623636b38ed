use crate::did::TreatmentAssignment;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel_core::Panel;
use crate::sdid::simplex::SimplexLsProblem;
use crate::Scalar;

/// Outcomes rearranged as controls first, then treated, with the
/// pre-periods leading. Optional covariates share the layout.
#[derive(Clone, Debug)]
pub(crate) struct BlockData<T> {
    pub y: Matrix<T>,
    pub n_co: usize,
    pub n_tr: usize,
    pub t_pre: usize,
    pub covariates: Vec<(String, Matrix<T>)>,
}

/// An owned simplex least-squares problem.
pub(crate) struct WeightProblem<T> {
    pub a: Matrix<T>,
    pub b: Vec<T>,
    pub ridge: T,
}

impl<T: Scalar> WeightProblem<T> {
    pub fn view(&self) -> SimplexLsProblem<'_, T> {
        SimplexLsProblem {
            a: &self.a,
            b: &self.b,
            ridge: self.ridge,
        }
    }
}

impl<T: Scalar> BlockData<T> {
    pub fn from_panel(panel: &Panel<T>, assignment: &TreatmentAssignment) -> Result<Self> {
        Self::with_covariates(panel, assignment, &[])
    }

    pub fn with_covariates(
        panel: &Panel<T>,
        assignment: &TreatmentAssignment,
        covariates: &[String],
    ) -> Result<Self> {
        assignment.check_panel(panel)?;
        let order: Vec<usize> = assignment
            .controls()
            .into_iter()
            .chain(assignment.treated().iter().copied())
            .collect();
        let mut covs = Vec::with_capacity(covariates.len());
        for name in covariates {
            let m = panel
                .covariate(name)
                .ok_or_else(|| Error::invalid(format!("unknown covariate `{name}`")))?;
            covs.push((name.clone(), m.select_rows(&order)));
        }
        Ok(Self {
            y: panel.outcomes().select_rows(&order),
            n_co: assignment.n_control(),
            n_tr: assignment.n_treated(),
            t_pre: assignment.t_pre(),
            covariates: covs,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_co + self.n_tr
    }

    pub fn n_periods(&self) -> usize {
        self.y.ncols()
    }

    pub fn t_post(&self) -> usize {
        self.n_periods() - self.t_pre
    }

    /// Same layout with units drawn by index (controls must come from
    /// `0..n_co` and treated from `n_co..`).
    pub fn resample(&self, rows: &[usize]) -> Self {
        Self {
            y: self.y.select_rows(rows),
            n_co: self.n_co,
            n_tr: self.n_tr,
            t_pre: self.t_pre,
            covariates: self
                .covariates
                .iter()
                .map(|(n, m)| (n.clone(), m.select_rows(rows)))
                .collect(),
        }
    }

    pub fn treated_mean(&self, t: usize) -> T {
        let s = (self.n_co..self.n_units())
            .map(|i| self.y[(i, t)])
            .sum::<T>();
        s / T::from_usize_lossy(self.n_tr)
    }

    pub fn post_mean(&self, i: usize) -> T {
        let s = (self.t_pre..self.n_periods())
            .map(|t| self.y[(i, t)])
            .sum::<T>();
        s / T::from_usize_lossy(self.t_post())
    }

    /// Rows are pre-periods, columns control units; target is the treated
    /// average; ridge zeta^2 T_pre.
    pub fn unit_problem(&self, zeta: T) -> WeightProblem<T> {
        WeightProblem {
            a: Matrix::from_fn(self.t_pre, self.n_co, |t, i| self.y[(i, t)]),
            b: (0..self.t_pre).map(|t| self.treated_mean(t)).collect(),
            ridge: zeta * zeta * T::from_usize_lossy(self.t_pre),
        }
    }

    /// Rows are control units, columns pre-periods; target is each
    /// control's post-period average; no ridge.
    pub fn time_problem(&self) -> WeightProblem<T> {
        WeightProblem {
            a: Matrix::from_fn(self.n_co, self.t_pre, |i, t| self.y[(i, t)]),
            b: (0..self.n_co).map(|i| self.post_mean(i)).collect(),
            ridge: T::zero(),
        }
    }
}
