use chrono::{Datelike, Months, NaiveDate, Weekday};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel_core::Panel;
use crate::Scalar;

/// Block treatment: the treated units are exposed in exactly the last
/// `t_post` periods of the panel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreatmentAssignment {
    treated: Vec<usize>,
    n_units: usize,
    t_pre: usize,
    t_post: usize,
}

impl TreatmentAssignment {
    /// `treated` are unit indices into the panel; `t_pre` counts the
    /// pre-treatment periods.
    pub fn new<T: Scalar>(panel: &Panel<T>, mut treated: Vec<usize>, t_pre: usize) -> Result<Self> {
        treated.sort_unstable();
        treated.dedup();
        let n_units = panel.n_units();
        if treated.is_empty() {
            return Err(Error::invalid("treated set is empty"));
        }
        if treated.len() >= n_units {
            return Err(Error::invalid(
                "treated set must leave at least one control unit",
            ));
        }
        if let Some(&bad) = treated.iter().find(|&&i| i >= n_units) {
            return Err(Error::invalid(format!(
                "treated unit index {bad} out of range"
            )));
        }
        let t = panel.n_periods();
        if t_pre < 1 || t_pre >= t {
            return Err(Error::invalid(format!(
                "need at least one pre and one post period, got t_pre = {t_pre} of {t}"
            )));
        }
        Ok(Self {
            treated,
            n_units,
            t_pre,
            t_post: t - t_pre,
        })
    }

    /// Treated units are the panel units labelled `group`.
    pub fn from_group<T: Scalar>(panel: &Panel<T>, group: &str, t_pre: usize) -> Result<Self> {
        let treated = panel.units_in_group(group);
        if treated.is_empty() {
            return Err(Error::EmptyGroup(group.to_string()));
        }
        Self::new(panel, treated, t_pre)
    }

    /// The first period on or after `treatment_date` is the first treated
    /// period.
    pub fn from_treatment_date<T: Scalar>(
        panel: &Panel<T>,
        treated: Vec<usize>,
        treatment_date: NaiveDate,
    ) -> Result<Self> {
        let t_pre = panel
            .period_index_on_or_after(treatment_date)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "treatment date {treatment_date} is after the panel end"
                ))
            })?;
        Self::new(panel, treated, t_pre)
    }

    pub fn treated(&self) -> &[usize] {
        &self.treated
    }

    pub fn controls(&self) -> Vec<usize> {
        (0..self.n_units).filter(|i| !self.is_treated(*i)).collect()
    }

    pub fn is_treated(&self, unit: usize) -> bool {
        self.treated.binary_search(&unit).is_ok()
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_treated(&self) -> usize {
        self.treated.len()
    }

    pub fn n_control(&self) -> usize {
        self.n_units - self.treated.len()
    }

    pub fn t_pre(&self) -> usize {
        self.t_pre
    }

    pub fn t_post(&self) -> usize {
        self.t_post
    }

    pub fn n_periods(&self) -> usize {
        self.t_pre + self.t_post
    }

    pub(crate) fn check_panel<T: Scalar>(&self, panel: &Panel<T>) -> Result<()> {
        if panel.n_units() != self.n_units || panel.n_periods() != self.n_periods() {
            return Err(Error::invalid(format!(
                "assignment is for {}x{}, panel is {}x{}",
                self.n_units,
                self.n_periods(),
                panel.n_units(),
                panel.n_periods()
            )));
        }
        Ok(())
    }

    /// Whether unit `i` is treated in period `t`.
    pub fn exposed(&self, i: usize, t: usize) -> bool {
        t >= self.t_pre && self.is_treated(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Estimator {
    Did,
    Sdid,
}

/// A point estimate of the average treatment effect on the treated with its
/// standard error and 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttEstimate<T> {
    pub tau_hat: T,
    pub se: T,
    pub ci_low: T,
    pub ci_high: T,
    pub estimator: Estimator,
    pub window: String,
    pub n_boot: Option<usize>,
}

impl<T: Scalar> AttEstimate<T> {
    pub fn new(
        tau_hat: T,
        se: T,
        critical_value: T,
        estimator: Estimator,
        window: impl Into<String>,
        n_boot: Option<usize>,
    ) -> Self {
        let half = critical_value * se;
        Self {
            tau_hat,
            se,
            ci_low: tau_hat - half,
            ci_high: tau_hat + half,
            estimator,
            window: window.into(),
            n_boot,
        }
    }

    pub fn covers(&self, value: T) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

pub fn window_label(months: u32) -> String {
    format!("0-{months}m")
}

fn last_day_of_month(year: i32, month: u32) -> NaiveDate {
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    first + Months::new(1) - chrono::Days::new(1)
}

/// Last calendar day of the window that starts with the first treated
/// period and runs through the end of the `months`-th following month.
pub fn window_end(treatment_date: NaiveDate, months: u32) -> NaiveDate {
    let shifted = NaiveDate::from_ymd_opt(treatment_date.year(), treatment_date.month(), 1)
        .expect("valid date")
        + Months::new(months);
    last_day_of_month(shifted.year(), shifted.month())
}

fn is_weekend(d: NaiveDate) -> bool {
    matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Truncate post-treatment periods at the calendar-month window boundary.
pub fn event_window<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    months: u32,
) -> Result<(Panel<T>, TreatmentAssignment)> {
    assignment.check_panel(panel)?;
    if months == 0 {
        return Err(Error::invalid("event window needs at least one month"));
    }
    let dates = panel.dates();
    let treatment_date = dates[assignment.t_pre];
    let end = window_end(treatment_date, months);
    let panel_end = *dates.last().expect("non-empty panel");
    // Working-day calendars may legitimately stop before a weekend month end.
    let trading_days_only = !dates.iter().copied().any(is_weekend);
    let mut required = end;
    if trading_days_only {
        while is_weekend(required) {
            required = required.pred_opt().expect("date in range");
        }
    }
    if panel_end < required {
        return Err(Error::WindowExceedsPanel {
            window_end: end,
            panel_end,
        });
    }
    let keep = dates.iter().take_while(|&&d| d <= end).count();
    let sub = panel.slice_periods(0..keep)?;
    let assign = TreatmentAssignment::new(&sub, assignment.treated.clone(), assignment.t_pre)?;
    Ok((sub, assign))
}
