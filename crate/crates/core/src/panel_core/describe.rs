use serde::Serialize;
use thiserror::Error;

use super::panel::Panel;
use crate::error::{Error, Result};
use crate::stats::{central_moments, chi2_2_sf, mean, sample_sd};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JarqueBera<T> {
    pub stat: T,
    pub p_value: f64,
    pub skewness: T,
    pub kurtosis: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum JbError {
    #[error("Jarque-Bera needs at least 4 observations, got {0}")]
    TooFewObservations(usize),
    #[error("Jarque-Bera is undefined for a constant series")]
    ConstantSeries,
}

/// JB = n/6 (S^2 + (K-3)^2/4) with biased moment estimators; the p-value is
/// the chi-square(2) upper tail.
pub fn jarque_bera<T: Scalar>(xs: &[T]) -> Result<JarqueBera<T>, JbError> {
    let n = xs.len();
    if n < 4 {
        return Err(JbError::TooFewObservations(n));
    }
    let (m2, m3, m4) = central_moments(xs);
    let scale = xs.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    if !(m2.sqrt() > T::lit(4.0) * T::epsilon() * scale) {
        return Err(JbError::ConstantSeries);
    }
    let skewness = m3 / m2.powf(T::lit(1.5));
    let kurtosis = m4 / (m2 * m2);
    let excess = kurtosis - T::lit(3.0);
    let stat = T::from_usize_lossy(n) / T::lit(6.0)
        * (skewness * skewness + excess * excess / T::lit(4.0));
    let p_value = chi2_2_sf(stat.as_f64()).clamp(0.0, 1.0);
    Ok(JarqueBera {
        stat,
        p_value,
        skewness,
        kurtosis,
    })
}

/// Pooled return statistics for one group of a panel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub group: String,
    pub obs: usize,
    pub n_assets: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub skew: Option<f64>,
    pub jb_stat: Option<f64>,
    pub jb_p: Option<f64>,
    /// Set when the JB test is undefined (constant or too-short series).
    pub jb_degenerate: bool,
}

/// Pools every (asset, day) return of the group.
pub fn descriptive_stats<T: Scalar>(panel: &Panel<T>, group: &str) -> Result<StatsRow> {
    let members = panel.units_in_group(group);
    if members.is_empty() {
        return Err(Error::EmptyGroup(group.to_string()));
    }
    let pooled: Vec<T> = members
        .iter()
        .flat_map(|&i| panel.outcomes().row(i).iter().copied())
        .collect();
    let min = pooled.iter().copied().fold(T::infinity(), T::min);
    let max = pooled.iter().copied().fold(T::neg_infinity(), T::max);
    let sd = if pooled.len() > 1 {
        sample_sd(&pooled)
    } else {
        T::zero()
    };
    let jb = jarque_bera(&pooled);
    let skew = match &jb {
        Ok(r) => Some(r.skewness.as_f64()),
        Err(JbError::TooFewObservations(_)) => {
            let (m2, m3, _) = central_moments(&pooled);
            (m2 > T::zero()).then(|| (m3 / m2.powf(T::lit(1.5))).as_f64())
        }
        Err(JbError::ConstantSeries) => None,
    };
    Ok(StatsRow {
        group: group.to_string(),
        obs: pooled.len(),
        n_assets: members.len(),
        mean: mean(&pooled).as_f64(),
        sd: sd.as_f64(),
        min: min.as_f64(),
        max: max.as_f64(),
        skew,
        jb_stat: jb.as_ref().ok().map(|r| r.stat.as_f64()),
        jb_p: jb.as_ref().ok().map(|r| r.p_value),
        jb_degenerate: jb.is_err(),
    })
}
