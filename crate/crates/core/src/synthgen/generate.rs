use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::did::TreatmentAssignment;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel_core::{Panel, RawRecord, COV_LN_CAP, COV_LN_VOL};
use crate::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// Student-t with 3 degrees of freedom, rescaled to standard deviation
    /// `noise_sd`.
    StudentT3,
}

/// Coefficients on generated `ln_vol` / `ln_cap` covariates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateEffects {
    pub beta_ln_vol: f64,
    pub beta_ln_cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelSpec {
    pub n_co: usize,
    pub n_tr: usize,
    pub t_pre: usize,
    pub t_post: usize,
    pub n_factors: usize,
    pub factor_loading_scale: f64,
    pub noise_sd: f64,
    pub tau: f64,
    /// Extra per-period slope of the treated units.
    pub trend_divergence: f64,
    pub seed: u64,
    /// Mean shift of treated factor loadings, in units of the loading scale.
    pub treated_loading_shift: f64,
    pub noise: NoiseKind,
    pub covariates: Option<CovariateEffects>,
    pub start_date: NaiveDate,
}

impl Default for PanelSpec {
    fn default() -> Self {
        Self {
            n_co: 20,
            n_tr: 5,
            t_pre: 30,
            t_post: 10,
            n_factors: 2,
            factor_loading_scale: 0.01,
            noise_sd: 0.01,
            tau: 0.0,
            trend_divergence: 0.0,
            seed: 0,
            treated_loading_shift: 1.0,
            noise: NoiseKind::Gaussian,
            covariates: None,
            start_date: NaiveDate::from_ymd_opt(2022, 6, 1).expect("valid date"),
        }
    }
}

impl PanelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_co < 1 || self.n_tr < 1 || self.t_pre < 1 || self.t_post < 1 {
            return Err(Error::invalid("panel spec counts must all be at least 1"));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::invalid("noise_sd must be finite and non-negative"));
        }
        if !self.factor_loading_scale.is_finite() || !self.tau.is_finite() {
            return Err(Error::invalid("panel spec parameters must be finite"));
        }
        Ok(())
    }

    /// Date of the first treated period.
    pub fn treatment_date(&self) -> NaiveDate {
        self.start_date + Days::new(self.t_pre as u64)
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedPanel<T> {
    pub panel: Panel<T>,
    pub assignment: TreatmentAssignment,
    pub true_tau: f64,
}

/// y_it = a_i + b_t + g_i'f_t + tau D_it + div * t * treated_i + x_it'beta + e_it
///
/// The first factor is a centred linear trend, the rest are random walks
/// scaled to unit increments. Units are ordered controls first with groups
/// `CO` and `TR`; dates are consecutive days from `start_date`.
pub fn generate_panel<T: Scalar>(spec: &PanelSpec) -> Result<GeneratedPanel<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = spec.n_co + spec.n_tr;
    let t = spec.t_pre + spec.t_post;
    let tf = t as f64;

    let mut factors = vec![vec![0.0; t]; spec.n_factors];
    for (k, f) in factors.iter_mut().enumerate() {
        if k == 0 {
            for (s, v) in f.iter_mut().enumerate() {
                *v = (s as f64 - (tf - 1.0) / 2.0) / tf;
            }
        } else {
            let mut level = 0.0;
            for v in f.iter_mut() {
                level += std_normal.sample(&mut rng) / tf.sqrt();
                *v = level;
            }
        }
    }
    let time_effect: Vec<f64> = (0..t).map(|_| 0.01 * std_normal.sample(&mut rng)).collect();
    let unit_effect: Vec<f64> = (0..n).map(|_| 0.01 * std_normal.sample(&mut rng)).collect();
    let loadings: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let shift = if i >= spec.n_co {
                spec.treated_loading_shift
            } else {
                0.0
            };
            (0..spec.n_factors)
                .map(|_| spec.factor_loading_scale * (shift + std_normal.sample(&mut rng)))
                .collect()
        })
        .collect();

    let student = StudentT::new(3.0).expect("df 3");
    let t3_scale = (1.0f64 / 3.0).sqrt();
    let mut noise = || match spec.noise {
        NoiseKind::Gaussian => spec.noise_sd * std_normal.sample(&mut rng),
        NoiseKind::StudentT3 => spec.noise_sd * t3_scale * student.sample(&mut rng),
    };
    let mut y = Matrix::zeros(n, t);
    for i in 0..n {
        let treated = i >= spec.n_co;
        for s in 0..t {
            let mut v = unit_effect[i] + time_effect[s];
            for (g, f) in loadings[i].iter().zip(&factors) {
                v += g * f[s];
            }
            if treated {
                v += spec.trend_divergence * s as f64;
                if s >= spec.t_pre {
                    v += spec.tau;
                }
            }
            y[(i, s)] = v + noise();
        }
    }

    let mut covs = Vec::new();
    if let Some(eff) = spec.covariates {
        let ln_vol = Matrix::from_fn(n, t, |_, _| 12.0 + 0.5 * std_normal.sample(&mut rng));
        let ln_cap = Matrix::from_fn(n, t, |_, _| 20.0 + 0.5 * std_normal.sample(&mut rng));
        for i in 0..n {
            for s in 0..t {
                y[(i, s)] += eff.beta_ln_vol * ln_vol[(i, s)] + eff.beta_ln_cap * ln_cap[(i, s)];
            }
        }
        covs.push((COV_LN_VOL, ln_vol));
        covs.push((COV_LN_CAP, ln_cap));
    }

    let cast = |m: &Matrix<f64>| Matrix::from_fn(n, t, |i, s| T::lit(m[(i, s)]));
    let units = (0..n)
        .map(|i| {
            if i < spec.n_co {
                format!("co{i:03}")
            } else {
                format!("tr{:03}", i - spec.n_co)
            }
        })
        .collect();
    let groups = (0..n)
        .map(|i| if i < spec.n_co { "CO" } else { "TR" }.to_string())
        .collect();
    let dates = (0..t)
        .map(|s| spec.start_date + Days::new(s as u64))
        .collect();
    let mut panel = Panel::new(units, groups, dates, cast(&y))?;
    for (name, m) in &covs {
        panel = panel.with_covariate(*name, cast(m))?;
    }
    let assignment = TreatmentAssignment::new(&panel, (spec.n_co..n).collect(), spec.t_pre)?;
    Ok(GeneratedPanel {
        panel,
        assignment,
        true_tau: spec.tau,
    })
}

/// Price records whose log returns reproduce the panel outcomes.
///
/// Prices start at 100 one day before the first panel date. Volume and
/// market cap come from the `ln_vol` / `ln_cap` covariates when present
/// (the pre-sample day repeats the first value), otherwise they are fixed
/// at 1e6 and 1e9.
pub fn export_price_records<T: Scalar>(panel: &Panel<T>) -> Vec<RawRecord<T>> {
    let t = panel.n_periods();
    let first = panel.dates()[0] - Days::new(1);
    let vol = panel.covariate(COV_LN_VOL);
    let cap = panel.covariate(COV_LN_CAP);
    let level = |m: Option<&Matrix<T>>, i: usize, s: usize, fallback: f64| match m {
        Some(m) => m[(i, s)].exp(),
        None => T::lit(fallback),
    };
    let mut out = Vec::with_capacity(panel.n_units() * (t + 1));
    for i in 0..panel.n_units() {
        let mut log_p = T::lit(100.0f64.ln());
        for s in 0..=t {
            let (date, k) = if s == 0 {
                (first, 0)
            } else {
                log_p = log_p + panel.outcomes()[(i, s - 1)];
                (panel.dates()[s - 1], s - 1)
            };
            out.push(RawRecord {
                date,
                asset_id: panel.units()[i].clone(),
                price: log_p.exp(),
                volume: level(vol, i, k, 1e6),
                market_cap: level(cap, i, k, 1e9),
                group: panel.groups()[i].clone(),
            });
        }
    }
    out.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
    out
}
