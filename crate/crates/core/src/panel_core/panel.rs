use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::Range;

use chrono::NaiveDate;
use serde::Serialize;

use super::records::RawRecord;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::Scalar;

pub const COV_LN_VOL: &str = "ln_vol";
pub const COV_LN_CAP: &str = "ln_cap";

/// Strictly balanced unit-by-period panel of outcomes with optional named
/// covariates of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Panel<T> {
    units: Vec<String>,
    groups: Vec<String>,
    dates: Vec<NaiveDate>,
    outcomes: Matrix<T>,
    covariates: BTreeMap<String, Matrix<T>>,
}

impl<T: Scalar> Panel<T> {
    pub fn new(
        units: Vec<String>,
        groups: Vec<String>,
        dates: Vec<NaiveDate>,
        outcomes: Matrix<T>,
    ) -> Result<Self> {
        if units.is_empty() || dates.is_empty() {
            return Err(Error::invalid(
                "panel needs at least one unit and one period",
            ));
        }
        if outcomes.shape() != (units.len(), dates.len()) {
            return Err(Error::invalid(format!(
                "outcome matrix is {:?}, expected {}x{}",
                outcomes.shape(),
                units.len(),
                dates.len()
            )));
        }
        if groups.len() != units.len() {
            return Err(Error::invalid("one group label per unit required"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("panel dates must be strictly increasing"));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = units.iter().find(|u| !seen.insert(u.as_str())) {
            return Err(Error::invalid(format!("duplicate unit `{dup}`")));
        }
        if !outcomes.is_finite() {
            return Err(Error::invalid("panel outcomes contain non-finite values"));
        }
        Ok(Self {
            units,
            groups,
            dates,
            outcomes,
            covariates: BTreeMap::new(),
        })
    }

    pub fn with_covariate(mut self, name: impl Into<String>, values: Matrix<T>) -> Result<Self> {
        let name = name.into();
        if values.shape() != self.outcomes.shape() {
            return Err(Error::invalid(format!(
                "covariate `{name}` has shape {:?}, outcomes are {:?}",
                values.shape(),
                self.outcomes.shape()
            )));
        }
        if !values.is_finite() {
            return Err(Error::invalid(format!(
                "covariate `{name}` has non-finite values"
            )));
        }
        self.covariates.insert(name, values);
        Ok(self)
    }

    /// Same layout, new outcomes.
    pub fn with_outcomes(&self, outcomes: Matrix<T>) -> Result<Self> {
        if outcomes.shape() != self.outcomes.shape() || !outcomes.is_finite() {
            return Err(Error::invalid(
                "replacement outcomes must match the panel shape",
            ));
        }
        Ok(Self {
            outcomes,
            ..self.clone()
        })
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn outcomes(&self) -> &Matrix<T> {
        &self.outcomes
    }

    pub fn covariate(&self, name: &str) -> Option<&Matrix<T>> {
        self.covariates.get(name)
    }

    pub fn covariate_names(&self) -> impl Iterator<Item = &str> {
        self.covariates.keys().map(String::as_str)
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn n_periods(&self) -> usize {
        self.dates.len()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u == id)
    }

    pub fn units_in_group(&self, label: &str) -> Vec<usize> {
        (0..self.units.len())
            .filter(|&i| self.groups[i] == label)
            .collect()
    }

    /// Index of the first period on or after `date`.
    pub fn period_index_on_or_after(&self, date: NaiveDate) -> Option<usize> {
        self.dates.iter().position(|&d| d >= date)
    }

    /// Sub-panel of the given units, in the given order. Unit ids must be
    /// distinct.
    pub fn select_units(&self, idx: &[usize]) -> Result<Self> {
        let mut out = Self::new(
            idx.iter().map(|&i| self.units[i].clone()).collect(),
            idx.iter().map(|&i| self.groups[i].clone()).collect(),
            self.dates.clone(),
            self.outcomes.select_rows(idx),
        )?;
        for (name, m) in &self.covariates {
            out.covariates.insert(name.clone(), m.select_rows(idx));
        }
        Ok(out)
    }

    pub fn slice_periods(&self, range: Range<usize>) -> Result<Self> {
        let cols: Vec<usize> = range.clone().collect();
        let mut out = Self::new(
            self.units.clone(),
            self.groups.clone(),
            self.dates[range].to_vec(),
            self.outcomes.select_columns(&cols),
        )?;
        for (name, m) in &self.covariates {
            out.covariates.insert(name.clone(), m.select_columns(&cols));
        }
        Ok(out)
    }
}

/// Prices of one asset over consecutive dates.
#[derive(Clone, Debug)]
pub struct PriceSeries<'a, T> {
    pub asset_id: &'a str,
    pub dates: &'a [NaiveDate],
    pub prices: &'a [T],
}

/// r_t = ln(p_t / p_{t-1}) for each consecutive pair.
pub fn compute_log_returns<T: Scalar>(series: &PriceSeries<'_, T>) -> Result<Vec<T>> {
    let prices = series.prices;
    if prices.len() < 2 {
        return Err(Error::invalid(format!(
            "asset `{}` needs at least two prices for a return",
            series.asset_id
        )));
    }
    if let Some(i) = prices
        .iter()
        .position(|&p| !(p > T::zero()) || !p.is_finite())
    {
        return Err(Error::NonPositivePrice {
            date: series
                .dates
                .get(i)
                .map_or_else(|| format!("index {i}"), |d| d.to_string()),
            asset_id: series.asset_id.to_string(),
            price: prices[i].as_f64(),
        });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LiquidityRule {
    /// Drop if volume falls below the floor on any day.
    #[default]
    AnyDay,
    /// Drop if the window-average volume is below the floor.
    Average,
}

#[derive(Clone, Debug)]
pub struct GroupSelection {
    pub treated: String,
    pub control: String,
}

#[derive(Clone, Debug)]
pub struct BuildOptions<T> {
    pub liquidity_floor: T,
    pub liquidity_rule: LiquidityRule,
}

impl<T: Scalar> Default for BuildOptions<T> {
    fn default() -> Self {
        Self {
            liquidity_floor: T::lit(20_000.0),
            liquidity_rule: LiquidityRule::AnyDay,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DroppedAsset {
    pub asset_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub dropped: Vec<DroppedAsset>,
    pub n_units: usize,
    pub n_periods: usize,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct BuildOutput<T> {
    /// Control units first, then treated units.
    pub panel: Panel<T>,
    pub report: BalanceReport,
    pub n_control: usize,
    pub n_treated: usize,
}

impl<T: Scalar> BuildOutput<T> {
    pub fn retained_assets(&self) -> &[String] {
        self.panel.units()
    }
}

struct AssetRows<'a, T> {
    id: &'a str,
    group: &'a str,
    by_date: HashMap<NaiveDate, &'a RawRecord<T>>,
}

/// Assemble a strictly balanced return panel for one treated and one control
/// group.
///
/// Assets missing any day of the common window are dropped, as are assets
/// failing the liquidity floor. When the two groups trade on different
/// calendars (daily crypto vs. working-day indices) the panel uses the
/// intersection of their dates and records a warning.
pub fn build_panel<T: Scalar>(
    records: &[RawRecord<T>],
    groups: &GroupSelection,
    options: &BuildOptions<T>,
) -> Result<BuildOutput<T>> {
    let mut assets: Vec<AssetRows<'_, T>> = Vec::new();
    let mut position: HashMap<&str, usize> = HashMap::new();
    for r in records {
        if r.group != groups.treated && r.group != groups.control {
            continue;
        }
        if !(r.price > T::zero()) {
            return Err(Error::NonPositivePrice {
                date: r.date.to_string(),
                asset_id: r.asset_id.clone(),
                price: r.price.as_f64(),
            });
        }
        let idx = *position.entry(r.asset_id.as_str()).or_insert_with(|| {
            assets.push(AssetRows {
                id: &r.asset_id,
                group: &r.group,
                by_date: HashMap::new(),
            });
            assets.len() - 1
        });
        let asset = &mut assets[idx];
        if asset.group != r.group {
            return Err(Error::invalid(format!(
                "asset `{}` appears in both `{}` and `{}`",
                r.asset_id, asset.group, r.group
            )));
        }
        if asset.by_date.insert(r.date, r).is_some() {
            return Err(Error::invalid(format!(
                "duplicate observation for `{}` on {}",
                r.asset_id, r.date
            )));
        }
    }

    let group_dates = |label: &str| -> BTreeSet<NaiveDate> {
        assets
            .iter()
            .filter(|a| a.group == label)
            .flat_map(|a| a.by_date.keys().copied())
            .collect()
    };
    let treated_dates = group_dates(&groups.treated);
    let control_dates = group_dates(&groups.control);
    if treated_dates.is_empty() {
        return Err(Error::EmptyGroup(groups.treated.clone()));
    }
    if control_dates.is_empty() {
        return Err(Error::EmptyGroup(groups.control.clone()));
    }
    let mut warnings = Vec::new();
    let common: Vec<NaiveDate> = if treated_dates == control_dates {
        treated_dates.into_iter().collect()
    } else {
        let inter: Vec<NaiveDate> = treated_dates
            .intersection(&control_dates)
            .copied()
            .collect();
        let msg = format!(
            "groups `{}` and `{}` have different calendars; using {} common dates",
            groups.treated,
            groups.control,
            inter.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
        inter
    };
    if common.len() < 2 {
        return Err(Error::invalid("fewer than two common dates across groups"));
    }

    let mut dropped = Vec::new();
    let mut kept: Vec<(&AssetRows<'_, T>, Vec<&RawRecord<T>>)> = Vec::new();
    for asset in &assets {
        let rows: Vec<&RawRecord<T>> = common
            .iter()
            .filter_map(|d| asset.by_date.get(d).copied())
            .collect();
        if rows.len() < common.len() {
            dropped.push(DroppedAsset {
                asset_id: asset.id.to_string(),
                reason: format!(
                    "missing {} of {} days",
                    common.len() - rows.len(),
                    common.len()
                ),
            });
            continue;
        }
        let min_vol = rows.iter().map(|r| r.volume).fold(T::infinity(), T::min);
        let avg_vol = rows.iter().map(|r| r.volume).sum::<T>() / T::from_usize_lossy(rows.len());
        let failing = match options.liquidity_rule {
            LiquidityRule::AnyDay => (min_vol < options.liquidity_floor).then_some(min_vol),
            LiquidityRule::Average => (avg_vol < options.liquidity_floor).then_some(avg_vol),
        };
        if let Some(v) = failing {
            dropped.push(DroppedAsset {
                asset_id: asset.id.to_string(),
                reason: format!(
                    "volume {v} below liquidity floor {}",
                    options.liquidity_floor
                ),
            });
            continue;
        }
        // Only the return dates feed the log covariates.
        if rows[1..]
            .iter()
            .any(|r| !(r.volume > T::zero()) || !(r.market_cap > T::zero()))
        {
            dropped.push(DroppedAsset {
                asset_id: asset.id.to_string(),
                reason: "zero volume or market cap (log covariate undefined)".to_string(),
            });
            continue;
        }
        kept.push((asset, rows));
    }

    let controls: Vec<_> = kept
        .iter()
        .filter(|(a, _)| a.group == groups.control)
        .collect();
    let treated: Vec<_> = kept
        .iter()
        .filter(|(a, _)| a.group == groups.treated)
        .collect();
    if controls.is_empty() {
        return Err(Error::EmptyGroup(groups.control.clone()));
    }
    if treated.is_empty() {
        return Err(Error::EmptyGroup(groups.treated.clone()));
    }

    let single = groups.treated == groups.control;
    let ordered: Vec<_> = if single {
        controls.iter().collect()
    } else {
        controls.iter().chain(treated.iter()).collect()
    };
    let n = ordered.len();
    let t = common.len() - 1;
    let mut outcomes = Matrix::zeros(n, t);
    let mut ln_vol = Matrix::zeros(n, t);
    let mut ln_cap = Matrix::zeros(n, t);
    let mut units = Vec::with_capacity(n);
    let mut unit_groups = Vec::with_capacity(n);
    for (i, (asset, rows)) in ordered.iter().enumerate() {
        let prices: Vec<T> = rows.iter().map(|r| r.price).collect();
        let returns = compute_log_returns(&PriceSeries {
            asset_id: asset.id,
            dates: &common,
            prices: &prices,
        })?;
        outcomes.row_mut(i).copy_from_slice(&returns);
        for (j, r) in rows[1..].iter().enumerate() {
            ln_vol[(i, j)] = r.volume.ln();
            ln_cap[(i, j)] = r.market_cap.ln();
        }
        units.push(asset.id.to_string());
        unit_groups.push(asset.group.to_string());
    }
    let panel = Panel::new(units, unit_groups, common[1..].to_vec(), outcomes)?
        .with_covariate(COV_LN_VOL, ln_vol)?
        .with_covariate(COV_LN_CAP, ln_cap)?;
    Ok(BuildOutput {
        report: BalanceReport {
            dropped,
            n_units: n,
            n_periods: t,
            warnings,
        },
        n_control: controls.len(),
        n_treated: if single { 0 } else { treated.len() },
        panel,
    })
}

/// Balanced panel of a single group on its own calendar.
pub fn build_group_panel<T: Scalar>(
    records: &[RawRecord<T>],
    group: &str,
    options: &BuildOptions<T>,
) -> Result<BuildOutput<T>> {
    build_panel(
        records,
        &GroupSelection {
            treated: group.to_string(),
            control: group.to_string(),
        },
        options,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2022, 10, d).unwrap()
    }

    fn rec(d: u32, id: &str, price: f64, volume: f64, group: &str) -> RawRecord<f64> {
        RawRecord {
            date: day(d),
            asset_id: id.to_string(),
            price,
            volume,
            market_cap: 1e9,
            group: group.to_string(),
        }
    }

    fn groups() -> GroupSelection {
        GroupSelection {
            treated: "AI".into(),
            control: "CO".into(),
        }
    }

    fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
        compute_log_returns(&PriceSeries {
            asset_id: "X",
            dates: &[],
            prices,
        })
    }

    #[test]
    fn log_return_examples() {
        assert_eq!(log_returns(&[100.0, 100.0, 100.0]).unwrap(), vec![0.0, 0.0]);
        // ln(1.1) from an independent high-precision evaluation.
        assert!((log_returns(&[100.0, 110.0]).unwrap()[0] - 0.0953101798043249).abs() < 1e-6);
        assert!((log_returns(&[100.0, 50.0]).unwrap()[0] + std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn log_returns_reject_bad_prices() {
        let dates = [day(1), day(2)];
        let err = compute_log_returns(&PriceSeries {
            asset_id: "FET",
            dates: &dates,
            prices: &[1.0, -2.0],
        })
        .unwrap_err();
        assert!(err.to_string().contains("FET") && err.to_string().contains("2022-10-02"));
        assert!(log_returns(&[1.0]).is_err());
    }

    #[test]
    fn drops_asset_with_missing_day() {
        let mut recs = Vec::new();
        for d in 1..=4 {
            recs.push(rec(d, "A", 1.0 + d as f64, 5e4, "AI"));
            recs.push(rec(d, "B", 2.0, 5e4, "CO"));
            if d != 3 {
                recs.push(rec(d, "C", 3.0, 5e4, "CO"));
            }
        }
        let out = build_panel(&recs, &groups(), &BuildOptions::default()).unwrap();
        assert_eq!(out.panel.units(), ["B", "A"]);
        assert_eq!(out.report.dropped.len(), 1);
        assert_eq!(out.report.dropped[0].asset_id, "C");
        assert_eq!(out.report.n_periods, 3);
        assert_eq!(out.panel.outcomes().shape(), (2, 3));
    }

    #[test]
    fn liquidity_floor_is_strict_any_day() {
        let mut recs = Vec::new();
        for d in 1..=3 {
            recs.push(rec(d, "A", 1.0, 5e4, "AI"));
            recs.push(rec(d, "B", 1.0, 5e4, "CO"));
            recs.push(rec(d, "C", 1.0, if d == 2 { 19_999.0 } else { 1e6 }, "CO"));
        }
        let out = build_panel(&recs, &groups(), &BuildOptions::default()).unwrap();
        assert_eq!(out.panel.units(), ["B", "A"]);
        assert!(out.report.dropped[0].reason.contains("liquidity"));

        let avg = BuildOptions {
            liquidity_floor: 20_000.0,
            liquidity_rule: LiquidityRule::Average,
        };
        let out = build_panel(&recs, &groups(), &avg).unwrap();
        assert_eq!(out.panel.n_units(), 3);
    }

    #[test]
    fn complete_liquid_panel_is_unchanged_and_idempotent() {
        let mut recs = Vec::new();
        for d in 1..=5 {
            recs.push(rec(d, "A", 1.0 + 0.1 * d as f64, 5e4, "AI"));
            recs.push(rec(d, "B", 2.0 - 0.1 * d as f64, 5e4, "CO"));
            recs.push(rec(d, "C", 3.0, 5e4, "CO"));
        }
        let first = build_panel(&recs, &groups(), &BuildOptions::default()).unwrap();
        assert_eq!(first.panel.n_units(), 3);
        assert!(first.report.dropped.is_empty());
        let kept: Vec<RawRecord<f64>> = recs
            .iter()
            .filter(|r| first.retained_assets().contains(&r.asset_id))
            .cloned()
            .collect();
        let second = build_panel(&kept, &groups(), &BuildOptions::default()).unwrap();
        assert_eq!(first.panel, second.panel);
    }

    #[test]
    fn empty_group_after_filtering_is_rejected() {
        let recs = vec![
            rec(1, "A", 1.0, 5e4, "AI"),
            rec(2, "A", 1.0, 5e4, "AI"),
            rec(1, "B", 1.0, 10.0, "CO"),
            rec(2, "B", 1.0, 10.0, "CO"),
        ];
        match build_panel(&recs, &groups(), &BuildOptions::default()) {
            Err(Error::EmptyGroup(g)) => assert_eq!(g, "CO"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn differing_calendars_use_intersection() {
        let mut recs = Vec::new();
        for d in 1..=6 {
            recs.push(rec(d, "A", 1.0 + d as f64, 5e4, "AI"));
            if d % 3 != 0 {
                recs.push(rec(d, "IDX", 10.0 + d as f64, 5e4, "CO"));
            }
        }
        let out = build_panel(&recs, &groups(), &BuildOptions::default()).unwrap();
        assert_eq!(out.report.warnings.len(), 1);
        assert_eq!(out.panel.dates(), [day(2), day(4), day(5)]);
        // Return over the skipped day spans both days.
        assert!((out.panel.outcomes()[(1, 1)] - (5.0f64 / 3.0).ln()).abs() < 1e-12);
    }
}
