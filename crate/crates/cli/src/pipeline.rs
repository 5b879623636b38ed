//! Command implementations. Each returns a serializable report plus any
//! figure data; writing files is left to the caller.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use sdid_core::attention::{
    institutional_index, interaction_regression, read_news_csv, read_trends_csv, trends_delta,
    AttentionOptions, AttentionSeries, DeltaKind, NewsRecord, WaldTest,
};
use sdid_core::did::{
    event_window, parallel_trends_test, twfe_did, window_end, DidOptions, TreatmentAssignment,
    TrendTestOptions,
};
use sdid_core::panel_core::{
    build_group_panel, build_panel, descriptive_stats, read_price_csv, BuildOptions, BuildOutput,
    DroppedAsset, GroupSelection, Panel, RawRecord, StatsRow,
};
use sdid_core::sdid::{sdid_estimate, BootstrapOptions, SdidOptions, SolverReports};
use sdid_core::synthgen::{export_price_records, generate_panel, PanelSpec};
use sdid_core::{Error, ErrorKind};
use serde::Serialize;

use crate::config::{ModelPair, NewsMeasure, RunConfig, Window};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimatorKind {
    Did,
    Sdid,
}

/// What survived the balance and liquidity filters for one panel.
#[derive(Clone, Debug, Serialize)]
pub struct PanelSummary {
    pub panel: String,
    pub n_units: usize,
    pub n_periods: usize,
    pub n_treated: usize,
    pub n_control: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub dropped: Vec<DroppedAsset>,
    pub warnings: Vec<String>,
}

impl PanelSummary {
    fn new(name: String, b: &BuildOutput<f64>) -> Self {
        let dates = b.panel.dates();
        Self {
            panel: name,
            n_units: b.report.n_units,
            n_periods: b.report.n_periods,
            n_treated: b.n_treated,
            n_control: b.n_control,
            first_date: dates[0],
            last_date: *dates.last().expect("non-empty panel"),
            dropped: b.report.dropped.clone(),
            warnings: b.report.warnings.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DescribeReport {
    pub command: &'static str,
    pub liquidity_floor: f64,
    pub rows: Vec<StatsRow>,
    pub panels: Vec<PanelSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowResult {
    pub window: String,
    pub end_date: NaiveDate,
    pub t_pre: usize,
    pub t_post: usize,
    pub n_treated: usize,
    pub n_control: usize,
    pub tau: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_boot: Option<usize>,
    pub failed_replicates: usize,
    pub zeta: Option<f64>,
    pub solver: Option<SolverReports>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateRow {
    pub model: String,
    pub treated: String,
    pub control: String,
    pub covariates: Vec<String>,
    pub results: Vec<WindowResult>,
    /// Pre-treatment parallel-trends F-test (DID only).
    pub pt_f: Option<f64>,
    pub pt_pvalue: Option<f64>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub command: &'static str,
    pub estimator: EstimatorKind,
    pub treatment_date: NaiveDate,
    pub windows: Vec<String>,
    pub boot: Option<usize>,
    pub seed: u64,
    pub liquidity_floor: f64,
    pub uniform_weights: bool,
    pub rows: Vec<EstimateRow>,
    pub panels: Vec<PanelSummary>,
}

/// Plot data for one (row, window): group means and the fitted weights.
#[derive(Clone, Debug)]
pub struct TrendFigure {
    pub model: String,
    pub covariates: String,
    pub window: String,
    pub dates: Vec<NaiveDate>,
    pub t_pre: usize,
    pub treated_mean: Vec<f64>,
    pub control_mean: Vec<f64>,
    pub weighted_control_mean: Vec<f64>,
    pub control_units: Vec<String>,
    pub omega: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug)]
pub struct EstimateOutput {
    pub report: EstimateReport,
    pub figures: Vec<TrendFigure>,
    pub failures: Vec<(String, ErrorKind)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttentionRow {
    pub source: &'static str,
    pub model: String,
    pub ai_group: String,
    pub non_ai_group: String,
    pub term: String,
    pub obs: usize,
    pub alpha: f64,
    pub alpha_se: f64,
    pub beta: [f64; 4],
    pub beta_se: [f64; 4],
    pub wald: Vec<WaldTest>,
    pub adj_r2: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttentionReport {
    pub command: &'static str,
    pub launch_date: NaiveDate,
    pub delta: DeltaKind,
    pub fixed_effects: bool,
    pub rows: Vec<AttentionRow>,
    pub panels: Vec<PanelSummary>,
}

#[derive(Debug)]
pub struct AttentionOutput {
    pub report: AttentionReport,
    pub failures: Vec<(String, ErrorKind)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub command: &'static str,
    pub spec: PanelSpec,
    pub true_tau: f64,
    pub treatment_date: NaiveDate,
    pub n_units: usize,
    pub n_periods: usize,
    pub files: Vec<String>,
}

pub struct SimulateOutput {
    pub report: SimulateReport,
    pub records: Vec<RawRecord<f64>>,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn source_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |f| f.to_string_lossy().into_owned(),
    )
}

pub fn read_prices(cfg: &RunConfig) -> Result<Vec<RawRecord<f64>>, CliError> {
    let path = cfg
        .prices
        .as_deref()
        .ok_or_else(|| CliError::config("`prices` path is not set"))?;
    Ok(read_price_csv(open(path)?, &source_name(path))?)
}

fn build_options(cfg: &RunConfig) -> BuildOptions<f64> {
    BuildOptions {
        liquidity_floor: cfg.liquidity_floor,
        liquidity_rule: cfg.liquidity_rule,
    }
}

fn group_order(records: &[RawRecord<f64>]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.group) {
            out.push(r.group.clone());
        }
    }
    out
}

fn check_groups_present(records: &[RawRecord<f64>], groups: &[&str]) -> Result<(), CliError> {
    let present = group_order(records);
    for g in groups {
        if !present.iter().any(|p| p == g) {
            return Err(Error::EmptyGroup(g.to_string()).into());
        }
    }
    Ok(())
}

pub fn describe(cfg: &RunConfig) -> Result<DescribeReport, CliError> {
    let records = read_prices(cfg)?;
    let groups = if cfg.groups.is_empty() {
        group_order(&records)
    } else {
        cfg.groups.clone()
    };
    let refs: Vec<&str> = groups.iter().map(String::as_str).collect();
    check_groups_present(&records, &refs)?;
    let opts = build_options(cfg);
    let mut rows = Vec::with_capacity(groups.len());
    let mut panels = Vec::with_capacity(groups.len());
    for g in &groups {
        let built = build_group_panel(&records, g, &opts)?;
        rows.push(descriptive_stats(&built.panel, g)?);
        panels.push(PanelSummary::new(g.clone(), &built));
    }
    Ok(DescribeReport {
        command: "describe",
        liquidity_floor: cfg.liquidity_floor,
        rows,
        panels,
    })
}

/// Model rows in table order: every pair without covariates, then each
/// covariate pair crossed with each non-empty covariate set.
pub fn model_rows(cfg: &RunConfig) -> Vec<(ModelPair, Vec<String>)> {
    let mut rows = Vec::new();
    if cfg.covariate_sets.iter().any(Vec::is_empty) {
        rows.extend(cfg.models.iter().map(|m| (m.clone(), Vec::new())));
    }
    for m in &cfg.covariate_models {
        for set in cfg.covariate_sets.iter().filter(|s| !s.is_empty()) {
            rows.push((m.clone(), set.clone()));
        }
    }
    rows
}

struct ModelPanel {
    pair: ModelPair,
    built: BuildOutput<f64>,
    assignment: TreatmentAssignment,
}

fn model_panel(
    records: &[RawRecord<f64>],
    pair: &ModelPair,
    cfg: &RunConfig,
) -> Result<ModelPanel, CliError> {
    check_groups_present(records, &[&pair.treated, &pair.control])?;
    let built = build_panel(
        records,
        &GroupSelection {
            treated: pair.treated.clone(),
            control: pair.control.clone(),
        },
        &build_options(cfg),
    )?;
    let panel = &built.panel;
    let dates = panel.dates();
    let t_pre = match panel.period_index_on_or_after(cfg.treatment_date) {
        Some(t) if t > 0 => t,
        _ => {
            return Err(CliError::config(format!(
                "treatment date {} is not strictly inside the {pair} panel ({} to {})",
                cfg.treatment_date,
                dates[0],
                dates[dates.len() - 1]
            )))
        }
    };
    let treated: Vec<usize> = (built.n_control..panel.n_units()).collect();
    let assignment = TreatmentAssignment::new(panel, treated, t_pre)?;
    Ok(ModelPanel {
        pair: pair.clone(),
        built,
        assignment,
    })
}

fn model_panels(
    records: &[RawRecord<f64>],
    pairs: impl IntoIterator<Item = ModelPair>,
    cfg: &RunConfig,
) -> Result<Vec<ModelPanel>, CliError> {
    let mut out: Vec<ModelPanel> = Vec::new();
    for p in pairs {
        if !out.iter().any(|m| m.pair == p) {
            out.push(model_panel(records, &p, cfg)?);
        }
    }
    Ok(out)
}

fn windowed(
    panel: &Panel<f64>,
    assignment: &TreatmentAssignment,
    window: Window,
) -> sdid_core::Result<(Panel<f64>, TreatmentAssignment)> {
    match window {
        Window::Months(m) => event_window(panel, assignment, m),
        Window::Full => Ok((panel.clone(), assignment.clone())),
    }
}

fn unit_means(panel: &Panel<f64>, units: &[usize], weights: Option<&[f64]>) -> Vec<f64> {
    let y = panel.outcomes();
    (0..panel.n_periods())
        .map(|t| match weights {
            Some(w) => units.iter().zip(w).map(|(&i, &wi)| wi * y[(i, t)]).sum(),
            None => units.iter().map(|&i| y[(i, t)]).sum::<f64>() / units.len() as f64,
        })
        .collect()
}

fn trend_figure(
    row: &(String, String),
    window: &str,
    panel: &Panel<f64>,
    assignment: &TreatmentAssignment,
    omega: Vec<f64>,
    lambda: Vec<f64>,
) -> TrendFigure {
    let controls = assignment.controls();
    TrendFigure {
        model: row.0.clone(),
        covariates: row.1.clone(),
        window: window.to_string(),
        dates: panel.dates().to_vec(),
        t_pre: assignment.t_pre(),
        treated_mean: unit_means(panel, assignment.treated(), None),
        control_mean: unit_means(panel, &controls, None),
        weighted_control_mean: unit_means(panel, &controls, Some(&omega)),
        control_units: controls.iter().map(|&i| panel.units()[i].clone()).collect(),
        omega,
        lambda,
    }
}

fn covariate_label(covs: &[String]) -> String {
    if covs.is_empty() {
        "-".to_string()
    } else {
        covs.join(",")
    }
}

fn estimate_row(
    id: &str,
    mp: &ModelPanel,
    covs: &[String],
    cfg: &RunConfig,
    estimator: EstimatorKind,
) -> sdid_core::Result<(EstimateRow, Vec<TrendFigure>)> {
    let panel = &mp.built.panel;
    let cov_refs: Vec<&str> = covs.iter().map(String::as_str).collect();
    let key = (id.to_string(), covariate_label(covs));
    let mut results = Vec::with_capacity(cfg.windows.len());
    let mut figures = Vec::with_capacity(cfg.windows.len());
    let mut notes = Vec::new();
    for &w in &cfg.windows {
        let (sub, a) = windowed(panel, &mp.assignment, w)?;
        let label = w.label();
        let end_date = match w {
            Window::Months(m) => window_end(cfg.treatment_date, m),
            Window::Full => *sub.dates().last().expect("non-empty panel"),
        };
        let (n_co, t_pre) = (a.n_control(), a.t_pre());
        let mut result = WindowResult {
            window: label.clone(),
            end_date,
            t_pre,
            t_post: a.t_post(),
            n_treated: a.n_treated(),
            n_control: n_co,
            tau: f64::NAN,
            se: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            n_boot: None,
            failed_replicates: 0,
            zeta: None,
            solver: None,
        };
        let (omega, lambda) = match estimator {
            EstimatorKind::Did => {
                let est = twfe_did(
                    &sub,
                    &a,
                    &cov_refs,
                    &DidOptions {
                        cluster_mode: cfg.cluster,
                        ci: cfg.ci,
                    },
                )?;
                result.tau = est.tau_hat;
                result.se = est.se;
                result.ci_low = est.ci_low;
                result.ci_high = est.ci_high;
                (
                    vec![1.0 / n_co as f64; n_co],
                    vec![1.0 / t_pre as f64; t_pre],
                )
            }
            EstimatorKind::Sdid => {
                let opts = SdidOptions {
                    zeta_scaling: cfg.zeta_scaling,
                    covariates: covs.to_vec(),
                    covariate_timing: cfg.covariate_timing,
                    bootstrap: (cfg.boot >= 2).then_some(BootstrapOptions {
                        replications: cfg.boot,
                        seed: cfg.seed,
                    }),
                    uniform_weights: cfg.uniform_weights,
                    window: label.clone(),
                    ..Default::default()
                };
                let r = sdid_estimate(&sub, &a, &opts)?;
                result.tau = r.att.tau_hat;
                result.se = r.att.se;
                result.ci_low = r.att.ci_low;
                result.ci_high = r.att.ci_high;
                result.n_boot = r.att.n_boot;
                result.failed_replicates = r.failed_replicates;
                result.zeta = (!cfg.uniform_weights).then_some(r.weights.zeta);
                result.solver = r.solver_report;
                notes.extend(r.notes.iter().map(|n| format!("{label}: {n}")));
                (r.weights.omega, r.weights.lambda)
            }
        };
        figures.push(trend_figure(&key, &label, &sub, &a, omega, lambda));
        results.push(result);
    }
    let (pt_f, pt_pvalue) = if estimator == EstimatorKind::Did {
        let opts = TrendTestOptions {
            form: cfg.trend_test,
            cluster_mode: cfg.cluster,
        };
        match parallel_trends_test(panel, &mp.assignment, &opts) {
            Ok(f) => (Some(f.f_stat), Some(f.p)),
            Err(e) => {
                notes.push(format!("parallel trends test unavailable: {e}"));
                (None, None)
            }
        }
    } else {
        (None, None)
    };
    notes.dedup();
    Ok((
        EstimateRow {
            model: id.to_string(),
            treated: mp.pair.treated.clone(),
            control: mp.pair.control.clone(),
            covariates: covs.to_vec(),
            results,
            pt_f,
            pt_pvalue,
            notes,
            error: None,
        },
        figures,
    ))
}

pub fn estimate(cfg: &RunConfig, estimator: EstimatorKind) -> Result<EstimateOutput, CliError> {
    let records = read_prices(cfg)?;
    let rows = model_rows(cfg);
    if rows.is_empty() {
        return Err(CliError::config(
            "no model rows: `covariate_sets` has no usable entry",
        ));
    }
    let panels = model_panels(&records, rows.iter().map(|(p, _)| p.clone()), cfg)?;
    let outcomes: Vec<_> = rows
        .par_iter()
        .enumerate()
        .map(|(k, (pair, covs))| {
            let id = format!("({})", k + 1);
            let mp = panels
                .iter()
                .find(|m| &m.pair == pair)
                .expect("panel built for every pair");
            match estimate_row(&id, mp, covs, cfg, estimator) {
                Ok(ok) => (ok, None),
                Err(e) => {
                    let row = EstimateRow {
                        model: id.clone(),
                        treated: pair.treated.clone(),
                        control: pair.control.clone(),
                        covariates: covs.clone(),
                        results: Vec::new(),
                        pt_f: None,
                        pt_pvalue: None,
                        notes: Vec::new(),
                        error: Some(e.to_string()),
                    };
                    let failure = (
                        format!("{id} {pair} [{}]: {e}", covariate_label(covs)),
                        e.kind(),
                    );
                    ((row, Vec::new()), Some(failure))
                }
            }
        })
        .collect();
    let mut report_rows = Vec::with_capacity(outcomes.len());
    let mut figures = Vec::new();
    let mut failures = Vec::new();
    for ((row, figs), failure) in outcomes {
        report_rows.push(row);
        figures.extend(figs);
        failures.extend(failure);
    }
    Ok(EstimateOutput {
        report: EstimateReport {
            command: match estimator {
                EstimatorKind::Did => "did",
                EstimatorKind::Sdid => "sdid",
            },
            estimator,
            treatment_date: cfg.treatment_date,
            windows: cfg.windows.iter().map(Window::label).collect(),
            boot: (estimator == EstimatorKind::Sdid && cfg.boot >= 2).then_some(cfg.boot),
            seed: cfg.seed,
            liquidity_floor: cfg.liquidity_floor,
            uniform_weights: cfg.uniform_weights,
            rows: report_rows,
            panels: panels
                .iter()
                .map(|m| PanelSummary::new(m.pair.to_string(), &m.built))
                .collect(),
        },
        figures,
        failures,
    })
}

enum Measure {
    Trends(AttentionSeries<f64>),
    News(Vec<NewsRecord>),
}

fn attention_measures(cfg: &RunConfig) -> Result<Vec<(&'static str, String, Measure)>, CliError> {
    if cfg.trends.is_none() && cfg.news.is_none() {
        return Err(CliError::config(
            "attention needs a `trends` or `news` file",
        ));
    }
    let mut out = Vec::new();
    if let Some(path) = &cfg.trends {
        let mut series = read_trends_csv::<f64, _>(open(path)?, &source_name(path))?;
        let terms: Vec<String> = if cfg.terms.is_empty() {
            series.keys().cloned().collect()
        } else {
            cfg.terms.clone()
        };
        for term in terms {
            let s = series.remove(&term).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "search term `{term}` not found in {}",
                    source_name(path)
                ))
            })?;
            s.check_level_range()?;
            out.push(("trends", term, Measure::Trends(s)));
        }
    } else if !cfg.terms.is_empty() {
        return Err(CliError::config("`terms` given but no `trends` file"));
    }
    if let Some(path) = &cfg.news {
        let records = read_news_csv(open(path)?, &source_name(path))?;
        let topics: Vec<String> = if cfg.news_topics.is_empty() {
            let mut t: Vec<String> = Vec::new();
            for r in &records {
                if !t.contains(&r.topic) {
                    t.push(r.topic.clone());
                }
            }
            t
        } else {
            cfg.news_topics.clone()
        };
        for topic in topics {
            let rows: Vec<NewsRecord> = records
                .iter()
                .filter(|r| r.topic == topic)
                .cloned()
                .collect();
            if rows.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "news topic `{topic}` not found in {}",
                    source_name(path)
                ))
                .into());
            }
            out.push(("news", topic, Measure::News(rows)));
        }
    } else if !cfg.news_topics.is_empty() {
        return Err(CliError::config("`news_topics` given but no `news` file"));
    }
    Ok(out)
}

fn delta_series(measure: &Measure, cfg: &RunConfig) -> sdid_core::Result<AttentionSeries<f64>> {
    match measure {
        Measure::Trends(s) => trends_delta(s, cfg.delta),
        Measure::News(rows) => {
            let index = institutional_index::<f64>(rows, cfg.news_weighting)?;
            match cfg.news_measure {
                NewsMeasure::Delta => trends_delta(&index, DeltaKind::Arithmetic),
                NewsMeasure::Level => Ok(index),
            }
        }
    }
}

fn attention_row(
    source: &'static str,
    term: &str,
    measure: &Measure,
    mp: &ModelPanel,
    cfg: &RunConfig,
) -> sdid_core::Result<AttentionRow> {
    let panel = &mp.built.panel;
    let ai: Vec<bool> = panel
        .groups()
        .iter()
        .map(|g| *g == mp.pair.treated)
        .collect();
    let dg = delta_series(measure, cfg)?;
    let r = interaction_regression(
        panel,
        &dg,
        &ai,
        cfg.launch_date,
        &AttentionOptions {
            unit_fixed_effects: cfg.attention_fixed_effects,
        },
    )?;
    let se = r.robust_ses;
    Ok(AttentionRow {
        source,
        model: mp.pair.to_string(),
        ai_group: mp.pair.treated.clone(),
        non_ai_group: mp.pair.control.clone(),
        term: term.to_string(),
        obs: r.n_obs,
        alpha: r.alpha,
        alpha_se: se[0],
        beta: r.beta,
        beta_se: [se[1], se[2], se[3], se[4]],
        wald: r.wald,
        adj_r2: r.adj_r2,
        error: None,
    })
}

pub fn attention(cfg: &RunConfig) -> Result<AttentionOutput, CliError> {
    let records = read_prices(cfg)?;
    let measures = attention_measures(cfg)?;
    let opts = build_options(cfg);
    let mut panels: Vec<ModelPanel> = Vec::new();
    for pair in &cfg.attention_models {
        if panels.iter().any(|m| &m.pair == pair) {
            continue;
        }
        check_groups_present(&records, &[&pair.treated, &pair.control])?;
        let built = build_panel(
            &records,
            &GroupSelection {
                treated: pair.treated.clone(),
                control: pair.control.clone(),
            },
            &opts,
        )?;
        let n = built.panel.n_units();
        let assignment = TreatmentAssignment::new(&built.panel, (built.n_control..n).collect(), 1)?;
        panels.push(ModelPanel {
            pair: pair.clone(),
            built,
            assignment,
        });
    }
    let mut jobs: Vec<(&'static str, &str, &Measure, &ModelPanel)> = Vec::new();
    for src in ["trends", "news"] {
        for mp in &panels {
            for (s, term, m) in measures.iter().filter(|(s, _, _)| *s == src) {
                jobs.push((s, term, m, mp));
            }
        }
    }
    let outcomes: Vec<(AttentionRow, Option<(String, ErrorKind)>)> = jobs
        .par_iter()
        .map(
            |&(source, term, measure, mp)| match attention_row(source, term, measure, mp, cfg) {
                Ok(r) => (r, None),
                Err(e) => (
                    AttentionRow {
                        source,
                        model: mp.pair.to_string(),
                        ai_group: mp.pair.treated.clone(),
                        non_ai_group: mp.pair.control.clone(),
                        term: term.to_string(),
                        obs: 0,
                        alpha: f64::NAN,
                        alpha_se: f64::NAN,
                        beta: [f64::NAN; 4],
                        beta_se: [f64::NAN; 4],
                        wald: Vec::new(),
                        adj_r2: f64::NAN,
                        error: Some(e.to_string()),
                    },
                    Some((format!("{source} `{term}` on {}: {e}", mp.pair), e.kind())),
                ),
            },
        )
        .collect();
    let (rows, failures): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Ok(AttentionOutput {
        report: AttentionReport {
            command: "attention",
            launch_date: cfg.launch_date,
            delta: cfg.delta,
            fixed_effects: cfg.attention_fixed_effects,
            rows,
            panels: panels
                .iter()
                .map(|m| PanelSummary::new(m.pair.to_string(), &m.built))
                .collect(),
        },
        failures: failures.into_iter().flatten().collect(),
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateOutput, CliError> {
    let g = generate_panel::<f64>(&cfg.sim)?;
    let records = export_price_records(&g.panel);
    Ok(SimulateOutput {
        report: SimulateReport {
            command: "simulate",
            spec: cfg.sim.clone(),
            true_tau: g.true_tau,
            treatment_date: cfg.sim.treatment_date(),
            n_units: g.panel.n_units(),
            n_periods: g.panel.n_periods(),
            files: vec!["prices.csv".to_string(), "simulated.conf".to_string()],
        },
        records,
    })
}
