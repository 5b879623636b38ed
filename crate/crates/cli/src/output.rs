//! Report rendering and file emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::pipeline::{
    AttentionReport, DescribeReport, EstimateReport, EstimatorKind, SimulateReport, TrendFigure,
};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const FIG_TRENDS: &str = "fig_trends.csv";
pub const FIG_UNITS: &str = "fig_weights_units.csv";
pub const FIG_TIME: &str = "fig_weights_time.csv";
pub const FIG_SVG: &str = "fig_trends.svg";

pub fn write_file(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Fixed-width columns; the first `left` are left-aligned, the rest
/// right-aligned.
fn table(header: &[String], rows: &[Vec<String>], left: usize) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (k, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if k > 0 {
                s.push_str("  ");
            }
            if k < left {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "{c:>w$}");
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn stars_z(z: f64) -> &'static str {
    let z = z.abs();
    if z >= 2.575_829_3 {
        "***"
    } else if z >= 1.959_964 {
        "**"
    } else if z >= 1.644_853_6 {
        "*"
    } else {
        ""
    }
}

fn stars_p(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

fn num(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{x:.digits$}")
    } else {
        "NA".to_string()
    }
}

/// Estimate with significance stars and the standard error in parentheses.
fn est_se(b: f64, se: f64, digits: usize) -> String {
    if se.is_finite() && se > 0.0 {
        format!(
            "{}{} ({})",
            num(b, digits),
            stars_z(b / se),
            num(se, digits)
        )
    } else {
        format!("{} ({})", num(b, digits), num(se, digits))
    }
}

fn thousands(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (k, ch) in s.chars().enumerate() {
        if k > 0 && (s.len() - k).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// `ln_vol` -> `ln(vol)`.
fn pretty_covariate(name: &str) -> String {
    match name.strip_prefix("ln_") {
        Some(rest) => format!("ln({rest})"),
        None => name.to_string(),
    }
}

pub fn covariates_cell(covs: &[String]) -> String {
    if covs.is_empty() {
        "-".to_string()
    } else {
        covs.iter()
            .map(|c| pretty_covariate(c))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

fn opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "NA".to_string(), |v| num(v, digits))
}

pub fn describe_text(r: &DescribeReport) -> String {
    let header: Vec<String> = [
        "Group", "Obs", "N", "Mean", "SD", "Min", "Max", "Skew", "JB",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|s| {
            let jb = match (s.jb_stat, s.jb_p) {
                (Some(st), Some(p)) => format!("{}{}", num(st, 2), stars_p(p)),
                _ => "degenerate".to_string(),
            };
            vec![
                s.group.clone(),
                thousands(s.obs),
                s.n_assets.to_string(),
                num(s.mean, 4),
                num(s.sd, 3),
                num(s.min, 3),
                num(s.max, 3),
                opt(s.skew, 3),
                jb,
            ]
        })
        .collect();
    let mut out = String::from("Descriptive statistics for log returns\n\n");
    out.push_str(&table(&header, &rows, 1));
    out.push_str("\nJB: Jarque-Bera statistic; *, **, *** reject normality at 10%, 5%, 1%.\n");
    out
}

/// `0-2m` -> `ATT (0 to 2 Months)`.
fn att_heading(label: &str) -> String {
    match label.strip_prefix("0-").and_then(|m| m.strip_suffix('m')) {
        Some("1") => "ATT (0 to 1 Month)".to_string(),
        Some(m) => format!("ATT (0 to {m} Months)"),
        None => format!("ATT ({label})"),
    }
}

pub fn estimate_text(r: &EstimateReport) -> String {
    let mut header: Vec<String> = ["Model", "AI Category", "Controls", "Covariates"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for w in &r.windows {
        header.push(att_heading(w));
    }
    let did = r.estimator == EstimatorKind::Did;
    if did {
        header.push("Parallel Trends".to_string());
    }
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![
                row.model.clone(),
                row.treated.clone(),
                row.control.clone(),
                covariates_cell(&row.covariates),
            ];
            for k in 0..r.windows.len() {
                cells.push(match row.results.get(k) {
                    Some(w) => est_se(w.tau, w.se, 5),
                    None => "failed".to_string(),
                });
            }
            if did {
                cells.push(
                    row.pt_pvalue
                        .map_or_else(|| "NA".to_string(), |p| format!("[{p:.5}]")),
                );
            }
            cells
        })
        .collect();
    let title = if did {
        "DID estimation results for returns"
    } else {
        "SDID estimation results for returns"
    };
    let mut out = format!("{title}\n\n");
    out.push_str(&table(&header, &rows, 4));
    out.push('\n');
    let _ = writeln!(out, "Treatment date: {}", r.treatment_date);
    if did {
        out.push_str("Unit-clustered standard errors in parentheses; parallel-trends F-test p-values in brackets.\n");
    } else {
        match r.boot {
            Some(b) => {
                let _ = writeln!(
                    out,
                    "Standard errors in parentheses from {b} bootstrap replications (seed {}).",
                    r.seed
                );
            }
            None => out.push_str("No bootstrap requested; standard errors are NA.\n"),
        }
    }
    out.push_str("*, **, *** indicate significance at the 10%, 5% and 1% levels.\n");
    for row in &r.rows {
        if let Some(e) = &row.error {
            let _ = writeln!(out, "{}: FAILED: {e}", row.model);
        }
        for n in &row.notes {
            let _ = writeln!(out, "{}: {n}", row.model);
        }
    }
    out
}

pub fn attention_text(r: &AttentionReport) -> String {
    let mut header: Vec<String> = ["Search Term", "Obs.", "α", "β1", "β2", "β3", "β4"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for (a, b) in sdid_core::attention::WALD_PAIRS {
        header.push(format!("[β{}=β{}]", a + 1, b + 1));
    }
    header.push("Adj. R2".to_string());
    let mut out = String::from("Response of returns to attention changes\n");
    let mut panel_no = 0u8;
    let mut k = 0;
    while k < r.rows.len() {
        let (source, model) = (r.rows[k].source, r.rows[k].model.clone());
        let end = r.rows[k..]
            .iter()
            .position(|x| x.source != source || x.model != model)
            .map_or(r.rows.len(), |p| k + p);
        let who = if source == "trends" {
            "search volume"
        } else {
            "news index"
        };
        let _ = write!(
            out,
            "\nPanel {}: {} vs {} ({who})\n\n",
            (b'A' + panel_no) as char,
            r.rows[k].ai_group,
            r.rows[k].non_ai_group
        );
        let rows: Vec<Vec<String>> = r.rows[k..end]
            .iter()
            .map(|row| {
                let mut cells = vec![
                    format!("\"{}\"", row.term),
                    thousands(row.obs),
                    est_se(row.alpha, row.alpha_se, 4),
                ];
                for j in 0..4 {
                    cells.push(est_se(row.beta[j], row.beta_se[j], 4));
                }
                for w in &row.wald {
                    cells.push(format!("[{:.2}]{}", w.p, stars_p(w.p)));
                }
                if row.wald.is_empty() {
                    cells.extend(std::iter::repeat_n("NA".to_string(), 4));
                }
                cells.push(num(row.adj_r2, 2));
                cells
            })
            .collect();
        out.push_str(&table(&header, &rows, 1));
        panel_no += 1;
        k = end;
    }
    out.push_str(
        "\nWhite robust standard errors in parentheses; Wald F-test p-values in brackets.\n",
    );
    out.push_str("*, **, *** indicate significance at the 10%, 5% and 1% levels.\n");
    for row in r.rows.iter().filter(|x| x.error.is_some()) {
        let _ = writeln!(
            out,
            "{} `{}` on {}: FAILED: {}",
            row.source,
            row.term,
            row.model,
            row.error.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn simulate_text(r: &SimulateReport) -> String {
    format!(
        "Simulated panel: {} units x {} periods, true ATT {}, treatment date {}\nFiles: {}\n",
        r.n_units,
        r.n_periods,
        r.true_tau,
        r.treatment_date,
        r.files.join(", ")
    )
}

/// Config that runs the estimators on a simulated `prices.csv`.
pub fn simulated_config(r: &SimulateReport) -> String {
    let mut s = String::from("# written by `sdid simulate`\n");
    s.push_str("prices = prices.csv\ntreated_group = TR\ncontrol_group = CO\n");
    let _ = writeln!(s, "treatment_date = {}", r.treatment_date);
    s.push_str("windows = full\nliquidity_floor = 0\n");
    if r.spec.covariates.is_some() {
        s.push_str("covariate_sets = none; ln_vol,ln_cap\n");
    }
    s
}

fn csv_bytes(
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::config(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::config(format!("csv: {e}")))
}

pub fn trends_csv(figs: &[TrendFigure]) -> Result<Vec<u8>, CliError> {
    let rows = figs.iter().flat_map(|f| {
        (0..f.dates.len()).map(move |t| {
            vec![
                f.model.clone(),
                f.covariates.clone(),
                f.window.clone(),
                f.dates[t].to_string(),
                f.treated_mean[t].to_string(),
                f.control_mean[t].to_string(),
                f.weighted_control_mean[t].to_string(),
                u8::from(t >= f.t_pre).to_string(),
            ]
        })
    });
    csv_bytes(
        &[
            "model",
            "covariates",
            "window",
            "date",
            "treated_mean",
            "control_mean",
            "weighted_control_mean",
            "post",
        ],
        rows,
    )
}

pub fn unit_weights_csv(figs: &[TrendFigure]) -> Result<Vec<u8>, CliError> {
    let rows = figs.iter().flat_map(|f| {
        f.control_units.iter().zip(&f.omega).map(move |(u, w)| {
            vec![
                f.model.clone(),
                f.covariates.clone(),
                f.window.clone(),
                u.clone(),
                w.to_string(),
            ]
        })
    });
    csv_bytes(&["model", "covariates", "window", "unit", "omega"], rows)
}

pub fn time_weights_csv(figs: &[TrendFigure]) -> Result<Vec<u8>, CliError> {
    let rows = figs.iter().flat_map(|f| {
        f.dates[..f.t_pre].iter().zip(&f.lambda).map(move |(d, l)| {
            vec![
                f.model.clone(),
                f.covariates.clone(),
                f.window.clone(),
                d.to_string(),
                l.to_string(),
            ]
        })
    });
    csv_bytes(&["model", "covariates", "window", "date", "lambda"], rows)
}

/// Treated mean against the weighted control mean with a dashed line at
/// the first treated period.
pub fn trends_svg(f: &TrendFigure) -> String {
    let (w, h, pad) = (800.0_f64, 400.0_f64, 40.0_f64);
    let n = f.dates.len();
    let all = f
        .treated_mean
        .iter()
        .chain(&f.weighted_control_mean)
        .copied()
        .filter(|v| v.is_finite());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if lo < hi {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    };
    let x = |t: usize| pad + (w - 2.0 * pad) * t as f64 / (n.max(2) - 1) as f64;
    let y = |v: f64| h - pad - (h - 2.0 * pad) * (v - lo) / (hi - lo);
    let line = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .map(|(t, &v)| format!("{:.2},{:.2}", x(t), y(v)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{} {} ({})</text>"#,
        f.model, f.covariates, f.window
    );
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        line(&f.treated_mean)
    );
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="gray" stroke-width="1.5" points="{}"/>"#,
        line(&f.weighted_control_mean)
    );
    if f.t_pre < n {
        let xt = x(f.t_pre);
        let _ = writeln!(
            s,
            r#"<line x1="{xt:.2}" y1="{pad}" x2="{xt:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
            h - pad
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{:.0}" font-family="sans-serif" font-size="12">{}</text>"#,
        h - 12.0,
        f.dates.first().map(|d| d.to_string()).unwrap_or_default()
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
        w - pad,
        h - 12.0,
        f.dates.last().map(|d| d.to_string()).unwrap_or_default()
    );
    s.push_str("</svg>\n");
    s
}
