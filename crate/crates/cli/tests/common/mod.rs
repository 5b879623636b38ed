#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command as Process;

use chrono::{Days, NaiveDate};
use clap::Parser;
use sdid_cli::{run, Cli, CliError, RunOutput};
use sdid_core::panel_core::{write_price_csv, RawRecord};
use sdid_core::synthgen::{export_price_records, generate_panel, PanelSpec};

pub fn run_args(args: &[&str]) -> Result<RunOutput, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("sdid").chain(args.iter().copied()))
        .expect("arguments parse");
    run(&cli.command)
}

/// Runs the built binary and returns (exit code, stderr).
pub fn run_bin(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_sdid"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    std::fs::create_dir_all(dir).expect("create fixture dir");
    let p = dir.join(name);
    std::fs::write(&p, text).expect("write fixture");
    p
}

pub fn write_prices(dir: &Path, name: &str, records: &[RawRecord<f64>]) -> PathBuf {
    let mut buf = Vec::new();
    write_price_csv(&mut buf, records).expect("serialize prices");
    std::fs::create_dir_all(dir).expect("create fixture dir");
    let p = dir.join(name);
    std::fs::write(&p, buf).expect("write prices");
    p
}

/// Price records of a generated panel with the `CO` / `TR` groups renamed
/// and asset ids prefixed so that several panels can share one file.
pub fn relabeled(
    spec: &PanelSpec,
    control: &str,
    treated: &str,
    prefix: &str,
) -> Vec<RawRecord<f64>> {
    let g = generate_panel::<f64>(spec).expect("generate panel");
    export_price_records(&g.panel)
        .into_iter()
        .map(|mut r| {
            r.group = if r.group == "TR" { treated } else { control }.to_string();
            r.asset_id = format!("{prefix}{}", r.asset_id);
            r
        })
        .collect()
}

pub fn sort_records(records: &mut [RawRecord<f64>]) {
    records.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
}

/// `date,term,volume` rows for each term over `days` consecutive dates.
pub fn trends_csv(
    start: NaiveDate,
    days: usize,
    terms: &[&str],
    volume: impl Fn(usize, usize) -> u32,
) -> String {
    let mut s = String::from("date,term,volume\n");
    for (k, term) in terms.iter().enumerate() {
        for d in 0..days {
            s.push_str(&format!(
                "{},{term},{}\n",
                start + Days::new(d as u64),
                volume(k, d)
            ));
        }
    }
    s
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("read json")).expect("valid json")
}
