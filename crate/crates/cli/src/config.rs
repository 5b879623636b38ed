//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths in a
//! config file resolve against the file's directory; relative paths given
//! on the command line resolve against the working directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sdid_core::attention::{DeltaKind, SentimentWeighting};
use sdid_core::did::{CiMethod, ClusterMode, TrendTestForm};
use sdid_core::panel_core::LiquidityRule;
use sdid_core::sdid::CovariateTiming;
use sdid_core::synthgen::{CovariateEffects, NoiseKind, PanelSpec};

use crate::error::CliError;

const PATH_KEYS: [&str; 4] = ["prices", "trends", "news", "out"];

const KEYS: &[&str] = &[
    "prices",
    "trends",
    "news",
    "out",
    "treated_group",
    "control_group",
    "models",
    "covariate_models",
    "covariate_sets",
    "groups",
    "treatment_date",
    "windows",
    "liquidity_floor",
    "liquidity_rule",
    "boot",
    "seed",
    "threads",
    "uniform_weights",
    "zeta_scaling",
    "covariate_timing",
    "cluster",
    "ci",
    "trend_test",
    "terms",
    "news_topics",
    "attention_models",
    "launch_date",
    "attention_fixed_effects",
    "delta",
    "news_measure",
    "news_weighting",
    "sim.n_co",
    "sim.n_tr",
    "sim.t_pre",
    "sim.t_post",
    "sim.n_factors",
    "sim.factor_loading_scale",
    "sim.treated_loading_shift",
    "sim.noise_sd",
    "sim.noise",
    "sim.tau",
    "sim.trend_divergence",
    "sim.seed",
    "sim.start_date",
    "sim.beta_ln_vol",
    "sim.beta_ln_cap",
];

/// Raw key-value pairs before typing. Later insertions win.
#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str, base_dir: &Path, source: &str) -> Result<Self, CliError> {
        let mut map = Self::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("{source}, line {}: expected `key = value`", k + 1))
            })?;
            let key = key.trim();
            let mut value = value.trim().to_string();
            if PATH_KEYS.contains(&key) && !value.is_empty() && Path::new(&value).is_relative() {
                value = base_dir.join(&value).to_string_lossy().into_owned();
            }
            map.set(key, value)
                .map_err(|e| CliError::config(format!("{source}, line {}: {e}", k + 1)))?;
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), String> {
        if !KEYS.contains(&key) {
            return Err(format!("unknown key `{key}`"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Apply a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("override `{pair}` is not key=value")))?;
        self.set(k.trim(), v.trim()).map_err(CliError::config)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .filter(|v| !v.is_empty())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config(format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(CliError::config(format!(
                    "`{key}`: expected true/false, got `{v}`"
                ))),
            })
            .transpose()
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                options
                    .iter()
                    .find(|(name, _)| name.eq_ignore_ascii_case(v))
                    .map(|&(_, t)| t)
                    .ok_or_else(|| {
                        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                        CliError::config(format!(
                            "`{key}`: expected one of {}, got `{v}`",
                            names.join("|")
                        ))
                    })
            })
            .transpose()
    }
}

/// Treated group paired with its control group.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelPair {
    pub treated: String,
    pub control: String,
}

impl fmt::Display for ModelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.treated, self.control)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// Through the end of the given number of calendar months after the
    /// treatment month.
    Months(u32),
    /// Every post-treatment period in the panel.
    Full,
}

impl Window {
    pub fn label(&self) -> String {
        match self {
            Window::Months(m) => sdid_core::did::window_label(*m),
            Window::Full => "full".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewsMeasure {
    /// Day-on-day change of the index.
    Delta,
    Level,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub prices: Option<PathBuf>,
    pub trends: Option<PathBuf>,
    pub news: Option<PathBuf>,
    pub out: PathBuf,
    pub models: Vec<ModelPair>,
    pub covariate_models: Vec<ModelPair>,
    /// Each entry is one covariate set; the empty set means no covariates.
    pub covariate_sets: Vec<Vec<String>>,
    /// Groups for `describe`; empty means every group in file order.
    pub groups: Vec<String>,
    pub treatment_date: NaiveDate,
    pub windows: Vec<Window>,
    pub liquidity_floor: f64,
    pub liquidity_rule: LiquidityRule,
    pub boot: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub uniform_weights: bool,
    pub zeta_scaling: Option<f64>,
    pub covariate_timing: CovariateTiming,
    pub cluster: ClusterMode,
    pub ci: CiMethod,
    pub trend_test: TrendTestForm,
    pub terms: Vec<String>,
    pub news_topics: Vec<String>,
    pub attention_models: Vec<ModelPair>,
    pub launch_date: NaiveDate,
    pub attention_fixed_effects: bool,
    pub delta: DeltaKind,
    pub news_measure: NewsMeasure,
    pub news_weighting: SentimentWeighting,
    pub sim: PanelSpec,
}

fn list(v: &str, sep: char) -> Vec<String> {
    v.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn pairs(key: &str, v: &str) -> Result<Vec<ModelPair>, CliError> {
    list(v, ',')
        .iter()
        .map(|p| {
            let (t, c) = p.split_once(':').ok_or_else(|| {
                CliError::config(format!("`{key}`: `{p}` is not treated:control"))
            })?;
            let (t, c) = (t.trim(), c.trim());
            if t.is_empty() || c.is_empty() || t == c {
                return Err(CliError::config(format!("`{key}`: invalid pair `{p}`")));
            }
            Ok(ModelPair {
                treated: t.to_string(),
                control: c.to_string(),
            })
        })
        .collect()
}

fn date(key: &str, v: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(v, "%Y-%m-%d")
        .map_err(|e| CliError::config(format!("`{key}`: `{v}` is not a YYYY-MM-DD date: {e}")))
}

/// `1,2` or `full`.
pub fn parse_windows(v: &str) -> Result<Vec<Window>, CliError> {
    let out = list(v, ',')
        .iter()
        .map(|w| {
            if w.eq_ignore_ascii_case("full") {
                return Ok(Window::Full);
            }
            match w.parse::<u32>() {
                Ok(m) if m > 0 => Ok(Window::Months(m)),
                _ => Err(CliError::config(format!(
                    "`windows`: `{w}` is not a positive month count"
                ))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(CliError::config("`windows` is empty"));
    }
    Ok(out)
}

/// `none; ln_vol,ln_cap; ln_vol`.
pub fn parse_covariate_sets(v: &str) -> Vec<Vec<String>> {
    v.split(';')
        .map(|set| {
            let set = set.trim();
            if set.eq_ignore_ascii_case("none") || set == "-" {
                Vec::new()
            } else {
                list(set, ',')
            }
        })
        .collect()
}

impl RunConfig {
    pub fn from_map(m: &ConfigMap) -> Result<Self, CliError> {
        let treated = m.get("treated_group").unwrap_or("GAI").to_string();
        let control = m.get("control_group").unwrap_or("GCKO").to_string();
        let models = match m.get("models") {
            Some(v) => pairs("models", v)?,
            None => pairs(
                "treated_group/control_group",
                &format!("{treated}:{control}"),
            )?,
        };
        if models.is_empty() {
            return Err(CliError::config("`models` is empty"));
        }
        let covariate_models = match m.get("covariate_models") {
            Some(v) => pairs("covariate_models", v)?,
            None => models.clone(),
        };
        let attention_models = match m.get("attention_models") {
            Some(v) => pairs("attention_models", v)?,
            None => models.clone(),
        };
        let covariate_sets = m
            .get("covariate_sets")
            .map(parse_covariate_sets)
            .unwrap_or_else(|| vec![Vec::new()]);
        let treatment_date = match m.get("treatment_date") {
            Some(v) => date("treatment_date", v)?,
            None => NaiveDate::from_ymd_opt(2022, 11, 30).expect("valid date"),
        };
        let launch_date = match m.get("launch_date") {
            Some(v) => date("launch_date", v)?,
            None => treatment_date,
        };
        let boot = m.parsed::<usize>("boot")?.unwrap_or(500);
        if boot == 1 {
            return Err(CliError::config(
                "`boot` must be 0 (no inference) or at least 2",
            ));
        }
        let liquidity_floor = m.parsed::<f64>("liquidity_floor")?.unwrap_or(20_000.0);
        if liquidity_floor.is_nan() || liquidity_floor < 0.0 {
            return Err(CliError::config("`liquidity_floor` must be non-negative"));
        }
        let threads = m.parsed::<usize>("threads")?;
        if threads == Some(0) {
            return Err(CliError::config("`threads` must be at least 1"));
        }

        let mut sim = PanelSpec::default();
        macro_rules! sim_field {
            ($key:literal, $field:ident, $ty:ty) => {
                if let Some(v) = m.parsed::<$ty>($key)? {
                    sim.$field = v;
                }
            };
        }
        sim_field!("sim.n_co", n_co, usize);
        sim_field!("sim.n_tr", n_tr, usize);
        sim_field!("sim.t_pre", t_pre, usize);
        sim_field!("sim.t_post", t_post, usize);
        sim_field!("sim.n_factors", n_factors, usize);
        sim_field!("sim.factor_loading_scale", factor_loading_scale, f64);
        sim_field!("sim.treated_loading_shift", treated_loading_shift, f64);
        sim_field!("sim.noise_sd", noise_sd, f64);
        sim_field!("sim.tau", tau, f64);
        sim_field!("sim.trend_divergence", trend_divergence, f64);
        sim_field!("sim.seed", seed, u64);
        if let Some(v) = m.get("sim.start_date") {
            sim.start_date = date("sim.start_date", v)?;
        }
        if let Some(n) = m.choice(
            "sim.noise",
            &[
                ("gaussian", NoiseKind::Gaussian),
                ("student_t3", NoiseKind::StudentT3),
            ],
        )? {
            sim.noise = n;
        }
        let bv = m.parsed::<f64>("sim.beta_ln_vol")?;
        let bc = m.parsed::<f64>("sim.beta_ln_cap")?;
        if bv.is_some() || bc.is_some() {
            sim.covariates = Some(CovariateEffects {
                beta_ln_vol: bv.unwrap_or(0.0),
                beta_ln_cap: bc.unwrap_or(0.0),
            });
        }

        Ok(Self {
            prices: m.get("prices").map(PathBuf::from),
            trends: m.get("trends").map(PathBuf::from),
            news: m.get("news").map(PathBuf::from),
            out: PathBuf::from(m.get("out").unwrap_or("out")),
            models,
            covariate_models,
            covariate_sets,
            groups: m.get("groups").map(|v| list(v, ',')).unwrap_or_default(),
            treatment_date,
            windows: parse_windows(m.get("windows").unwrap_or("1,2"))?,
            liquidity_floor,
            liquidity_rule: m
                .choice(
                    "liquidity_rule",
                    &[
                        ("any_day", LiquidityRule::AnyDay),
                        ("average", LiquidityRule::Average),
                    ],
                )?
                .unwrap_or_default(),
            boot,
            seed: m.parsed::<u64>("seed")?.unwrap_or(0),
            threads,
            uniform_weights: m.bool("uniform_weights")?.unwrap_or(false),
            zeta_scaling: m.parsed::<f64>("zeta_scaling")?,
            covariate_timing: m
                .choice(
                    "covariate_timing",
                    &[
                        ("once", CovariateTiming::Once),
                        ("per_replicate", CovariateTiming::PerReplicate),
                    ],
                )?
                .unwrap_or_default(),
            cluster: m
                .choice(
                    "cluster",
                    &[("cr1", ClusterMode::Cr1), ("cr2", ClusterMode::Cr2)],
                )?
                .unwrap_or_default(),
            ci: m
                .choice(
                    "ci",
                    &[
                        ("normal", CiMethod::Normal),
                        ("bell_mccaffrey_t", CiMethod::BellMcCaffreyT),
                    ],
                )?
                .unwrap_or_default(),
            trend_test: m
                .choice(
                    "trend_test",
                    &[
                        ("linear", TrendTestForm::LinearTrend),
                        ("event_study", TrendTestForm::EventStudy),
                    ],
                )?
                .unwrap_or_default(),
            terms: m.get("terms").map(|v| list(v, ',')).unwrap_or_default(),
            news_topics: m
                .get("news_topics")
                .map(|v| list(v, ','))
                .unwrap_or_default(),
            attention_models,
            launch_date,
            attention_fixed_effects: m.bool("attention_fixed_effects")?.unwrap_or(false),
            delta: m
                .choice(
                    "delta",
                    &[
                        ("arithmetic", DeltaKind::Arithmetic),
                        ("percent", DeltaKind::Percent),
                    ],
                )?
                .unwrap_or_default(),
            news_measure: m
                .choice(
                    "news_measure",
                    &[("delta", NewsMeasure::Delta), ("level", NewsMeasure::Level)],
                )?
                .unwrap_or(NewsMeasure::Delta),
            news_weighting: m
                .choice(
                    "news_weighting",
                    &[
                        ("polarity", SentimentWeighting::Polarity),
                        ("count_only", SentimentWeighting::CountOnly),
                    ],
                )?
                .unwrap_or_default(),
            sim,
        })
    }
}
