#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sdid_core::did::TreatmentAssignment;
use sdid_core::linalg::Matrix;
use sdid_core::Panel;

pub fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 10, 1).unwrap()
}

/// Unit and period effects plus unit-specific trends and noise, with an
/// effect of `tau` on treated post periods. Controls first.
pub fn random_panel(
    seed: u64,
    n_co: usize,
    n_tr: usize,
    t_pre: usize,
    t_post: usize,
    tau: f64,
) -> (Panel, TreatmentAssignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    let n = n_co + n_tr;
    let t = t_pre + t_post;
    let unit: Vec<f64> = (0..n).map(|_| 0.02 * z.sample(&mut rng)).collect();
    let slope: Vec<f64> = (0..n).map(|_| 0.001 * z.sample(&mut rng)).collect();
    let time: Vec<f64> = (0..t).map(|_| 0.03 * z.sample(&mut rng)).collect();
    let y = Matrix::from_fn(n, t, |i, s| {
        let d = if i >= n_co && s >= t_pre { tau } else { 0.0 };
        unit[i] + time[s] + slope[i] * s as f64 + d + 0.01 * z.sample(&mut rng)
    });
    let panel = Panel::new(
        (0..n).map(|i| format!("u{i:02}")).collect(),
        (0..n)
            .map(|i| if i < n_co { "CO" } else { "TR" }.to_string())
            .collect(),
        (0..t).map(|s| start() + Days::new(s as u64)).collect(),
        y,
    )
    .unwrap();
    let a = TreatmentAssignment::new(&panel, (n_co..n).collect(), t_pre).unwrap();
    (panel, a)
}

pub fn add_to_outcomes(panel: &Panel, f: impl Fn(usize, usize) -> f64) -> Panel {
    let y = panel.outcomes();
    let (n, t) = y.shape();
    panel
        .with_outcomes(Matrix::from_fn(n, t, |i, s| y[(i, s)] + f(i, s)))
        .unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
