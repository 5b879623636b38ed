use chrono::NaiveDate;
use serde::Serialize;

use super::series::AttentionSeries;
use crate::did::FTestResult;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Qr};
use crate::panel_core::Panel;
use crate::regression::{ols, Design};
use crate::stats::f_sf;
use crate::Scalar;

pub const SLOPE_NAMES: [&str; 4] = ["beta1", "beta2", "beta3", "beta4"];
const CELL_LABELS: [&str; 4] = [
    "beta1 (pre-launch, non-AI)",
    "beta2 (pre-launch, AI)",
    "beta3 (post-launch, non-AI)",
    "beta4 (post-launch, AI)",
];
/// Equality restrictions reported alongside every regression, in table order.
pub const WALD_PAIRS: [(usize, usize); 4] = [(0, 1), (2, 3), (0, 2), (1, 3)];

#[derive(Clone, Copy, Debug, Default)]
pub struct AttentionOptions {
    /// Replace the common intercept with unit fixed effects (alpha is then
    /// the first unit's effect).
    pub unit_fixed_effects: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WaldTest {
    pub label: String,
    pub f_stat: f64,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttentionRegressionResult<T> {
    pub alpha: T,
    pub beta: [T; 4],
    /// Robust covariance of (alpha, beta1..beta4).
    #[serde(skip)]
    pub vcov: Matrix<T>,
    pub robust_ses: [T; 5],
    pub wald: Vec<WaldTest>,
    pub adj_r2: T,
    pub n_obs: usize,
    pub n_params: usize,
}

impl<T: Scalar> AttentionRegressionResult<T> {
    pub fn wald_p(&self, label: &str) -> Option<f64> {
        self.wald.iter().find(|w| w.label == label).map(|w| w.p)
    }
}

pub fn wald_label(a: usize, b: usize) -> String {
    format!("{}={}", SLOPE_NAMES[a], SLOPE_NAMES[b])
}

/// Heteroskedasticity-consistent (HC0) sandwich
/// (X'X)^-1 (sum x_i x_i' e_i^2) (X'X)^-1.
pub fn white_vcov<T: Scalar>(x: &Matrix<T>, residuals: &[T]) -> Result<Matrix<T>> {
    let qr = Qr::new(x).map_err(|d| Error::RankDeficient {
        column: format!("column {}", d.column),
    })?;
    let all: Vec<usize> = (0..x.ncols()).collect();
    Ok(white_vcov_subset(&qr, x, residuals, &all))
}

/// Rows/columns `coefs` of the HC0 sandwich.
pub(crate) fn white_vcov_subset<T: Scalar>(
    qr: &Qr<T>,
    x: &Matrix<T>,
    residuals: &[T],
    coefs: &[usize],
) -> Matrix<T> {
    let bread = qr.xtx_inverse();
    let a = bread.select_rows(coefs);
    let k = coefs.len();
    let mut v = Matrix::zeros(k, k);
    let mut u = vec![T::zero(); k];
    for (r, &e) in residuals.iter().enumerate() {
        if e == T::zero() {
            continue;
        }
        let row = x.row(r);
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = crate::linalg::dot(a.row(j), row);
        }
        let e2 = e * e;
        for i in 0..k {
            for j in i..k {
                v[(i, j)] = v[(i, j)] + e2 * u[i] * u[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            v[(i, j)] = v[(j, i)];
        }
    }
    v
}

/// F(1, df) test of b_a = b_b given their covariance.
pub fn wald_equality<T: Scalar>(
    b: &[T],
    vcov: &Matrix<T>,
    a: usize,
    c: usize,
    df_den: usize,
) -> FTestResult {
    let diff = b[a] - b[c];
    let var = vcov[(a, a)] + vcov[(c, c)] - T::lit(2.0) * vcov[(a, c)];
    let scale = b[a].abs().max(b[c].abs()).max(T::one());
    let (f_stat, p) = if var > T::zero() {
        let f = (diff * diff / var).as_f64();
        (f, f_sf(f, 1.0, df_den as f64))
    } else if diff.abs() <= T::lit(1e3) * T::epsilon() * scale {
        (0.0, 1.0)
    } else {
        (f64::INFINITY, 0.0)
    };
    FTestResult {
        f_stat,
        df_num: 1,
        df_den,
        p,
    }
}

/// Wald test of beta_a = beta_b (labels `beta1`..`beta4`).
pub fn wald_equality_test<T: Scalar>(
    result: &AttentionRegressionResult<T>,
    a: &str,
    b: &str,
) -> Result<FTestResult> {
    let idx = |l: &str| {
        SLOPE_NAMES
            .iter()
            .position(|n| *n == l)
            .ok_or_else(|| Error::invalid(format!("unknown coefficient `{l}`")))
    };
    let (ia, ib) = (idx(a)?, idx(b)?);
    let mut coef = vec![result.alpha];
    coef.extend_from_slice(&result.beta);
    Ok(wald_equality(
        &coef,
        &result.vcov,
        ia + 1,
        ib + 1,
        result.n_obs - result.n_params,
    ))
}

/// Which of the four mutually exclusive cells a unit-date belongs to.
pub fn cell_index(post_launch: bool, ai: bool) -> usize {
    usize::from(post_launch) * 2 + usize::from(ai)
}

/// Pooled least squares of returns on an intercept and the four
/// launch x AI interaction slopes on the attention change, with White
/// standard errors. Panel dates without a `delta_g` value are skipped.
pub fn interaction_regression<T: Scalar>(
    panel: &Panel<T>,
    delta_g: &AttentionSeries<T>,
    ai_flags: &[bool],
    launch_date: NaiveDate,
    options: &AttentionOptions,
) -> Result<AttentionRegressionResult<T>> {
    let n = panel.n_units();
    if ai_flags.len() != n {
        return Err(Error::invalid(format!(
            "{} AI flags for {n} panel units",
            ai_flags.len()
        )));
    }
    let periods: Vec<(usize, T)> = panel
        .dates()
        .iter()
        .enumerate()
        .filter_map(|(t, &d)| delta_g.value_on(d).map(|v| (t, v)))
        .collect();
    if periods.is_empty() {
        return Err(Error::invalid(format!(
            "attention series `{}` shares no dates with the panel",
            delta_g.term
        )));
    }
    let n_fe = if options.unit_fixed_effects { n - 1 } else { 0 };
    let p = 1 + n_fe + 4;
    let rows = n * periods.len();
    let mut x = Matrix::zeros(rows, p);
    let mut y = Vec::with_capacity(rows);
    let mut cell_nonzero = [false; 4];
    let mut r = 0;
    for i in 0..n {
        for &(t, dg) in &periods {
            let row = x.row_mut(r);
            row[0] = T::one();
            if options.unit_fixed_effects && i > 0 {
                row[i] = T::one();
            }
            let cell = cell_index(panel.dates()[t] >= launch_date, ai_flags[i]);
            row[1 + n_fe + cell] = dg;
            cell_nonzero[cell] |= dg != T::zero();
            y.push(panel.outcomes()[(i, t)]);
            r += 1;
        }
    }
    if let Some(c) = cell_nonzero.iter().position(|ok| !ok) {
        return Err(Error::Unidentified(format!(
            "{}: no observations with a non-zero attention change",
            CELL_LABELS[c]
        )));
    }
    let mut names = vec!["alpha".to_string()];
    names.extend(
        panel.units()[1..]
            .iter()
            .take(n_fe)
            .map(|u| format!("unit[{u}]")),
    );
    names.extend(SLOPE_NAMES.iter().map(|s| s.to_string()));
    let design = Design::new(x, names);
    let fit = ols(&design, &y)?;
    if fit.n_obs() <= p {
        return Err(Error::Unidentified(
            "attention regression with no residual degrees of freedom".into(),
        ));
    }
    let coefs: Vec<usize> = std::iter::once(0).chain(1 + n_fe..p).collect();
    let vcov = white_vcov_subset(&fit.qr, &design.matrix, &fit.residuals, &coefs);
    let b: Vec<T> = coefs.iter().map(|&c| fit.coefficients[c]).collect();
    let df = fit.n_obs() - p;
    let wald = WALD_PAIRS
        .iter()
        .map(|&(a, c)| {
            let t = wald_equality(&b, &vcov, a + 1, c + 1, df);
            WaldTest {
                label: wald_label(a, c),
                f_stat: t.f_stat,
                p: t.p,
            }
        })
        .collect();
    let robust_ses = std::array::from_fn(|k| vcov[(k, k)].max(T::zero()).sqrt());
    let n_obs = fit.n_obs();
    let ybar = y.iter().copied().sum::<T>() / T::from_usize_lossy(n_obs);
    let tss = y.iter().map(|&v| (v - ybar) * (v - ybar)).sum::<T>();
    let adj_r2 = if tss > T::zero() {
        T::one() - (fit.rss() / T::from_usize_lossy(df)) / (tss / T::from_usize_lossy(n_obs - 1))
    } else {
        T::nan()
    };
    Ok(AttentionRegressionResult {
        alpha: b[0],
        beta: [b[1], b[2], b[3], b[4]],
        vcov,
        robust_ses,
        wald,
        adj_r2,
        n_obs,
        n_params: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricEigen;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn white_zero_residuals() {
        let x = Matrix::<f64>::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let v = white_vcov(&x, &[0.0; 5]).unwrap();
        assert_eq!(v, Matrix::zeros(2, 2));
    }

    #[test]
    fn white_single_regressor_hand_formula() {
        let xs = [0.5, -1.0, 2.0, 1.5];
        let es = [0.1, 0.3, -0.2, 0.05];
        let x = Matrix::from_fn(4, 1, |i, _| xs[i]);
        let v = white_vcov(&x, &es).unwrap();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let meat: f64 = xs.iter().zip(&es).map(|(x, e)| x * x * e * e).sum();
        assert!((v[(0, 0)] - meat / (sxx * sxx)).abs() < 1e-12);
    }

    #[test]
    fn white_rank_deficient_rejected() {
        let x = Matrix::<f64>::from_fn(4, 2, |i, _| i as f64);
        assert!(white_vcov(&x, &[0.1; 4]).is_err());
    }

    #[test]
    fn white_close_to_classical_under_homoskedasticity() {
        let mut ratio_sum = 0.0;
        let seeds = 100;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 10_000;
            let x = Matrix::from_fn(n, 2, |_, j| {
                if j == 0 {
                    1.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            });
            let e: Vec<f64> = (0..n)
                .map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng))
                .collect();
            let y: Vec<f64> = (0..n).map(|i| 0.5 + 2.0 * x[(i, 1)] + e[i]).collect();
            let fit = ols(&Design::new(x.clone(), vec!["c".into(), "x".into()]), &y).unwrap();
            let robust = white_vcov(&x, &fit.residuals).unwrap();
            let classical = fit.classical_vcov();
            ratio_sum += (robust[(1, 1)] / classical[(1, 1)]).sqrt();
        }
        let mean_ratio = ratio_sum / seeds as f64;
        assert!((mean_ratio - 1.0).abs() < 0.05, "{mean_ratio}");
    }

    proptest! {
        #[test]
        fn white_is_symmetric_psd(vals in proptest::collection::vec(-3.0f64..3.0, 30), res in proptest::collection::vec(-1.0f64..1.0, 10)) {
            let x = Matrix::from_row_major(10, 3, vals);
            if let Ok(v) = white_vcov(&x, &res) {
                let scale = (0..3).map(|i| v[(i, i)].abs()).fold(1e-300, f64::max);
                prop_assert!(v.max_abs_diff(&v.transpose()) <= 1e-12 * scale);
                let eig = SymmetricEigen::new(&v);
                prop_assert!(eig.values.iter().all(|&l| l >= -1e-9 * scale));
            }
        }
    }

    fn attention_panel(
        seed: u64,
        betas: [f64; 4],
        noise: f64,
    ) -> (Panel<f64>, AttentionSeries<f64>, Vec<bool>, NaiveDate) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, t) = (6, 40);
        let d0 = NaiveDate::from_ymd_opt(2022, 10, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..t).map(|k| d0 + chrono::Days::new(k as u64)).collect();
        let launch = dates[20];
        let dg: Vec<f64> = (0..t).map(|_| rng.random_range(-5.0..5.0)).collect();
        let ai: Vec<bool> = (0..n).map(|i| i % 2 == 1).collect();
        let y = Matrix::from_fn(n, t, |i, s| {
            0.03 + betas[cell_index(s >= 20, ai[i])] * dg[s] + noise * rng.random_range(-1.0..1.0)
        });
        let panel = Panel::new(
            (0..n).map(|i| format!("a{i}")).collect(),
            vec!["X".to_string(); n],
            dates.clone(),
            y,
        )
        .unwrap();
        (
            panel,
            AttentionSeries::new("AI", dates, dg).unwrap(),
            ai,
            launch,
        )
    }

    #[test]
    fn exact_data_recovers_coefficients() {
        let betas = [-0.04, 0.01, 0.0, 0.09];
        let (p, dg, ai, launch) = attention_panel(1, betas, 0.0);
        let r = interaction_regression(&p, &dg, &ai, launch, &AttentionOptions::default()).unwrap();
        assert!((r.alpha - 0.03).abs() < 1e-12);
        for k in 0..4 {
            assert!((r.beta[k] - betas[k]).abs() < 1e-12);
        }
        assert_eq!(r.n_obs, 240);
        assert_eq!(r.wald.len(), 4);
        assert_eq!(r.wald[1].label, "beta3=beta4");
    }

    #[test]
    fn all_zero_delta_is_unidentified() {
        let (p, dg, ai, launch) = attention_panel(2, [0.0; 4], 0.01);
        let zero =
            AttentionSeries::new("AI", dg.dates.clone(), vec![0.0; dg.values.len()]).unwrap();
        match interaction_regression(&p, &zero, &ai, launch, &AttentionOptions::default()) {
            Err(Error::Unidentified(msg)) => assert!(msg.contains("beta1")),
            other => panic!("unexpected {other:?}"),
        }
        // No AI units: beta2 and beta4 cells are empty.
        assert!(
            interaction_regression(&p, &dg, &[false; 6], launch, &AttentionOptions::default())
                .is_err()
        );
    }

    #[test]
    fn swapping_ai_flags_permutes_estimates() {
        let (p, dg, ai, launch) = attention_panel(3, [0.02, -0.01, 0.05, 0.08], 0.05);
        let a = interaction_regression(&p, &dg, &ai, launch, &AttentionOptions::default()).unwrap();
        let flipped: Vec<bool> = ai.iter().map(|f| !f).collect();
        let b = interaction_regression(&p, &dg, &flipped, launch, &AttentionOptions::default())
            .unwrap();
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            assert!((a.beta[i] - b.beta[j]).abs() < 1e-12);
        }
        assert!((a.alpha - b.alpha).abs() < 1e-12);
    }

    #[test]
    fn wald_tests() {
        let (p, dg, ai, launch) = attention_panel(4, [0.0, 0.0, 0.0, 0.5], 0.01);
        let r = interaction_regression(&p, &dg, &ai, launch, &AttentionOptions::default()).unwrap();
        assert!(wald_equality_test(&r, "beta3", "beta4").unwrap().p < 1e-6);
        assert!(wald_equality_test(&r, "beta1", "beta9").is_err());
        let w = wald_equality_test(&r, "beta2", "beta2").unwrap();
        assert_eq!(w.p, 1.0);
    }

    #[test]
    fn duplicated_regressor_gives_equal_slopes() {
        // Each AI unit duplicates a non-AI unit's returns, so both pre-launch
        // cells see the same regressor and response.
        let (p, dg, ai, launch) = attention_panel(5, [0.03, 0.03, 0.0, 0.1], 0.05);
        let y = p.outcomes();
        let paired = Matrix::from_fn(y.nrows(), y.ncols(), |i, t| y[(i - i % 2, t)]);
        let p = p.with_outcomes(paired).unwrap();
        let r = interaction_regression(&p, &dg, &ai, launch, &AttentionOptions::default()).unwrap();
        assert!(r.wald_p("beta1=beta2").unwrap() > 0.99);
        assert!(r.wald_p("beta3=beta4").unwrap() > 0.99);
    }

    #[test]
    fn unit_fixed_effects_variant() {
        let (p, dg, ai, launch) = attention_panel(6, [0.0, 0.01, 0.02, 0.09], 0.01);
        let r = interaction_regression(
            &p,
            &dg,
            &ai,
            launch,
            &AttentionOptions {
                unit_fixed_effects: true,
            },
        )
        .unwrap();
        assert_eq!(r.n_params, 1 + 5 + 4);
        assert!((r.beta[3] - 0.09).abs() < 0.01);
    }
}
