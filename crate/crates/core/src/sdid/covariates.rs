use super::block::BlockData;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Qr};
use crate::panel_core::Panel;
use crate::Scalar;

/// Pooled least squares of outcomes on an intercept and the named
/// covariates; outcomes are replaced by R - sum_j beta_j X_j. Covariates are
/// kept on the returned panel.
pub fn residualize_covariates<T: Scalar>(
    panel: &Panel<T>,
    names: &[&str],
) -> Result<(Panel<T>, Vec<T>)> {
    if names.is_empty() {
        return Ok((panel.clone(), Vec::new()));
    }
    let mut covs = Vec::with_capacity(names.len());
    for &name in names {
        let m = panel
            .covariate(name)
            .ok_or_else(|| Error::invalid(format!("unknown covariate `{name}`")))?;
        covs.push((name.to_string(), m.clone()));
    }
    let (y, beta) = residualize(panel.outcomes(), &covs)?;
    Ok((panel.with_outcomes(y)?, beta))
}

pub(crate) fn residualize_block<T: Scalar>(block: &BlockData<T>) -> Result<BlockData<T>> {
    let (y, _) = residualize(&block.y, &block.covariates)?;
    Ok(BlockData {
        y,
        n_co: block.n_co,
        n_tr: block.n_tr,
        t_pre: block.t_pre,
        covariates: Vec::new(),
    })
}

fn residualize<T: Scalar>(
    y: &Matrix<T>,
    covs: &[(String, Matrix<T>)],
) -> Result<(Matrix<T>, Vec<T>)> {
    if covs.is_empty() {
        return Ok((y.clone(), Vec::new()));
    }
    let (n, t) = y.shape();
    let k = covs.len();
    let x = Matrix::from_fn(n * t, k + 1, |r, c| {
        if c == 0 {
            T::one()
        } else {
            covs[c - 1].1.as_slice()[r]
        }
    });
    let qr = Qr::new(&x).map_err(|def| collinear_pair(&x, def.column, covs))?;
    let coef = qr.solve(y.as_slice());
    let beta = coef[1..].to_vec();
    let mut out = y.clone();
    for i in 0..n {
        for s in 0..t {
            let adj = covs
                .iter()
                .zip(&beta)
                .fold(T::zero(), |acc, ((_, m), &b)| acc + b * m[(i, s)]);
            out[(i, s)] = out[(i, s)] - adj;
        }
    }
    Ok((out, beta))
}

/// Name the covariate at `column` and the earlier column it most resembles.
fn collinear_pair<T: Scalar>(x: &Matrix<T>, column: usize, covs: &[(String, Matrix<T>)]) -> Error {
    let name = |c: usize| {
        if c == 0 {
            "intercept".to_string()
        } else {
            covs[c - 1].0.clone()
        }
    };
    if column == 0 {
        return Error::invalid("empty covariate design");
    }
    let centred = |c: usize| {
        let v = x.column(c);
        let m = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
        v.into_iter().map(|a| a - m).collect::<Vec<T>>()
    };
    let target = centred(column);
    let norm = |v: &[T]| crate::linalg::dot(v, v).sqrt();
    let tn = norm(&target);
    let scale = x
        .column(column)
        .iter()
        .fold(T::zero(), |a, &b| a.max(b.abs()));
    if tn <= T::lit(1e-8) * scale.max(T::one()) * T::from_usize_lossy(x.nrows()).sqrt() {
        return Error::CollinearCovariates {
            first: name(0),
            second: name(column),
        };
    }
    let mut best = (0, T::neg_infinity());
    for c in 1..column {
        let v = centred(c);
        let vn = norm(&v);
        if vn > T::zero() {
            let corr = (crate::linalg::dot(&v, &target) / (vn * tn)).abs();
            if corr > best.1 {
                best = (c, corr);
            }
        }
    }
    Error::CollinearCovariates {
        first: name(best.0),
        second: name(column),
    }
}
