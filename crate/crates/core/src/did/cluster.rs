//! Cluster-robust sandwich variance: the CR1 small-sample scaling and the
//! Bell-McCaffrey (CR2) leverage adjustment, plus the Bell-McCaffrey
//! degrees of freedom for a single coefficient.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, Qr, SymmetricEigen};
use crate::regression::Design;
use crate::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ClusterMode {
    Cr1,
    #[default]
    Cr2,
}

#[derive(Clone, Debug)]
pub struct ClusterVcov<T> {
    /// Covariance of the requested coefficients, in request order.
    pub vcov: Matrix<T>,
    pub n_clusters: usize,
    /// Bell-McCaffrey degrees of freedom per requested coefficient (CR2 only).
    pub bm_df: Option<Vec<T>>,
}

fn group_rows(cluster_ids: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (row, &c) in cluster_ids.iter().enumerate() {
        map.entry(c).or_default().push(row);
    }
    map.into_iter().collect()
}

/// (I - H_gg)^{-1/2}, with eigen-directions that are exactly null (effects
/// nested inside the cluster, e.g. its own unit dummy) mapped to zero.
/// Eigenvalues that are small but not clearly null make the block singular.
fn adjustment_matrix<T: Scalar>(q_g: &Matrix<T>, cluster: usize) -> Result<Matrix<T>> {
    let m = q_g.nrows();
    let h = q_g.matmul(&q_g.transpose());
    let mut i_minus_h = Matrix::identity(m);
    for i in 0..m {
        for j in 0..m {
            i_minus_h[(i, j)] = i_minus_h[(i, j)] - h[(i, j)];
        }
    }
    let eig = SymmetricEigen::new(&i_minus_h);
    let null_tol = T::lit(1e3) * T::epsilon() * T::from_usize_lossy(m.max(1));
    let ambiguous = T::epsilon().sqrt();
    for &v in &eig.values {
        if v > null_tol && v < ambiguous {
            return Err(Error::SingularClusterBlock {
                cluster: cluster.to_string(),
            });
        }
    }
    Ok(eig.reconstruct_with(|v: T| {
        if v <= null_tol {
            T::zero()
        } else {
            T::one() / v.sqrt()
        }
    }))
}

/// Cluster-robust covariance for the coefficients `coefs` of a fitted
/// regression.
pub fn cluster_robust_vcov<T: Scalar>(
    qr: &Qr<T>,
    residuals: &[T],
    cluster_ids: &[usize],
    coefs: &[usize],
    mode: ClusterMode,
    with_df: bool,
) -> Result<ClusterVcov<T>> {
    let n = qr.nrows();
    let p = qr.ncols();
    if residuals.len() != n || cluster_ids.len() != n {
        return Err(Error::invalid(
            "residuals and cluster ids must match design rows",
        ));
    }
    let clusters = group_rows(cluster_ids);
    let g = clusters.len();
    if g < 2 {
        return Err(Error::invalid(
            "cluster-robust variance needs at least 2 clusters",
        ));
    }
    let q = qr.thin_q();
    let r_inv = qr.r_inverse();
    // W = X (X'X)^{-1} restricted to the requested columns: Q R^{-T}.
    let k = coefs.len();
    let mut w = Matrix::zeros(n, k);
    for i in 0..n {
        let qi = q.row(i);
        for (col, &c) in coefs.iter().enumerate() {
            let mut s = T::zero();
            for j in c..p {
                s = s + qi[j] * r_inv[(c, j)];
            }
            w[(i, col)] = s;
        }
    }

    let adjustments: Vec<Option<Matrix<T>>> = match mode {
        ClusterMode::Cr1 => vec![None; g],
        ClusterMode::Cr2 => clusters
            .par_iter()
            .map(|(id, rows)| adjustment_matrix(&q.select_rows(rows), *id).map(Some))
            .collect::<Result<Vec<_>>>()?,
    };

    let mut vcov = Matrix::zeros(k, k);
    for ((_, rows), adj) in clusters.iter().zip(&adjustments) {
        let e_g: Vec<T> = rows.iter().map(|&r| residuals[r]).collect();
        let e_adj = match adj {
            Some(a) => a.matvec(&e_g),
            None => e_g,
        };
        let mut u = vec![T::zero(); k];
        for (&r, &e) in rows.iter().zip(&e_adj) {
            for (uc, &wc) in u.iter_mut().zip(w.row(r)) {
                *uc = *uc + wc * e;
            }
        }
        for a in 0..k {
            for b in 0..k {
                vcov[(a, b)] = vcov[(a, b)] + u[a] * u[b];
            }
        }
    }
    if mode == ClusterMode::Cr1 {
        if n <= p {
            return Err(Error::invalid(
                "CR1 small-sample factor undefined: no residual degrees of freedom",
            ));
        }
        let gf = T::from_usize_lossy(g);
        let factor = gf / (gf - T::one()) * T::from_usize_lossy(n - 1) / T::from_usize_lossy(n - p);
        vcov = vcov.map(|v| v * factor);
    }

    let bm_df = if with_df && mode == ClusterMode::Cr2 {
        Some(
            (0..k)
                .map(|col| bell_mccaffrey_df(&q, &w, col, &clusters, &adjustments))
                .collect(),
        )
    } else {
        None
    };
    Ok(ClusterVcov {
        vcov,
        n_clusters: g,
        bm_df,
    })
}

// df = (tr G'G)^2 / tr((G'G)^2), where column g of G is
// (I - H)[:, g] A_g W_g c for the contrast selecting coefficient `col`.
fn bell_mccaffrey_df<T: Scalar>(
    q: &Matrix<T>,
    w: &Matrix<T>,
    col: usize,
    clusters: &[(usize, Vec<usize>)],
    adjustments: &[Option<Matrix<T>>],
) -> T {
    let n = q.nrows();
    let p = q.ncols();
    let columns: Vec<Vec<T>> = clusters
        .par_iter()
        .zip(adjustments)
        .map(|((_, rows), adj)| {
            let w_g: Vec<T> = rows.iter().map(|&r| w[(r, col)]).collect();
            let z = match adj {
                Some(a) => a.matvec(&w_g),
                None => w_g,
            };
            let mut qtz = vec![T::zero(); p];
            for (&r, &zv) in rows.iter().zip(&z) {
                for (acc, &qv) in qtz.iter_mut().zip(q.row(r)) {
                    *acc = *acc + qv * zv;
                }
            }
            let mut out: Vec<T> = (0..n).map(|i| -dot(q.row(i), &qtz)).collect();
            for (&r, &zv) in rows.iter().zip(&z) {
                out[r] = out[r] + zv;
            }
            out
        })
        .collect();
    let m = columns.len();
    let mut trace = T::zero();
    let mut frob = T::zero();
    for a in 0..m {
        for b in a..m {
            let v = dot(&columns[a], &columns[b]);
            if a == b {
                trace = trace + v;
                frob = frob + v * v;
            } else {
                frob = frob + T::lit(2.0) * v * v;
            }
        }
    }
    if frob > T::zero() {
        trace * trace / frob
    } else {
        T::from_usize_lossy(m.saturating_sub(1).max(1))
    }
}

/// Standard error of coefficient `coef` of the regression of some response
/// on `design`, given that regression's residuals.
pub fn cluster_robust_se<T: Scalar>(
    design: &Design<T>,
    residuals: &[T],
    cluster_ids: &[usize],
    coef: usize,
    mode: ClusterMode,
) -> Result<T> {
    let qr = Qr::new(&design.matrix).map_err(|d| Error::RankDeficient {
        column: design.names[d.column].clone(),
    })?;
    let v = cluster_robust_vcov(&qr, residuals, cluster_ids, &[coef], mode, false)?;
    Ok(v.vcov[(0, 0)].max(T::zero()).sqrt())
}
