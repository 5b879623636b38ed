//! Least squares over the probability simplex with a free intercept:
//!
//!   min_{w in simplex, c in R}  || A w + c 1 - b ||^2 + ridge ||w||^2
//!
//! The intercept is profiled out in closed form (it centres the rows), which
//! leaves a convex quadratic in `w`. That quadratic is minimised with
//! away-step Frank-Wolfe and exact line search, started from the uniform
//! vector. The Frank-Wolfe duality gap certifies sub-optimality.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct SimplexLsProblem<'a, T> {
    /// m x d: one row per fitted observation, one column per weight.
    pub a: &'a Matrix<T>,
    /// length m target.
    pub b: &'a [T],
    pub ridge: T,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<T> {
    /// Duality-gap tolerance, relative to max(1, starting objective).
    pub tolerance: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-8),
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub objective: f64,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct SimplexSolution<T> {
    pub weights: Vec<T>,
    pub intercept: T,
    pub report: SolverReport,
}

impl<T: Scalar> SimplexLsProblem<'_, T> {
    fn validate(&self) -> Result<()> {
        let (m, d) = self.a.shape();
        if d == 0 || m == 0 {
            return Err(Error::invalid(
                "simplex problem needs at least one row and one weight",
            ));
        }
        if self.b.len() != m {
            return Err(Error::invalid("target length does not match problem rows"));
        }
        if !(self.ridge >= T::zero()) {
            return Err(Error::invalid("ridge penalty must be non-negative"));
        }
        Ok(())
    }

    /// Objective and optimal intercept at `w`, evaluated from residuals.
    pub fn objective(&self, w: &[T]) -> (T, T) {
        let fitted = self.a.matvec(w);
        let m = T::from_usize_lossy(self.b.len());
        let intercept = self
            .b
            .iter()
            .zip(&fitted)
            .fold(T::zero(), |acc, (&b, &f)| acc + (b - f))
            / m;
        let rss = self
            .b
            .iter()
            .zip(&fitted)
            .map(|(&b, &f)| {
                let r = f + intercept - b;
                r * r
            })
            .sum::<T>();
        (rss + self.ridge * dot(w, w), intercept)
    }

    /// Gram form of the profiled objective: f(w) = w'Qw - 2 lin'w + k.
    ///
    /// Only valid on the simplex, where Aw - b = (A - b1')w. Working with
    /// A - b1' lets shifts common to every column and the target cancel
    /// elementwise before centring, so such shifts leave Q bit-for-bit
    /// stable up to one rounding; lin and k are then zero.
    pub(crate) fn gram(&self) -> (Matrix<T>, Vec<T>, T) {
        let (m, d) = self.a.shape();
        let mf = T::from_usize_lossy(m);
        let mut col_mean = vec![T::zero(); d];
        for r in 0..m {
            let br = self.b[r];
            for (cm, &v) in col_mean.iter_mut().zip(self.a.row(r)) {
                *cm = *cm + (v - br);
            }
        }
        col_mean.iter_mut().for_each(|c| *c = *c / mf);
        let mut q = Matrix::zeros(d, d);
        let mut centred = vec![T::zero(); d];
        for r in 0..m {
            let br = self.b[r];
            for ((c, &v), &mu) in centred.iter_mut().zip(self.a.row(r)).zip(&col_mean) {
                *c = (v - br) - mu;
            }
            for j in 0..d {
                let cj = centred[j];
                if cj == T::zero() {
                    continue;
                }
                let row = q.row_mut(j);
                for (k, &ck) in centred.iter().enumerate().skip(j) {
                    row[k] = row[k] + cj * ck;
                }
            }
        }
        for j in 0..d {
            for k in 0..j {
                q[(j, k)] = q[(k, j)];
            }
            q[(j, j)] = q[(j, j)] + self.ridge;
        }
        (q, vec![T::zero(); d], T::zero())
    }
}

/// Minimise the simplex-constrained least-squares problem.
///
/// Errors with `NonConvergence` (carrying a sampled objective trace) when
/// `max_iter` iterations do not bring the duality gap under tolerance.
pub fn simplex_ls_minimize<T: Scalar>(
    problem: &SimplexLsProblem<'_, T>,
    options: &SolverOptions<T>,
) -> Result<SimplexSolution<T>> {
    problem.validate()?;
    let d = problem.a.ncols();
    let two = T::lit(2.0);
    let mut w = vec![T::one() / T::from_usize_lossy(d); d];
    if d == 1 {
        let (objective, intercept) = problem.objective(&w);
        return Ok(SimplexSolution {
            weights: w,
            intercept,
            report: SolverReport {
                iterations: 0,
                objective: objective.as_f64(),
                gap: 0.0,
                converged: true,
            },
        });
    }

    let (q, lin, b_ss) = problem.gram();
    let (f0, _) = problem.objective(&w);
    let tol = options.tolerance * f0.max(T::epsilon());
    let mut qw = q.matvec(&w);
    let mut qd = vec![T::zero(); d];
    let mut trace = Vec::new();
    let mut gap = T::infinity();
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..=options.max_iter {
        iterations = it;
        if it > 0 && it % 500 == 0 {
            qw = q.matvec(&w);
        }
        let g: Vec<T> = qw.iter().zip(&lin).map(|(&a, &l)| two * (a - l)).collect();
        let gw = dot(&g, &w);
        let s = argmin(&g);
        gap = gw - g[s];
        if it % 100 == 0 {
            let f = dot(&w, &qw) - two * dot(&lin, &w) + b_ss;
            trace.push(f.as_f64());
        }
        if gap <= tol {
            converged = true;
            break;
        }
        if it == options.max_iter {
            break;
        }

        let v = (0..d)
            .filter(|&j| w[j] > T::zero())
            .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap_or(std::cmp::Ordering::Equal))
            .expect("weights sum to one");
        let away_gap = g[v] - gw;
        let toward = gap >= away_gap;
        let (slope, gmax) = if toward {
            for j in 0..d {
                qd[j] = q[(j, s)] - qw[j];
            }
            (-gap, T::one())
        } else {
            for j in 0..d {
                qd[j] = qw[j] - q[(j, v)];
            }
            let wv = w[v];
            (-away_gap, wv / (T::one() - wv))
        };
        // d'Qd with d = e_s - w (toward) or w - e_v (away).
        let curvature = if toward {
            qd[s] - dot(&w, &qd)
        } else {
            dot(&w, &qd) - qd[v]
        };
        let step = if curvature > T::zero() {
            (-slope / (two * curvature)).min(gmax)
        } else {
            gmax
        };
        if toward {
            for j in 0..d {
                w[j] = (T::one() - step) * w[j];
            }
            w[s] = w[s] + step;
        } else {
            for j in 0..d {
                w[j] = (T::one() + step) * w[j];
            }
            w[v] = w[v] - step;
            if step == gmax {
                w[v] = T::zero();
            }
        }
        for j in 0..d {
            qw[j] = qw[j] + step * qd[j];
            if w[j] < T::zero() {
                w[j] = T::zero();
            }
        }
    }

    if converged {
        if let Some((polished, g)) = polish(&q, &lin, &w) {
            if g <= gap {
                w = polished;
                gap = g;
            }
        }
    }
    project_to_simplex(&mut w);
    let (objective, intercept) = problem.objective(&w);
    if !converged {
        return Err(Error::NonConvergence {
            what: "simplex-constrained least squares".to_string(),
            iterations,
            gap: gap.as_f64(),
            objective_trace: trace,
        });
    }
    Ok(SimplexSolution {
        weights: w,
        intercept,
        report: SolverReport {
            iterations,
            objective: objective.as_f64(),
            gap: gap.as_f64(),
            converged,
        },
    })
}

fn argmin<T: Scalar>(g: &[T]) -> usize {
    let mut best = 0;
    for (j, &v) in g.iter().enumerate().skip(1) {
        if v < g[best] {
            best = j;
        }
    }
    best
}

/// Exact minimiser over the affine hull of the support of `w`. Returned
/// with its duality gap only when it stays strictly inside the simplex face
/// and no weight outside the support would lower the objective.
fn polish<T: Scalar>(q: &Matrix<T>, lin: &[T], w: &[T]) -> Option<(Vec<T>, T)> {
    let support: Vec<usize> = (0..w.len()).filter(|&j| w[j] > T::zero()).collect();
    let k = support.len();
    let l = cholesky(&Matrix::from_fn(k, k, |a, b| q[(support[a], support[b])]))?;
    let x = cholesky_solve(&l, &vec![T::one(); k]);
    let y = cholesky_solve(&l, &support.iter().map(|&j| lin[j]).collect::<Vec<_>>());
    let sx = x.iter().copied().sum::<T>();
    if !(sx > T::zero()) {
        return None;
    }
    let nu = (T::one() - y.iter().copied().sum::<T>()) / sx;
    let mut out = vec![T::zero(); w.len()];
    for (a, &j) in support.iter().enumerate() {
        let v = y[a] + nu * x[a];
        if !(v > T::zero()) {
            return None;
        }
        out[j] = v;
    }
    let two = T::lit(2.0);
    let g: Vec<T> = q
        .matvec(&out)
        .iter()
        .zip(lin)
        .map(|(&a, &b)| two * (a - b))
        .collect();
    let scale = g.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let slack = T::lit(1e-12) * scale;
    let mu = two * nu;
    if (0..w.len()).any(|j| out[j] == T::zero() && g[j] < mu - slack) {
        return None;
    }
    let gap = dot(&g, &out) - g[argmin(&g)];
    Some((out, gap.max(T::zero())))
}

/// Lower Cholesky factor, refusing pivots below 1e-12 of the largest
/// diagonal entry.
fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.nrows();
    let dmax = (0..n).fold(T::zero(), |m, j| m.max(a[(j, j)]));
    let floor = T::lit(1e-12) * dmax;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = b.len();
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] = z[i] - l[(i, k)] * z[k];
        }
        z[i] = z[i] / l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            z[i] = z[i] - l[(k, i)] * z[k];
        }
        z[i] = z[i] / l[(i, i)];
    }
    z
}

/// Clamp tiny negatives from round-off and renormalise to unit sum.
fn project_to_simplex<T: Scalar>(w: &mut [T]) {
    for x in w.iter_mut() {
        if !(*x > T::zero()) {
            *x = T::zero();
        }
    }
    let s = w.iter().copied().sum::<T>();
    if s > T::zero() {
        w.iter_mut().for_each(|x| *x = *x / s);
    } else {
        let u = T::one() / T::from_usize_lossy(w.len());
        w.iter_mut().for_each(|x| *x = u);
    }
}
