use crate::did::TreatmentAssignment;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel_core::Panel;
use crate::sdid::{BlockData, SimplexLsProblem};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightTarget {
    /// Unit weights over control units (ridge zeta^2 T_pre).
    Unit,
    /// Time weights over pre-periods.
    Time,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub objective: f64,
    pub points_evaluated: u64,
}

const MAX_UNITS: usize = 4;
const MAX_PERIODS: usize = 5;

/// Exhaustive search of the unit- or time-weight objective over the simplex
/// lattice with spacing `resolution`.
pub fn grid_weight_oracle<T: Scalar>(
    panel: &Panel<T>,
    assignment: &TreatmentAssignment,
    zeta: f64,
    resolution: f64,
    target: WeightTarget,
) -> Result<GridResult> {
    if assignment.n_control() > MAX_UNITS || assignment.t_pre() > MAX_PERIODS {
        return Err(Error::invalid(format!(
            "grid oracle limited to {MAX_UNITS} controls and {MAX_PERIODS} pre-periods"
        )));
    }
    let block = BlockData::from_panel(panel, assignment)?;
    let problem = match target {
        WeightTarget::Unit => block.unit_problem(T::lit(zeta)),
        WeightTarget::Time => block.time_problem(),
    };
    let a = Matrix::from_fn(problem.a.nrows(), problem.a.ncols(), |i, j| {
        problem.a[(i, j)].as_f64()
    });
    let b: Vec<f64> = problem.b.iter().map(|v| v.as_f64()).collect();
    grid_simplex_oracle(
        &SimplexLsProblem {
            a: &a,
            b: &b,
            ridge: problem.ridge.as_f64(),
        },
        resolution,
    )
}

/// Exhaustive lattice search for any simplex least-squares problem of
/// dimension at most 5.
pub fn grid_simplex_oracle(
    problem: &SimplexLsProblem<'_, f64>,
    resolution: f64,
) -> Result<GridResult> {
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::invalid("grid resolution must lie in (0, 0.1]"));
    }
    let d = problem.a.ncols();
    if d == 0 || d > MAX_PERIODS || problem.b.len() != problem.a.nrows() {
        return Err(Error::invalid("grid oracle dimension out of range"));
    }
    let steps = (1.0 / resolution).round() as usize;
    let h = 1.0 / steps as f64;
    if d == 1 {
        let (objective, intercept) = problem.objective(&[1.0]);
        return Ok(GridResult {
            weights: vec![1.0],
            intercept,
            objective,
            points_evaluated: 1,
        });
    }

    // f(w) = w'Qw - 2 lin'w + k. For a fixed prefix w_0..w_{d-3} the last
    // two coordinates split the remaining mass, and f is a quadratic in the
    // split, so each lattice point costs O(1).
    let (q, lin, k) = problem.gram();
    let mut best = (f64::INFINITY, Vec::new());
    let mut count = 0u64;
    let mut prefix = vec![0usize; d - 2];
    let (x, y) = (d - 2, d - 1);
    loop {
        let used: usize = prefix.iter().sum();
        if used <= steps {
            let rest = steps - used;
            let mut u = vec![0.0; d];
            for (j, &p) in prefix.iter().enumerate() {
                u[j] = p as f64 * h;
            }
            u[y] = rest as f64 * h;
            let qu = q.matvec(&u);
            let f_u = crate::linalg::dot(&u, &qu) - 2.0 * crate::linalg::dot(&lin, &u) + k;
            // direction e = h (e_x - e_y)
            let slope = 2.0 * h * ((qu[x] - qu[y]) - (lin[x] - lin[y]));
            let curv = h * h * (q[(x, x)] - 2.0 * q[(x, y)] + q[(y, y)]);
            for m in 0..=rest {
                let mf = m as f64;
                let f = f_u + slope * mf + curv * mf * mf;
                if f < best.0 {
                    let mut w = u.clone();
                    w[x] = mf * h;
                    w[y] = (rest - m) as f64 * h;
                    best = (f, w);
                }
            }
            count += rest as u64 + 1;
        }
        // odometer over the prefix
        let mut j = 0;
        loop {
            if j == prefix.len() {
                let (_, w) = best;
                let (objective, intercept) = problem.objective(&w);
                return Ok(GridResult {
                    weights: w,
                    intercept,
                    objective,
                    points_evaluated: count,
                });
            }
            prefix[j] += 1;
            if prefix.iter().sum::<usize>() <= steps {
                break;
            }
            prefix[j] = 0;
            j += 1;
        }
    }
}

/// OLS through the normal equations X'X b = X'y, solved by Gaussian
/// elimination with partial pivoting.
pub fn dense_ols_oracle(x: &Matrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::invalid("response length does not match design rows"));
    }
    let mut a = vec![vec![0.0; p + 1]; p];
    for r in 0..n {
        let row = x.row(r);
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * y[r];
        }
    }
    let scale = (0..p).map(|i| a[i][i]).fold(0.0f64, f64::max);
    let tol = scale * 1e-12;
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() <= tol {
            return Err(Error::RankDeficient {
                column: format!("column {col}"),
            });
        }
        a.swap(col, piv);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut b = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * b[j]).sum();
        b[i] = (a[i][p] - s) / a[i][i];
    }
    Ok(b)
}
