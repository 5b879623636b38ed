//! Small dense linear algebra kernel: a row-major matrix, Householder QR with
//! sequential rank detection, and a symmetric eigendecomposition
//! (Householder tridiagonalisation followed by implicit QL).

use std::ops::{Index, IndexMut};

use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Panics if `data.len() != nrows * ncols`.
    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), nrows * ncols, "matrix data length mismatch");
        Self { nrows, ncols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.ncols, rhs.nrows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            let out_row = &mut out.data[i * rhs.ncols..(i + 1) * rhs.ncols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len(), "matvec shape mismatch");
        (0..self.nrows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Select rows by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix<T> {
        let mut data = Vec::with_capacity(rows.len() * self.ncols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix::from_row_major(rows.len(), self.ncols, data)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(self.nrows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Householder QR factorisation of a tall design matrix.
///
/// Columns are processed in their given order; a column whose component
/// orthogonal to the preceding columns is negligible relative to its own norm
/// is reported as collinear, so callers can name it.
#[derive(Clone, Debug)]
pub struct Qr<T> {
    n: usize,
    p: usize,
    /// Householder vectors, one per column, stored densely (entries above the
    /// pivot row are zero).
    reflectors: Vec<Vec<T>>,
    betas: Vec<T>,
    r: Matrix<T>,
}

/// Index of the first column found to be linearly dependent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankDeficiency {
    pub column: usize,
}

impl<T: Scalar> Qr<T> {
    pub fn new(x: &Matrix<T>) -> Result<Self, RankDeficiency> {
        Self::with_tolerance(x, T::epsilon().sqrt())
    }

    pub fn with_tolerance(x: &Matrix<T>, rel_tol: T) -> Result<Self, RankDeficiency> {
        let (n, p) = x.shape();
        if p > n {
            return Err(RankDeficiency { column: n });
        }
        let mut cols: Vec<Vec<T>> = (0..p).map(|j| x.column(j)).collect();
        let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
        let mut reflectors = Vec::with_capacity(p);
        let mut betas = Vec::with_capacity(p);
        let mut r = Matrix::zeros(p, p);

        for k in 0..p {
            let (head, tail) = cols.split_at_mut(k + 1);
            let col = &mut head[k];
            let sub_norm = col[k..].iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
            if norms[k] == T::zero() || sub_norm <= rel_tol * norms[k] {
                return Err(RankDeficiency { column: k });
            }
            let alpha = if col[k] > T::zero() {
                -sub_norm
            } else {
                sub_norm
            };
            let mut v = vec![T::zero(); n];
            v[k] = col[k] - alpha;
            v[(k + 1)..n].copy_from_slice(&col[(k + 1)..n]);
            let vtv = v[k..].iter().fold(T::zero(), |a, &x| a + x * x);
            let beta = if vtv == T::zero() {
                T::zero()
            } else {
                T::lit(2.0) / vtv
            };

            for (i, ri) in (0..k).zip(col.iter()) {
                r[(i, k)] = *ri;
            }
            r[(k, k)] = alpha;

            for other in tail.iter_mut() {
                let s = v[k..]
                    .iter()
                    .zip(&other[k..])
                    .fold(T::zero(), |a, (&vi, &oi)| a + vi * oi)
                    * beta;
                for (o, &vi) in other[k..].iter_mut().zip(&v[k..]) {
                    *o = *o - s * vi;
                }
            }
            reflectors.push(v);
            betas.push(beta);
        }
        Ok(Self {
            n,
            p,
            reflectors,
            betas,
            r,
        })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> &Matrix<T> {
        &self.r
    }

    /// y <- Q' y
    pub fn apply_qt(&self, y: &mut [T]) {
        assert_eq!(y.len(), self.n);
        for (k, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate() {
            let s = dot(&v[k..], &y[k..]) * beta;
            for (yi, &vi) in y[k..].iter_mut().zip(&v[k..]) {
                *yi = *yi - s * vi;
            }
        }
    }

    /// y <- Q y
    pub fn apply_q(&self, y: &mut [T]) {
        assert_eq!(y.len(), self.n);
        for (k, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate().rev() {
            let s = dot(&v[k..], &y[k..]) * beta;
            for (yi, &vi) in y[k..].iter_mut().zip(&v[k..]) {
                *yi = *yi - s * vi;
            }
        }
    }

    /// Least-squares coefficients for response `y`.
    pub fn solve(&self, y: &[T]) -> Vec<T> {
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        back_substitute(&self.r, &qty[..self.p])
    }

    /// The n x p orthonormal factor.
    pub fn thin_q(&self) -> Matrix<T> {
        let mut q = Matrix::zeros(self.n, self.p);
        let mut e = vec![T::zero(); self.n];
        for j in 0..self.p {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            self.apply_q(&mut e);
            for i in 0..self.n {
                q[(i, j)] = e[i];
            }
        }
        q
    }

    pub fn r_inverse(&self) -> Matrix<T> {
        upper_triangular_inverse(&self.r)
    }

    /// (X'X)^{-1} = R^{-1} R^{-T}
    pub fn xtx_inverse(&self) -> Matrix<T> {
        let ri = self.r_inverse();
        ri.matmul(&ri.transpose())
    }
}

pub fn back_substitute<T: Scalar>(r: &Matrix<T>, b: &[T]) -> Vec<T> {
    let p = r.ncols();
    let mut x = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for j in (i + 1)..p {
            s = s - r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

pub fn upper_triangular_inverse<T: Scalar>(r: &Matrix<T>) -> Matrix<T> {
    let p = r.ncols();
    let mut inv = Matrix::zeros(p, p);
    for j in 0..p {
        inv[(j, j)] = T::one() / r[(j, j)];
        for i in (0..j).rev() {
            let mut s = T::zero();
            for k in (i + 1)..=j {
                s = s + r[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / r[(i, i)];
        }
    }
    inv
}

/// Inverse of a small symmetric positive-definite matrix via Cholesky.
/// Returns `None` when the matrix is not numerically positive definite.
pub fn spd_inverse<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
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
    // inv(A) = inv(L)' inv(L); L' is upper triangular.
    let linv_t = upper_triangular_inverse(&l.transpose());
    Some(linv_t.matmul(&linv_t.transpose()))
}

/// Eigendecomposition of a symmetric matrix: `a = V diag(values) V'`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors stored as columns.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "eigendecomposition requires a square matrix");
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: Matrix::zeros(0, 0),
            };
        }
        if n == 1 {
            return Self {
                values: vec![a[(0, 0)]],
                vectors: Matrix::identity(1),
            };
        }
        let mut v: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        tridiagonalize(&mut v, &mut d, &mut e);
        tql2(&mut v, &mut d, &mut e);
        let vectors = Matrix::from_fn(n, n, |i, j| v[i][j]);
        Self { values: d, vectors }
    }

    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = T::zero();
                for (k, &w) in fv.iter().enumerate() {
                    if w != T::zero() {
                        s = s + self.vectors[(i, k)] * w * self.vectors[(j, k)];
                    }
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

// Householder reduction to tridiagonal form (after the EISPACK tred2 routine).
fn tridiagonalize<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g = g + v[k][j] * d[k];
                    e[k] = e[k] + v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] = v[k][j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] = v[k][j] - g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

// Implicit QL iterations on the tridiagonal form (after EISPACK tql2).
fn tql2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}
