//! Ordinary least squares on an explicit, named design matrix.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Qr};
use crate::Scalar;

#[derive(Clone, Debug)]
pub struct Design<T> {
    pub matrix: Matrix<T>,
    pub names: Vec<String>,
}

impl<T: Scalar> Design<T> {
    pub fn new(matrix: Matrix<T>, names: Vec<String>) -> Self {
        assert_eq!(matrix.ncols(), names.len(), "one name per design column");
        Self { matrix, names }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Clone, Debug)]
pub struct OlsFit<T> {
    pub qr: Qr<T>,
    pub names: Vec<String>,
    pub coefficients: Vec<T>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
}

pub fn ols<T: Scalar>(design: &Design<T>, y: &[T]) -> Result<OlsFit<T>> {
    let x = &design.matrix;
    if y.len() != x.nrows() {
        return Err(Error::invalid("response length does not match design rows"));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::invalid(format!(
            "{} observations cannot identify {} coefficients",
            x.nrows(),
            x.ncols()
        )));
    }
    let qr = Qr::new(x).map_err(|d| Error::RankDeficient {
        column: design.names[d.column].clone(),
    })?;
    let coefficients = qr.solve(y);
    let fitted = x.matvec(&coefficients);
    let residuals = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    Ok(OlsFit {
        qr,
        names: design.names.clone(),
        coefficients,
        fitted,
        residuals,
    })
}

impl<T: Scalar> OlsFit<T> {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }

    pub fn rss(&self) -> T {
        self.residuals.iter().map(|&e| e * e).sum()
    }

    /// s^2 (X'X)^{-1} with s^2 = RSS / (n - p).
    pub fn classical_vcov(&self) -> Matrix<T> {
        let dof = T::from_usize_lossy(self.n_obs().saturating_sub(self.n_params()).max(1));
        let s2 = self.rss() / dof;
        self.qr.xtx_inverse().map(|v| v * s2)
    }
}
