//! Moment helpers and reference-distribution tail probabilities.

use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal, StudentsT};

use crate::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    // Shifting by the first value keeps a constant sample exactly constant.
    let x0 = xs[0];
    x0 + xs.iter().map(|&x| x - x0).sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Sample standard deviation with the n-1 denominator.
pub fn sample_sd<T: Scalar>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::nan();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>();
    (ss / T::from_usize_lossy(n - 1)).sqrt()
}

/// Biased (n-denominator) central moments of order 2, 3 and 4.
pub fn central_moments<T: Scalar>(xs: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let m = mean(xs);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Upper tail of the chi-square distribution with two degrees of freedom.
pub fn chi2_2_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-0.5 * x).exp()
    }
}

/// Upper tail of F(d1, d2).
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if !(f > 0.0) {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let dist = FisherSnedecor::new(d1, d2).expect("positive degrees of freedom");
    dist.sf(f).clamp(0.0, 1.0)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(p)
}

/// Two-sided 95% critical value of the standard normal.
pub const Z_975: f64 = 1.959963984540054;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_symmetric_triplet() {
        let xs: [f64; 3] = [-1.0, 0.0, 1.0];
        assert_eq!(mean(&xs), 0.0);
        let (m2, m3, _) = central_moments(&xs);
        assert!((m2 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m3, 0.0);
        assert!((sample_sd(&xs) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_probabilities() {
        assert!((chi2_2_sf(5.991464547107979) - 0.05).abs() < 1e-12);
        // F(1, inf) is chi2(1): P(F > 3.841) ~ 0.05.
        assert!((f_sf(3.841458820694124, 1.0, 1e9) - 0.05).abs() < 1e-5);
        assert!((normal_quantile(0.975) - Z_975).abs() < 1e-9);
        assert!((student_t_quantile(0.975, 10.0) - 2.228138851986274).abs() < 1e-8);
    }
}
