//! Small dense linear-algebra helpers shared by the GP and PCA code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative nugget added on the first factorization attempt.
pub const NUGGET_START: f64 = 1e-10;
/// Largest relative nugget tried before giving up.
pub const NUGGET_MAX: f64 = 1e-4;

/// A Cholesky factor of `m + nugget * scale * I`.
#[derive(Clone, Debug)]
pub struct JitteredCholesky {
    pub factor: Cholesky<f64, Dyn>,
    /// Relative nugget that was needed (multiply by the scale for the absolute value).
    pub nugget: f64,
}

impl JitteredCholesky {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    pub fn log_det(&self) -> f64 {
        let l = self.factor.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.factor.inverse()
    }
}

/// Factorizes a symmetric matrix, escalating the diagonal nugget by factors of
/// ten from [`NUGGET_START`] to [`NUGGET_MAX`] (relative to `scale`).
pub fn cholesky_with_jitter(m: &DMatrix<f64>, scale: f64) -> Result<JitteredCholesky> {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let mut nugget = NUGGET_START;
    loop {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += nugget * scale;
        }
        if let Some(factor) = Cholesky::new(a) {
            let l = factor.l_dirty();
            if (0..l.nrows()).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0) {
                return Ok(JitteredCholesky { factor, nugget });
            }
        }
        if nugget >= NUGGET_MAX * (1.0 - 1e-12) {
            return Err(Error::SingularCovariance(nugget));
        }
        nugget = (nugget * 10.0).min(NUGGET_MAX);
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}
