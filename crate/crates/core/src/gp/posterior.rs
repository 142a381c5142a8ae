//! Kriging posterior with a constant trend, shared by every covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, JitteredCholesky};

/// A prior covariance over a fixed input dimension.
pub trait Covariance {
    fn input_dim(&self) -> usize;
    /// k(u, u).
    fn prior_variance(&self) -> f64;
    fn cov(&self, u: &[f64], v: &[f64]) -> f64;
    /// ∂k(u, v)/∂u.
    fn cov_grad(&self, u: &[f64], v: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    /// Clamped at zero.
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct PredictionGradient {
    pub mean: f64,
    pub sd: f64,
    pub grad_mean: Vec<f64>,
    pub grad_sd: Vec<f64>,
}

/// Training data with a factorized covariance and the GLS trend.
#[derive(Clone, Debug)]
pub struct Posterior {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
    pub beta_hat: f64,
    /// Relative nugget (times the prior variance) added to K.
    pub nugget: f64,
    chol: Option<JitteredCholesky>,
    weights: DVector<f64>,
}

impl Posterior {
    /// Conditions `cov` on the data. With a zero prior variance the model is
    /// the constant `beta_hat` (mean of `outputs`) with no uncertainty.
    pub fn new<C: Covariance + ?Sized>(cov: &C, inputs: Vec<Vec<f64>>, outputs: Vec<f64>) -> Result<Self> {
        let n = inputs.len();
        if n == 0 || n != outputs.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching non-empty data, got {n} inputs and {} outputs",
                outputs.len()
            )));
        }
        if inputs.iter().any(|x| x.len() != cov.input_dim()) {
            return Err(Error::DimensionMismatch {
                expected: cov.input_dim(),
                got: inputs.iter().map(Vec::len).find(|&l| l != cov.input_dim()).unwrap_or(0),
            });
        }
        let var = cov.prior_variance();
        if var <= 0.0 {
            let beta_hat = outputs.iter().sum::<f64>() / n as f64;
            return Ok(Self {
                inputs,
                outputs,
                beta_hat,
                nugget: 0.0,
                chol: None,
                weights: DVector::zeros(n),
            });
        }
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = if i == j { var } else { cov.cov(&inputs[i], &inputs[j]) };
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        let chol = cholesky_with_jitter(&k, var)?;
        let ones = DVector::from_element(n, 1.0);
        let y = DVector::from_column_slice(&outputs);
        let ki_1 = chol.solve(&ones);
        let beta_hat = chol.solve(&y).sum() / ki_1.sum();
        let weights = chol.solve(&(&y - ones * beta_hat));
        Ok(Self {
            inputs,
            outputs,
            beta_hat,
            nugget: chol.nugget,
            chol: Some(chol),
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn cross<C: Covariance + ?Sized>(&self, cov: &C, q: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.inputs.iter().map(|x| cov.cov(q, x)))
    }

    pub fn predict<C: Covariance + ?Sized>(&self, cov: &C, q: &[f64]) -> Prediction {
        let Some(chol) = &self.chol else {
            return Prediction {
                mean: self.beta_hat,
                variance: 0.0,
            };
        };
        let k = self.cross(cov, q);
        let mean = self.beta_hat + k.dot(&self.weights);
        let explained = match chol.factor.l_dirty().solve_lower_triangular(&k) {
            Some(v) => v.norm_squared(),
            None => k.dot(&chol.solve(&k)),
        };
        let variance = (cov.prior_variance() - explained).max(0.0);
        Prediction { mean, variance }
    }

    /// Mean, sd and their gradients. Fails where the sd vanishes.
    pub fn predict_gradient<C: Covariance + ?Sized>(&self, cov: &C, q: &[f64]) -> Result<PredictionGradient> {
        let Some(chol) = &self.chol else {
            return Err(Error::Numerical("zero predictive sd: gradient undefined".into()));
        };
        let k = self.cross(cov, q);
        let ki_k = chol.solve(&k);
        let mean = self.beta_hat + k.dot(&self.weights);
        let variance = cov.prior_variance() - k.dot(&ki_k);
        if !(variance > 0.0) {
            return Err(Error::Numerical("zero predictive sd: gradient undefined".into()));
        }
        let sd = variance.sqrt();
        let p = q.len();
        let mut grad_mean = vec![0.0; p];
        let mut grad_sd = vec![0.0; p];
        for (i, x) in self.inputs.iter().enumerate() {
            let dk = cov.cov_grad(q, x);
            for l in 0..p {
                grad_mean[l] += dk[l] * self.weights[i];
                grad_sd[l] -= dk[l] * ki_k[i] / sd;
            }
        }
        Ok(PredictionGradient {
            mean,
            sd,
            grad_mean,
            grad_sd,
        })
    }
}
