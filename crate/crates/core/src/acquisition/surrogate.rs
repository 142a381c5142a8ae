//! Common interface of the models the acquisition works with.

use crate::error::{Error, Result};
use crate::gp::{GpModel, Prediction, PredictionGradient};
use crate::reduction::AdditiveGpModel;

/// A fitted model over the full coordinate vector.
pub trait Surrogate {
    fn input_dim(&self) -> usize;
    fn predict(&self, alpha: &[f64]) -> Prediction;
    fn predict_gradient(&self, alpha: &[f64]) -> Result<PredictionGradient>;
}

impl Surrogate for GpModel {
    fn input_dim(&self) -> usize {
        GpModel::input_dim(self)
    }

    fn predict(&self, alpha: &[f64]) -> Prediction {
        GpModel::predict(self, alpha)
    }

    fn predict_gradient(&self, alpha: &[f64]) -> Result<PredictionGradient> {
        GpModel::predict_gradient(self, alpha)
    }
}

impl Surrogate for AdditiveGpModel {
    fn input_dim(&self) -> usize {
        self.kernel.dim
    }

    fn predict(&self, alpha: &[f64]) -> Prediction {
        AdditiveGpModel::predict(self, alpha)
    }

    fn predict_gradient(&self, alpha: &[f64]) -> Result<PredictionGradient> {
        AdditiveGpModel::predict_gradient(self, alpha)
    }
}

/// A GP on a subset of the coordinates, seen as a model of all of them.
#[derive(Clone, Debug)]
pub struct SubsetModel {
    pub model: GpModel,
    pub coords: Vec<usize>,
    pub dim: usize,
}

impl SubsetModel {
    pub fn new(model: GpModel, coords: Vec<usize>, dim: usize) -> Result<Self> {
        if coords.len() != model.input_dim() || coords.iter().any(|&c| c >= dim) {
            return Err(Error::InvalidArgument(format!(
                "coordinates {coords:?} do not fit a {}-input model in dimension {dim}",
                model.input_dim()
            )));
        }
        Ok(Self { model, coords, dim })
    }

    fn restrict(&self, alpha: &[f64]) -> Vec<f64> {
        self.coords.iter().map(|&c| alpha[c]).collect()
    }
}

impl Surrogate for SubsetModel {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, alpha: &[f64]) -> Prediction {
        self.model.predict(&self.restrict(alpha))
    }

    fn predict_gradient(&self, alpha: &[f64]) -> Result<PredictionGradient> {
        let g = self.model.predict_gradient(&self.restrict(alpha))?;
        let mut grad_mean = vec![0.0; self.dim];
        let mut grad_sd = vec![0.0; self.dim];
        for (k, &c) in self.coords.iter().enumerate() {
            grad_mean[c] = g.grad_mean[k];
            grad_sd[c] = g.grad_sd[k];
        }
        Ok(PredictionGradient {
            grad_mean,
            grad_sd,
            ..g
        })
    }
}
