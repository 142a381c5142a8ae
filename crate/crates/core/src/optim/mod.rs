//! Local and global optimizers used by the likelihood fits, the acquisition
//! maximizer and the pre-image solver.
//!
//! Everything here minimizes. Callers that maximize negate.

mod bfgs;
mod evolution;
mod lm;
mod nelder_mead;
mod spg;

pub use bfgs::{bfgs_minimize, BfgsOptions};
pub use evolution::{differential_evolution, EvolutionOptions, EvolutionResult};
pub use lm::{levenberg_marquardt, LmOptions};
pub use nelder_mead::{nelder_mead, NelderMeadOptions};
pub use spg::{projected_gradient_minimize, SpgOptions};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "bad bounds on coordinate {i}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn clamped(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.clamp(&mut y);
        y
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower[i] + rng.random::<f64>() * self.width(i))
            .collect()
    }

    /// Restricts the box to a subset of coordinates.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            lower: indices.iter().map(|&i| self.lower[i]).collect(),
            upper: indices.iter().map(|&i| self.upper[i]).collect(),
        }
    }
}

/// Outcome of a local minimization.
#[derive(Clone, Debug)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Maps an unbounded vector onto a box through a logistic squashing, so that
/// unconstrained quasi-Newton methods can be used on bounded parameters.
#[derive(Clone, Debug)]
pub struct LogisticBox {
    bounds: Bounds,
}

impl LogisticBox {
    pub fn new(bounds: Bounds) -> Self {
        Self { bounds }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn to_box(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, &zi)| self.bounds.lower[i] + self.bounds.width(i) * sigmoid(zi))
            .collect()
    }

    /// Inverse map; points on (or outside) the box boundary are pulled
    /// slightly inside first.
    pub fn from_box(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let w = self.bounds.width(i);
                if w <= 0.0 {
                    return 0.0;
                }
                let u = ((xi - self.bounds.lower[i]) / w).clamp(1e-9, 1.0 - 1e-9);
                (u / (1.0 - u)).ln()
            })
            .collect()
    }

    /// d x_i / d z_i.
    pub fn jacobian(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(i, &zi)| {
                let s = sigmoid(zi);
                self.bounds.width(i) * s * (1.0 - s)
            })
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
