//! Plain GP with a constant trend, fitted by (penalized) maximum likelihood.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelFamily, KernelSpec};
use super::likelihood::concentrated_loglik;
use super::posterior::{Covariance, Posterior, Prediction, PredictionGradient};
use crate::error::{Error, Result};
use crate::optim::{bfgs_minimize, BfgsOptions, Bounds, LogisticBox};

/// A kernel over inputs of a fixed dimension.
#[derive(Clone, Copy, Debug)]
pub struct BoundKernel<'a> {
    pub kernel: &'a KernelSpec,
    pub dim: usize,
}

impl Covariance for BoundKernel<'_> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn prior_variance(&self) -> f64 {
        self.kernel.variance
    }

    fn cov(&self, u: &[f64], v: &[f64]) -> f64 {
        self.kernel.variance * self.kernel.corr(u, v)
    }

    fn cov_grad(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut g = self.kernel.corr_grad(u, v);
        for x in &mut g {
            *x *= self.kernel.variance;
        }
        g
    }
}

/// Multistart settings for maximum-likelihood fits.
#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Total starts: one at θ = range, the rest random.
    pub starts: usize,
    /// Length-scale box, as multiples of the per-coordinate range.
    pub theta_factor: (f64, f64),
    pub seed: u64,
    pub bfgs: BfgsOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            theta_factor: (1e-3, 1e3),
            seed: 0,
            bfgs: BfgsOptions {
                max_iter: 200,
                grad_tol: 1e-6,
                f_tol: 1e-10,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct GpModel {
    pub kernel: KernelSpec,
    pub posterior: Posterior,
    /// Penalized log-likelihood at the fitted length-scales.
    pub loglik: f64,
}

impl GpModel {
    /// Conditions a given kernel on data.
    pub fn with_kernel(kernel: KernelSpec, inputs: Vec<Vec<f64>>, outputs: Vec<f64>, loglik: f64) -> Result<Self> {
        let p = inputs.first().map_or(0, Vec::len);
        let posterior = Posterior::new(&BoundKernel { kernel: &kernel, dim: p }, inputs, outputs)?;
        Ok(Self {
            kernel,
            posterior,
            loglik,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.posterior.inputs.first().map_or(0, Vec::len)
    }

    pub fn covariance(&self) -> BoundKernel<'_> {
        BoundKernel {
            kernel: &self.kernel,
            dim: self.input_dim(),
        }
    }

    pub fn beta_hat(&self) -> f64 {
        self.posterior.beta_hat
    }

    pub fn predict(&self, q: &[f64]) -> Prediction {
        self.posterior.predict(&self.covariance(), q)
    }

    pub fn predict_gradient(&self, q: &[f64]) -> Result<PredictionGradient> {
        self.posterior.predict_gradient(&self.covariance(), q)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            kernel_family: self.kernel.family,
            p: self.input_dim(),
            n: self.posterior.len(),
            lengthscales: self.kernel.lengthscales.clone(),
            variance: self.kernel.variance,
            beta_hat: self.posterior.beta_hat,
            loglik: self.loglik,
            inputs: self.posterior.inputs.clone(),
            outputs: self.posterior.outputs.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if f.inputs.len() != f.n || f.outputs.len() != f.n || f.inputs.iter().any(|x| x.len() != f.p) {
            return Err(Error::Parse("model header disagrees with its data".into()));
        }
        let kernel = KernelSpec::new(f.kernel_family, f.lengthscales, f.variance)?;
        Self::with_kernel(kernel, f.inputs, f.outputs, f.loglik)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    kernel_family: KernelFamily,
    p: usize,
    n: usize,
    lengthscales: Vec<f64>,
    variance: f64,
    beta_hat: f64,
    loglik: f64,
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
}

/// Per-coordinate range of the inputs (1 where a coordinate is constant).
pub fn input_ranges(inputs: &[Vec<f64>]) -> Vec<f64> {
    let p = inputs.first().map_or(0, Vec::len);
    (0..p)
        .map(|j| {
            let (lo, hi) = inputs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x[j]), b.max(x[j])));
            let r = hi - lo;
            if r > 0.0 && r.is_finite() {
                r
            } else {
                1.0
            }
        })
        .collect()
}

pub(crate) fn is_constant(y: &[f64]) -> bool {
    let first = y[0];
    let scale = y.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    y.iter().all(|v| (v - first).abs() <= 1e-14 * scale)
}

/// Start points in log-θ: the ranges, then uniform draws in
/// [0.1, 10] × range per coordinate.
pub(crate) fn log_theta_starts(ranges: &[f64], starts: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = vec![ranges.iter().map(|r| r.ln()).collect::<Vec<_>>()];
    while out.len() < starts.max(1) {
        out.push(
            ranges
                .iter()
                .map(|r| r.ln() + rng.random_range(-(10f64.ln())..10f64.ln()))
                .collect(),
        );
    }
    out
}

/// Fits length-scales by maximizing the penalized concentrated likelihood
/// (multistart BFGS in log θ), then β̂ and σ̂² at the optimum. Isotropic when
/// `isotropic` is set.
pub fn fit_gp(
    inputs: &[Vec<f64>],
    y: &[f64],
    family: KernelFamily,
    lambda: f64,
    isotropic: bool,
    opts: &FitOptions,
) -> Result<GpModel> {
    let n = y.len();
    if n < 2 || inputs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 matching observations, got {} inputs and {n} outputs",
            inputs.len()
        )));
    }
    let mut ranges = input_ranges(inputs);
    if isotropic {
        let diag = ranges.iter().map(|r| r * r).sum::<f64>().sqrt();
        ranges = vec![diag];
    }
    if is_constant(y) {
        let kernel = KernelSpec::new(family, ranges, 0.0)?;
        return GpModel::with_kernel(kernel, inputs.to_vec(), y.to_vec(), f64::INFINITY);
    }
    let (lo_f, hi_f) = opts.theta_factor;
    let boxed = LogisticBox::new(Bounds {
        lower: ranges.iter().map(|r| (r * lo_f).ln()).collect(),
        upper: ranges.iter().map(|r| (r * hi_f).ln()).collect(),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts = log_theta_starts(&ranges, opts.starts, &mut rng);

    let objective = |z: &[f64]| -> Option<(f64, Vec<f64>)> {
        let lt = boxed.to_box(z);
        let theta: Vec<f64> = lt.iter().map(|v| v.exp()).collect();
        let c = concentrated_loglik(inputs, y, family, &theta, lambda).ok()?;
        let jac = boxed.jacobian(z);
        Some((-c.value, c.grad.iter().zip(&jac).map(|(g, j)| -g * j).collect()))
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        let z0 = boxed.from_box(s);
        if let Some(r) = bfgs_minimize(objective, &z0, &opts.bfgs) {
            if best.as_ref().is_none_or(|b| r.value < b.1) {
                best = Some((r.x, r.value));
            }
        }
    }
    let (z, _) = best.ok_or_else(|| Error::Numerical("every likelihood start failed".into()))?;
    let theta: Vec<f64> = boxed.to_box(&z).iter().map(|v| v.exp()).collect();
    let c = concentrated_loglik(inputs, y, family, &theta, lambda)?;
    let kernel = KernelSpec::new(family, theta, c.sigma2_hat)?;
    GpModel::with_kernel(kernel, inputs.to_vec(), y.to_vec(), c.value)
}
