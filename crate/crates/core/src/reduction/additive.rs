//! Additive GP: anisotropic on the active coordinates plus isotropic on the
//! inactive ones.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gp::{
    concentrated_core, correlation_matrix, input_ranges, is_constant, log_theta_starts,
    Covariance, FitOptions, KernelFamily, KernelSpec, Posterior, Prediction, PredictionGradient,
};
use crate::optim::{bfgs_minimize, Bounds, LogisticBox};

/// σ²_a k_a(α^a) + σ²_ā k_ā(α^ā) over the full coordinate vector.
#[derive(Clone, Debug)]
pub struct AdditiveKernel {
    pub dim: usize,
    pub active: Vec<usize>,
    pub inactive: Vec<usize>,
    pub kernel_active: KernelSpec,
    /// Isotropic; absent when every coordinate is active.
    pub kernel_inactive: Option<KernelSpec>,
}

fn gather(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

impl Covariance for AdditiveKernel {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn prior_variance(&self) -> f64 {
        self.kernel_active.variance + self.kernel_inactive.as_ref().map_or(0.0, |k| k.variance)
    }

    fn cov(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut c = self.kernel_active.variance
            * self.kernel_active.corr(&gather(u, &self.active), &gather(v, &self.active));
        if let Some(k) = &self.kernel_inactive {
            c += k.variance * k.corr(&gather(u, &self.inactive), &gather(v, &self.inactive));
        }
        c
    }

    fn cov_grad(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let ga = self
            .kernel_active
            .corr_grad(&gather(u, &self.active), &gather(v, &self.active));
        for (&i, x) in self.active.iter().zip(ga) {
            g[i] = self.kernel_active.variance * x;
        }
        if let Some(k) = &self.kernel_inactive {
            let gi = k.corr_grad(&gather(u, &self.inactive), &gather(v, &self.inactive));
            for (&i, x) in self.inactive.iter().zip(gi) {
                g[i] = k.variance * x;
            }
        }
        g
    }
}

#[derive(Clone, Debug)]
pub struct AdditiveGpModel {
    pub kernel: AdditiveKernel,
    pub posterior: Posterior,
    pub loglik: f64,
}

impl AdditiveGpModel {
    pub fn with_kernel(kernel: AdditiveKernel, inputs: Vec<Vec<f64>>, outputs: Vec<f64>, loglik: f64) -> Result<Self> {
        let posterior = Posterior::new(&kernel, inputs, outputs)?;
        Ok(Self {
            kernel,
            posterior,
            loglik,
        })
    }

    /// δ length-scales, the inactive length-scale and the two variances
    /// (δ + 1 without an inactive part).
    pub fn hyperparameter_count(&self) -> usize {
        self.kernel.active.len() + 1 + self.kernel.kernel_inactive.as_ref().map_or(0, |_| 2)
    }

    pub fn beta_hat(&self) -> f64 {
        self.posterior.beta_hat
    }

    pub fn predict(&self, alpha: &[f64]) -> Prediction {
        self.posterior.predict(&self.kernel, alpha)
    }

    pub fn predict_gradient(&self, alpha: &[f64]) -> Result<PredictionGradient> {
        self.posterior.predict_gradient(&self.kernel, alpha)
    }
}

/// Maximizes the likelihood over (θ_a, θ_ā, σ²_a, σ²_ā) with β̂ in closed
/// form. The total variance is concentrated out and the split
/// ρ = σ²_a/(σ²_a + σ²_ā) is optimized with the log length-scales.
pub fn fit_additive(
    alphas: &[Vec<f64>],
    y: &[f64],
    active: &[usize],
    family: KernelFamily,
    opts: &FitOptions,
) -> Result<AdditiveGpModel> {
    let n = y.len();
    let dim = alphas.first().map_or(0, Vec::len);
    if n < 2 || alphas.len() != n {
        return Err(Error::InvalidArgument(format!("need at least 2 observations, got {n}")));
    }
    if active.is_empty() || active.iter().any(|&j| j >= dim) {
        return Err(Error::InvalidArgument(format!("bad active set {active:?} for dimension {dim}")));
    }
    let inactive: Vec<usize> = (0..dim).filter(|j| !active.contains(j)).collect();
    let xa: Vec<Vec<f64>> = alphas.iter().map(|x| gather(x, active)).collect();
    let xi: Vec<Vec<f64>> = alphas.iter().map(|x| gather(x, &inactive)).collect();
    let ranges_a = input_ranges(&xa);
    let range_i = input_ranges(&xi).iter().map(|r| r * r).sum::<f64>().sqrt();
    let has_inactive = !inactive.is_empty();

    let build = |theta_a: Vec<f64>, theta_i: f64, var_a: f64, var_i: f64| -> Result<AdditiveKernel> {
        Ok(AdditiveKernel {
            dim,
            active: active.to_vec(),
            inactive: inactive.clone(),
            kernel_active: KernelSpec::new(family, theta_a, var_a)?,
            kernel_inactive: if has_inactive {
                Some(KernelSpec::new(family, vec![theta_i], var_i)?)
            } else {
                None
            },
        })
    };

    if is_constant(y) {
        let k = build(ranges_a.clone(), range_i.max(1e-300), 0.0, 0.0)?;
        return AdditiveGpModel::with_kernel(k, alphas.to_vec(), y.to_vec(), f64::INFINITY);
    }

    let delta = active.len();
    let (lo_f, hi_f) = opts.theta_factor;
    let mut lower: Vec<f64> = ranges_a.iter().map(|r| (r * lo_f).ln()).collect();
    let mut upper: Vec<f64> = ranges_a.iter().map(|r| (r * hi_f).ln()).collect();
    if has_inactive {
        lower.extend([(range_i * lo_f).ln(), 0.0]);
        upper.extend([(range_i * hi_f).ln(), 1.0]);
    }
    let boxed = LogisticBox::new(Bounds { lower, upper });

    // correlation R = ρ R_a + (1 − ρ) R_ā and its derivatives
    let assemble = |eta: &[f64], with_grad: bool| -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let theta_a: Vec<f64> = eta[..delta].iter().map(|v| v.exp()).collect();
        let (ra, dra) = correlation_matrix(&xa, family, &theta_a, with_grad);
        if !has_inactive {
            return (ra, dra);
        }
        let theta_i = eta[delta].exp();
        let rho = eta[delta + 1];
        let (ri, dri) = correlation_matrix(&xi, family, &[theta_i], with_grad);
        let r = &ra * rho + &ri * (1.0 - rho);
        let mut dr = Vec::new();
        if with_grad {
            dr.extend(dra.into_iter().map(|m| m * rho));
            dr.extend(dri.into_iter().map(|m| m * (1.0 - rho)));
            dr.push(&ra - &ri);
        }
        (r, dr)
    };

    let objective = |z: &[f64]| -> Option<(f64, Vec<f64>)> {
        let eta = boxed.to_box(z);
        let (r, dr) = assemble(&eta, true);
        let c = concentrated_core(&r, &dr, y).ok()?;
        if !c.value.is_finite() {
            return None;
        }
        let jac = boxed.jacobian(z);
        Some((-c.value, c.grad.iter().zip(&jac).map(|(g, j)| -g * j).collect()))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = log_theta_starts(&ranges_a, opts.starts, &mut rng);
    for (k, s) in starts.iter_mut().enumerate() {
        if has_inactive {
            let (ti, rho) = if k == 0 {
                (range_i.ln(), 0.5)
            } else {
                (
                    range_i.ln() + rng.random_range(-(10f64.ln())..10f64.ln()),
                    rng.random_range(0.1..0.9),
                )
            };
            s.extend([ti, rho]);
        }
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        if let Some(r) = bfgs_minimize(objective, &boxed.from_box(s), &opts.bfgs) {
            if best.as_ref().is_none_or(|b| r.value < b.1) {
                best = Some((r.x, r.value));
            }
        }
    }
    let (z, _) = best.ok_or_else(|| Error::Numerical("every additive likelihood start failed".into()))?;
    let eta = boxed.to_box(&z);
    let (r, _) = assemble(&eta, false);
    let c = concentrated_core(&r, &[], y)?;
    let theta_a = eta[..delta].iter().map(|v| v.exp()).collect();
    let (theta_i, rho) = if has_inactive {
        (eta[delta].exp(), eta[delta + 1])
    } else {
        (1.0, 1.0)
    };
    let k = build(theta_a, theta_i, rho * c.sigma2_hat, (1.0 - rho) * c.sigma2_hat)?;
    AdditiveGpModel::with_kernel(k, alphas.to_vec(), y.to_vec(), c.value)
}
