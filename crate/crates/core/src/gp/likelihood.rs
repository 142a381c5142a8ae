//! Concentrated (profile) log-likelihood with the trend and the variance
//! solved in closed form.

use nalgebra::{DMatrix, DVector};

use super::kernel::{scaled_distance, KernelFamily};
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_jitter;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Clone, Debug)]
pub struct Concentrated {
    /// Penalized log-likelihood (+∞ for a constant response).
    pub value: f64,
    pub beta_hat: f64,
    pub sigma2_hat: f64,
    /// Gradient with respect to each hyperparameter the derivative matrices
    /// were given for.
    pub grad: Vec<f64>,
    /// Relative nugget used to factorize the correlation matrix.
    pub nugget: f64,
}

/// Profile likelihood of `y` under correlation `r` (unit diagonal), with
/// optional derivative matrices dR/dη_k. The penalty is not included.
pub fn concentrated_core(r: &DMatrix<f64>, dr: &[DMatrix<f64>], y: &[f64]) -> Result<Concentrated> {
    let n = y.len();
    let chol = cholesky_with_jitter(r, 1.0)?;
    let yv = DVector::from_column_slice(y);
    let ones = DVector::from_element(n, 1.0);
    let ri_y = chol.solve(&yv);
    let ri_1 = chol.solve(&ones);
    let beta = ri_y.sum() / ri_1.sum();
    let e = &yv - &ones * beta;
    let a = chol.solve(&e);
    let sigma2 = e.dot(&a) / n as f64;
    let scale = y.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-300);
    if !(sigma2 > 1e-28 * scale * scale) {
        return Ok(Concentrated {
            value: f64::INFINITY,
            beta_hat: beta,
            sigma2_hat: 0.0,
            grad: vec![0.0; dr.len()],
            nugget: chol.nugget,
        });
    }
    let value = -0.5 * n as f64 * (LN_2PI + sigma2.ln() + 1.0) - 0.5 * chol.log_det();
    let grad = if dr.is_empty() {
        Vec::new()
    } else {
        let rinv = chol.inverse();
        dr.iter()
            .map(|d| {
                let quad = a.dot(&(d * &a));
                let trace = rinv.component_mul(d).sum();
                0.5 * quad / sigma2 - 0.5 * trace
            })
            .collect()
    };
    if !value.is_finite() {
        return Err(Error::Numerical("non-finite likelihood".into()));
    }
    Ok(Concentrated {
        value,
        beta_hat: beta,
        sigma2_hat: sigma2,
        grad,
        nugget: chol.nugget,
    })
}

/// Correlation matrix of `inputs` and, if asked, its derivatives with respect
/// to each log length-scale.
pub fn correlation_matrix(
    inputs: &[Vec<f64>],
    family: KernelFamily,
    theta: &[f64],
    with_grad: bool,
) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    let n = inputs.len();
    let iso = theta.len() == 1;
    let p = theta.len();
    let mut r = DMatrix::from_element(n, n, 1.0);
    let mut dr = if with_grad {
        vec![DMatrix::zeros(n, n); p]
    } else {
        Vec::new()
    };
    for i in 0..n {
        for j in 0..i {
            let dist = scaled_distance(&inputs[i], &inputs[j], theta);
            let k = family.corr(dist);
            r[(i, j)] = k;
            r[(j, i)] = k;
            if with_grad {
                let g = family.g(dist);
                if iso {
                    let v = g * dist * dist;
                    dr[0][(i, j)] = v;
                    dr[0][(j, i)] = v;
                } else {
                    for (l, t) in theta.iter().enumerate() {
                        let s = (inputs[i][l] - inputs[j][l]) / t;
                        let v = g * s * s;
                        dr[l][(i, j)] = v;
                        dr[l][(j, i)] = v;
                    }
                }
            }
        }
    }
    (r, dr)
}

/// Penalized concentrated log-likelihood
/// −(n/2)log 2π − ½log|K| − ½eᵀK⁻¹e − λ‖θ⁻¹‖₁ with K = σ̂²R,
/// and its gradient with respect to log θ.
pub fn concentrated_loglik(
    inputs: &[Vec<f64>],
    y: &[f64],
    family: KernelFamily,
    theta: &[f64],
    lambda: f64,
) -> Result<Concentrated> {
    if inputs.len() != y.len() || y.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 matching inputs and outputs, got {} and {}",
            inputs.len(),
            y.len()
        )));
    }
    if theta.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidArgument("length-scales must be positive".into()));
    }
    let (r, dr) = correlation_matrix(inputs, family, theta, true);
    let mut c = concentrated_core(&r, &dr, y)?;
    let penalty: f64 = theta.iter().map(|t| 1.0 / t).sum::<f64>() * lambda;
    c.value -= penalty;
    for (g, t) in c.grad.iter_mut().zip(theta) {
        *g += lambda / t;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            vec![vec![0.0, 0.1], vec![0.4, 0.9], vec![1.0, 0.3], vec![0.7, 0.6]],
            vec![1.0, -0.5, 0.3, 2.0],
        )
    }

    #[test]
    fn constant_response() {
        let (x, _) = data();
        let c = concentrated_loglik(&x, &[3.0; 4], KernelFamily::Matern52, &[0.5, 0.5], 0.0).unwrap();
        assert!((c.beta_hat - 3.0).abs() < 1e-12);
        assert_eq!(c.sigma2_hat, 0.0);
    }

    #[test]
    fn penalty_is_linear() {
        let (x, y) = data();
        let th = [0.3, 0.8];
        let a = concentrated_loglik(&x, &y, KernelFamily::Matern52, &th, 1.5).unwrap();
        let b = concentrated_loglik(&x, &y, KernelFamily::Matern52, &th, 3.0).unwrap();
        let l1 = 1.0 / 0.3 + 1.0 / 0.8;
        assert!((a.value - b.value - 1.5 * l1).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = data();
        for fam in [KernelFamily::Matern52, KernelFamily::Matern32, KernelFamily::SqExp] {
            for th in [vec![0.3, 0.8], vec![0.5]] {
                let c = concentrated_loglik(&x, &y, fam, &th, 0.7).unwrap();
                for k in 0..th.len() {
                    let h: f64 = 1e-5;
                    let mut up = th.clone();
                    up[k] *= h.exp();
                    let mut dn = th.clone();
                    dn[k] *= (-h).exp();
                    let fu = concentrated_loglik(&x, &y, fam, &up, 0.7).unwrap().value;
                    let fd = concentrated_loglik(&x, &y, fam, &dn, 0.7).unwrap().value;
                    let num = (fu - fd) / (2.0 * h);
                    assert!((num - c.grad[k]).abs() < 1e-6 * (1.0 + num.abs()), "{fam} {k}: {num} vs {}", c.grad[k]);
                }
            }
        }
    }
}
