//! Expected Improvement below a threshold and its gradient.

use statrs::function::erf::erfc;

use super::Surrogate;
use crate::error::Result;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// E[max(a − Y, 0)] for Y ~ N(m, s²).
pub fn ei_value(m: f64, s: f64, a: f64) -> f64 {
    if !(s > 0.0) {
        return (a - m).max(0.0);
    }
    let z = (a - m) / s;
    ((a - m) * normal_cdf(z) + s * normal_pdf(z)).max(0.0)
}

pub fn expected_improvement<M: Surrogate + ?Sized>(model: &M, alpha: &[f64], a: f64) -> f64 {
    let p = model.predict(alpha);
    ei_value(p.mean, p.sd(), a)
}

/// EI and ∇EI = −∇m Φ(z) + ∇s φ(z). Fails where s = 0.
pub fn ei_gradient<M: Surrogate + ?Sized>(model: &M, alpha: &[f64], a: f64) -> Result<(f64, Vec<f64>)> {
    let g = model.predict_gradient(alpha)?;
    let z = (a - g.mean) / g.sd;
    let (cdf, pdf) = (normal_cdf(z), normal_pdf(z));
    let value = ((a - g.mean) * cdf + g.sd * pdf).max(0.0);
    let grad = g
        .grad_mean
        .iter()
        .zip(&g.grad_sd)
        .map(|(dm, ds)| -dm * cdf + ds * pdf)
        .collect();
    Ok((value, grad))
}
