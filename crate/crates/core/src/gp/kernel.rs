//! Stationary correlation functions of a scaled Euclidean distance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    #[default]
    Matern52,
    Matern32,
    SqExp,
}

impl KernelFamily {
    /// Correlation at scaled distance r.
    pub fn corr(self, r: f64) -> f64 {
        match self {
            KernelFamily::Matern52 => {
                let s = 5f64.sqrt() * r;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelFamily::Matern32 => {
                let s = 3f64.sqrt() * r;
                (1.0 + s) * (-s).exp()
            }
            KernelFamily::SqExp => (-0.5 * r * r).exp(),
        }
    }

    /// −k′(r)/r, which stays finite at r = 0.
    pub fn g(self, r: f64) -> f64 {
        match self {
            KernelFamily::Matern52 => {
                let s = 5f64.sqrt() * r;
                5.0 / 3.0 * (1.0 + s) * (-s).exp()
            }
            KernelFamily::Matern32 => 3.0 * (-(3f64.sqrt()) * r).exp(),
            KernelFamily::SqExp => (-0.5 * r * r).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Matern52 => "matern52",
            KernelFamily::Matern32 => "matern32",
            KernelFamily::SqExp => "sqexp",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matern52" => Ok(KernelFamily::Matern52),
            "matern32" => Ok(KernelFamily::Matern32),
            "sqexp" => Ok(KernelFamily::SqExp),
            _ => Err(Error::Parse(format!("unknown kernel '{s}'"))),
        }
    }
}

/// √Σ((u_i − v_i)/θ_i)²; a single θ is shared by every coordinate.
pub fn scaled_distance(u: &[f64], v: &[f64], theta: &[f64]) -> f64 {
    let iso = theta.len() == 1;
    u.iter()
        .zip(v)
        .enumerate()
        .map(|(i, (a, b))| {
            let t = if iso { theta[0] } else { theta[i] };
            let d = (a - b) / t;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// A scaled kernel σ²·k(‖(u − v)/θ‖).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// One entry per input (anisotropic) or a single shared entry (isotropic).
    pub lengthscales: Vec<f64>,
    pub variance: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, variance: f64) -> Result<Self> {
        if lengthscales.is_empty() || lengthscales.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument("length-scales must be positive and finite".into()));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad kernel variance {variance}")));
        }
        Ok(Self {
            family,
            lengthscales,
            variance,
        })
    }

    pub fn is_isotropic(&self) -> bool {
        self.lengthscales.len() == 1
    }

    fn theta(&self, i: usize) -> f64 {
        if self.is_isotropic() {
            self.lengthscales[0]
        } else {
            self.lengthscales[i]
        }
    }

    /// Correlation (variance not applied).
    pub fn corr(&self, u: &[f64], v: &[f64]) -> f64 {
        self.family.corr(scaled_distance(u, v, &self.lengthscales))
    }

    /// Gradient of the correlation with respect to `u`.
    pub fn corr_grad(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let g = self.family.g(scaled_distance(u, v, &self.lengthscales));
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(i, (a, b))| {
                let t = self.theta(i);
                -g * (a - b) / (t * t)
            })
            .collect()
    }
}

/// Correlation of `u` and `v` under `spec`, checking dimensions.
pub fn kernel_eval(spec: &KernelSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || (!spec.is_isotropic() && spec.lengthscales.len() != u.len()) {
        return Err(Error::DimensionMismatch {
            expected: if spec.is_isotropic() { v.len() } else { spec.lengthscales.len() },
            got: u.len(),
        });
    }
    Ok(spec.corr(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matern52_at_unit_distance() {
        let s5 = 5f64.sqrt();
        let expect = (1.0 + s5 + 5.0 / 3.0) * (-s5).exp();
        assert!((KernelFamily::Matern52.corr(1.0) - expect).abs() < 1e-15);
        assert!((expect - 0.52399).abs() < 1e-5);
    }

    #[test]
    fn g_is_minus_derivative_over_r() {
        for fam in [KernelFamily::Matern52, KernelFamily::Matern32, KernelFamily::SqExp] {
            for r in [0.1, 0.7, 2.3] {
                let h = 1e-6;
                let d = (fam.corr(r + h) - fam.corr(r - h)) / (2.0 * h);
                assert!((-d / r - fam.g(r)).abs() < 1e-8, "{fam} {r}");
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let k = KernelSpec::new(KernelFamily::Matern52, vec![1.0, 2.0], 1.0).unwrap();
        assert!(kernel_eval(&k, &[0.0], &[1.0]).is_err());
        assert_eq!(kernel_eval(&k, &[0.3, 0.1], &[0.3, 0.1]).unwrap(), 1.0);
        assert!(KernelSpec::new(KernelFamily::SqExp, vec![0.0], 1.0).is_err());
    }
}
