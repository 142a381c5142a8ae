//! Principal component analysis of a shape database.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenpairs with λ below this fraction of λ₁ are treated as numerical zeros
/// and their eigenvectors are not kept.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcaRoute {
    /// Eigen-decomposition of the D×D covariance.
    Covariance,
    /// Eigen-decomposition of the N×N Gram matrix.
    Gram,
    /// Gram when D > N, covariance otherwise.
    Auto,
}

/// Truncation rule for the effective dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TruncationPolicy {
    /// Smallest count whose cumulative share reaches `threshold` (a fraction).
    Cumulative { threshold: f64 },
    /// Count of eigenvalues with λ_j/λ₁ ≥ `ratio`.
    Ratio { ratio: f64 },
    /// Whichever of the two keeps fewer axes.
    Both { threshold: f64, ratio: f64 },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::Both {
            threshold: 0.9999,
            ratio: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenBasis {
    /// φ̄, length D.
    pub mean: Vec<f64>,
    /// D×D′, orthonormal columns in decreasing eigenvalue order.
    pub vectors: DMatrix<f64>,
    /// The full spectrum (min(N, D) values), non-increasing, non-negative.
    pub eigenvalues: Vec<f64>,
    /// Effective dimension d′ used for α.
    pub d_prime: usize,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of retained eigenvectors D′.
    pub fn retained(&self) -> usize {
        self.vectors.ncols()
    }

    /// Sets d′ = min(d, d̃) for the given policy.
    pub fn truncate(&mut self, d: usize, policy: TruncationPolicy) -> Result<usize> {
        let dp = effective_dim(&self.eigenvalues, d, policy)?.min(self.retained());
        self.d_prime = dp.max(1);
        Ok(self.d_prime)
    }

    fn check_len(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: phi.len(),
            });
        }
        Ok(())
    }

    /// The first `k` coordinates of φ − φ̄ in the eigenbasis.
    pub fn project_k(&self, phi: &[f64], k: usize) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        let k = k.min(self.retained());
        let centered: Vec<f64> = phi.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        Ok((0..k)
            .map(|j| {
                self.vectors
                    .column(j)
                    .iter()
                    .zip(&centered)
                    .map(|(v, c)| v * c)
                    .sum()
            })
            .collect())
    }

    /// α = Vᵀ(φ − φ̄) restricted to the first d′ axes.
    pub fn project(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.project_k(phi, self.d_prime)
    }

    /// φ̄ + Σ_{j≤δ} α_j v^j.
    pub fn reconstruct(&self, alpha: &[f64], delta: usize) -> Result<Vec<f64>> {
        if delta > alpha.len() || delta > self.retained() {
            return Err(Error::InvalidArgument(format!(
                "cannot reconstruct with {delta} axes from {} coordinates and {} eigenvectors",
                alpha.len(),
                self.retained()
            )));
        }
        let mut out = self.mean.clone();
        for (j, a) in alpha.iter().take(delta).enumerate() {
            for (o, v) in out.iter_mut().zip(self.vectors.column(j).iter()) {
                *o += a * v;
            }
        }
        Ok(out)
    }

    /// Cumulative share of the first `k` eigenvalues, in percent.
    pub fn cumulative_pct(&self, k: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return 100.0;
        }
        100.0 * self.eigenvalues.iter().take(k).sum::<f64>() / total
    }
}

/// Smallest count of axes meeting `policy`, capped at `d`.
pub fn effective_dim(eigenvalues: &[f64], d: usize, policy: TruncationPolicy) -> Result<usize> {
    let l1 = eigenvalues.first().copied().unwrap_or(0.0);
    if !(l1 > 0.0) {
        return Err(Error::Numerical("all-zero spectrum".into()));
    }
    let total: f64 = eigenvalues.iter().sum();
    let cumulative = |t: f64| {
        let mut acc = 0.0;
        for (k, l) in eigenvalues.iter().enumerate() {
            acc += l;
            if acc >= t * total * (1.0 - 1e-15) {
                return k + 1;
            }
        }
        eigenvalues.len()
    };
    let ratio = |r: f64| eigenvalues.iter().filter(|&&l| l / l1 >= r).count();
    let dt = match policy {
        TruncationPolicy::Cumulative { threshold } => cumulative(threshold),
        TruncationPolicy::Ratio { ratio: r } => ratio(r),
        TruncationPolicy::Both { threshold, ratio: r } => cumulative(threshold).min(ratio(r)),
    };
    Ok(dt.min(d).max(1))
}

/// PCA of the rows of `phi` (N×D). d′ is left at the retained count; call
/// [`EigenBasis::truncate`] to set it.
pub fn pca_fit(phi: &DMatrix<f64>, route: PcaRoute) -> Result<EigenBasis> {
    let (n, d) = phi.shape();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 rows, got {n}")));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in the shape matrix".into()));
    }
    let mean: Vec<f64> = (0..d).map(|j| phi.column(j).mean()).collect();
    let mut centered = phi.clone();
    for j in 0..d {
        let m = mean[j];
        centered.column_mut(j).add_scalar_mut(-m);
    }
    let use_gram = match route {
        PcaRoute::Covariance => false,
        PcaRoute::Gram => true,
        PcaRoute::Auto => d > n,
    };
    let (values, vectors) = if use_gram {
        let gram = (&centered * centered.transpose()) / n as f64;
        let (vals, u) = sorted_eigen(gram);
        let l1 = vals.first().copied().unwrap_or(0.0);
        let keep = vals.iter().take_while(|&&l| l1 > 0.0 && l > RANK_TOL * l1).count();
        let mut v = DMatrix::zeros(d, keep);
        for j in 0..keep {
            let col = centered.transpose() * u.column(j) / (n as f64 * vals[j]).sqrt();
            v.set_column(j, &col);
        }
        (vals, v)
    } else {
        let cov = centered.tr_mul(&centered) / n as f64;
        let (vals, v) = sorted_eigen(cov);
        let l1 = vals.first().copied().unwrap_or(0.0);
        let keep = vals.iter().take_while(|&&l| l1 > 0.0 && l > RANK_TOL * l1).count();
        (vals, v.columns(0, keep).into_owned())
    };
    let mut vectors = vectors;
    for mut col in vectors.column_iter_mut() {
        let mut imax = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[imax].abs() {
                imax = i;
            }
        }
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    let mut eigenvalues: Vec<f64> = values.into_iter().map(|l| l.max(0.0)).collect();
    eigenvalues.truncate(n.min(d));
    Ok(EigenBasis {
        mean,
        d_prime: vectors.ncols(),
        vectors,
        eigenvalues,
    })
}

/// Eigenpairs of a symmetric matrix, sorted by decreasing eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (vals, DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_give_zero_spectrum() {
        let phi = DMatrix::from_fn(4, 3, |_, j| j as f64 + 0.5);
        let b = pca_fit(&phi, PcaRoute::Auto).unwrap();
        assert_eq!(b.mean, vec![0.5, 1.5, 2.5]);
        assert!(b.eigenvalues.iter().all(|&l| l == 0.0));
        assert_eq!(b.retained(), 0);
        assert!(effective_dim(&b.eigenvalues, 3, TruncationPolicy::default()).is_err());
    }

    #[test]
    fn single_mode_spectrum() {
        let pol = TruncationPolicy::Cumulative { threshold: 1.0 };
        assert_eq!(effective_dim(&[1.0, 0.0, 0.0], 5, pol).unwrap(), 1);
        let pol = TruncationPolicy::Cumulative { threshold: 0.5 };
        assert_eq!(effective_dim(&[1.0, 0.0, 0.0], 5, pol).unwrap(), 1);
    }

    #[test]
    fn both_policy_keeps_fewer() {
        let l = [1.0, 0.1, 1e-3, 1e-7];
        let both = TruncationPolicy::Both {
            threshold: 0.9999,
            ratio: 1e-6,
        };
        assert_eq!(effective_dim(&l, 10, both).unwrap(), 3);
        assert_eq!(effective_dim(&l, 2, both).unwrap(), 2);
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let phi = DMatrix::from_row_slice(3, 2, &[1.0, -3.0, 0.0, 0.0, -1.0, 3.0]);
        let b = pca_fit(&phi, PcaRoute::Covariance).unwrap();
        let v = b.vectors.column(0);
        let imax = if v[0].abs() > v[1].abs() { 0 } else { 1 };
        assert!(v[imax] > 0.0);
    }
}
