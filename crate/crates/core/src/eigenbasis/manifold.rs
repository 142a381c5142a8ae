//! Nearest-neighbour diagnostics of the sampled eigencoordinates.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pca::EigenBasis;
use crate::error::{Error, Result};
use crate::linalg::squared_distance;
use crate::optim::Bounds;

/// Above this many rows, d0 is computed on a random subsample of this size.
pub const D0_EXACT_LIMIT: usize = 5000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldStats {
    /// The N coordinate vectors (d′ each).
    pub sample: Vec<Vec<f64>>,
    pub covering_box: Bounds,
    /// Distance from each sample to its nearest other sample.
    pub nn_distances: Vec<f64>,
    /// Membership threshold.
    pub d95: f64,
    /// Smallest distance between two database rows in the full representation space.
    pub d0: f64,
}

impl ManifoldStats {
    /// Builds statistics from d′-dimensional coordinates and the minimal
    /// pairwise distance `d0` computed elsewhere.
    pub fn from_sample(sample: Vec<Vec<f64>>, d0: f64) -> Result<Self> {
        if sample.len() < 2 {
            return Err(Error::InvalidArgument("need at least 2 samples".into()));
        }
        let dim = sample[0].len();
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for a in &sample {
            for j in 0..dim {
                lower[j] = lower[j].min(a[j]);
                upper[j] = upper[j].max(a[j]);
            }
        }
        let nn_distances = nearest_neighbour_distances(&sample);
        let d95 = upper_quantile(&nn_distances, 0.95);
        Ok(Self {
            sample,
            covering_box: Bounds { lower, upper },
            nn_distances,
            d95,
            d0,
        })
    }

    pub fn dim(&self) -> usize {
        self.covering_box.dim()
    }

    /// Index of and distance to the closest sample (first index on ties).
    pub fn nearest(&self, alpha: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.sample.iter().enumerate() {
            let d = squared_distance(a, alpha);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    /// Membership in the sampled manifold: nearest-neighbour distance ≤ d95.
    pub fn is_on_manifold(&self, alpha: &[f64]) -> bool {
        self.nearest(alpha).1 <= self.d95
    }
}

/// Coordinates of the database rows and its manifold statistics.
pub fn manifold_stats(basis: &EigenBasis, phi: &DMatrix<f64>) -> Result<ManifoldStats> {
    let n = phi.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 rows".into()));
    }
    let full: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = phi.row(i).iter().copied().collect();
            basis.project_k(&row, basis.retained())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<usize> = if n > D0_EXACT_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut idx = rand::seq::index::sample(&mut rng, n, D0_EXACT_LIMIT).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    // The retained axes span every centered row, so distances between full
    // coordinate vectors equal distances between rows of Φ.
    let mut d0 = f64::INFINITY;
    for (p, &i) in rows.iter().enumerate() {
        for &j in &rows[p + 1..] {
            d0 = d0.min(squared_distance(&full[i], &full[j]));
        }
    }
    let sample = full
        .into_iter()
        .map(|mut a| {
            a.resize(basis.d_prime, 0.0);
            a
        })
        .collect();
    ManifoldStats::from_sample(sample, d0.sqrt())
}

/// Distance from each point to its nearest other point (brute force).
pub fn nearest_neighbour_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut best = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(&points[i], &points[j]);
            if d < best[i] {
                best[i] = d;
            }
            if d < best[j] {
                best[j] = d;
            }
        }
    }
    best.into_iter().map(f64::sqrt).collect()
}

/// Empirical upper quantile: the ⌈qN⌉-th smallest value.
pub fn upper_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_1d_sample() {
        let s = ManifoldStats::from_sample(vec![vec![0.0], vec![1.0], vec![3.0]], 0.0).unwrap();
        assert_eq!(s.nn_distances, vec![1.0, 1.0, 2.0]);
        assert_eq!(s.d95, 2.0);
        assert_eq!(s.covering_box.lower, vec![0.0]);
        assert_eq!(s.covering_box.upper, vec![3.0]);
        // boundary case is a member
        assert!(s.is_on_manifold(&[5.0]));
        assert!(!s.is_on_manifold(&[5.0 + 1e-9]));
    }

    #[test]
    fn every_sample_is_a_member() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![(i * i) as f64, i as f64]).collect();
        let s = ManifoldStats::from_sample(pts.clone(), 0.0).unwrap();
        assert!(pts.iter().all(|p| s.is_on_manifold(p)));
    }
}
