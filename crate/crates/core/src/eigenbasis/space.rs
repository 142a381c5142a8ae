//! Design spaces seen through their eigencoordinates, and the pre-image
//! problem.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::manifold::{manifold_stats, ManifoldStats};
use super::pca::{pca_fit, EigenBasis, PcaRoute, TruncationPolicy};
use crate::error::{Error, Result};
use crate::linalg::{distance, squared_distance};
use crate::optim::{levenberg_marquardt, Bounds, LmOptions};
use crate::shapes::{Family, MappingSpec, ShapeDatabase};

/// Outcome of a pre-image search.
#[derive(Clone, Debug)]
pub struct PreImage {
    pub x: Vec<f64>,
    /// Coordinates of the design found.
    pub alpha: Vec<f64>,
    /// ‖(φ(x) − φ̄) − Vα*‖.
    pub residual: f64,
    /// False when every local search failed and a start point was returned.
    pub converged: bool,
}

/// The coordinate system a Bayesian optimization works in.
pub trait DesignSpace {
    /// Number of coordinates d′.
    fn coord_dim(&self) -> usize;
    fn design_bounds(&self) -> &Bounds;
    /// Box covering the coordinates of all known designs.
    fn coord_box(&self) -> &Bounds;
    fn encode(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn pre_image(&self, alpha_star: &[f64], seed: u64) -> Result<PreImage>;
    fn is_on_manifold(&self, alpha: &[f64]) -> bool;
    /// Replication threshold.
    fn d0(&self) -> f64;
    /// Coordinates of the known designs (may be empty).
    fn coord_sample(&self) -> &[Vec<f64>];
    /// Prior variance of each coordinate.
    fn coord_variances(&self) -> Vec<f64>;
}

#[derive(Clone, Debug)]
pub struct PreImageOptions {
    pub starts: usize,
    /// How many of the starts are the closest database designs.
    pub nearest: usize,
    pub lm: LmOptions,
}

impl Default for PreImageOptions {
    fn default() -> Self {
        Self {
            starts: 10,
            nearest: 5,
            lm: LmOptions {
                max_iter: 100,
                f_tol: 1e-8,
                fd_step: 1e-6,
            },
        }
    }
}

/// A shape family with its fitted eigenbasis and manifold statistics.
#[derive(Clone, Debug)]
pub struct ShapeSpace {
    pub family: Family,
    pub mapping: MappingSpec,
    pub basis: EigenBasis,
    pub stats: ManifoldStats,
    pub designs: Vec<Vec<f64>>,
    pub bounds: Bounds,
    pub pre_image_options: PreImageOptions,
}

impl ShapeSpace {
    /// PCA of the database, truncation to d′ = min(d, d̃) and manifold statistics.
    pub fn build(db: &ShapeDatabase, policy: TruncationPolicy) -> Result<Self> {
        let mut basis = pca_fit(&db.phi, PcaRoute::Auto)?;
        basis.truncate(db.family.dim(), policy)?;
        Self::from_basis(db, basis)
    }

    pub fn from_basis(db: &ShapeDatabase, basis: EigenBasis) -> Result<Self> {
        let stats = manifold_stats(&basis, &db.phi)?;
        Ok(Self {
            family: db.family,
            mapping: db.mapping.clone(),
            basis,
            stats,
            designs: db.designs.clone(),
            bounds: db.family.bounds(),
            pre_image_options: PreImageOptions::default(),
        })
    }

    pub fn phi(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.mapping.apply(self.family, x)
    }

    /// k_φ(x, x') from the polarization identity.
    pub fn equivalent_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let px = self.phi(x)?;
        let py = self.phi(y)?;
        let nx = squared_distance(&px, &self.basis.mean);
        let ny = squared_distance(&py, &self.basis.mean);
        Ok(0.5 * (nx + ny - squared_distance(&px, &py)))
    }
}

impl DesignSpace for ShapeSpace {
    fn coord_dim(&self) -> usize {
        self.basis.d_prime
    }

    fn design_bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn coord_box(&self) -> &Bounds {
        &self.stats.covering_box
    }

    fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.basis.project(&self.phi(x)?)
    }

    fn pre_image(&self, alpha_star: &[f64], seed: u64) -> Result<PreImage> {
        if alpha_star.len() != self.coord_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coord_dim(),
                got: alpha_star.len(),
            });
        }
        if alpha_star.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite target coordinates".into()));
        }
        let target = self.basis.reconstruct(alpha_star, alpha_star.len())?;
        let opts = &self.pre_image_options;

        let mut order: Vec<(usize, f64)> = self
            .stats
            .sample
            .iter()
            .enumerate()
            .map(|(i, a)| (i, squared_distance(a, alpha_star)))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut starts: Vec<Vec<f64>> = order
            .iter()
            .take(opts.nearest.min(opts.starts))
            .map(|(i, _)| self.bounds.clamped(&self.designs[*i]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while starts.len() < opts.starts.max(1) {
            starts.push(self.bounds.sample(&mut rng));
        }

        let residual = |x: &[f64]| -> Option<Vec<f64>> {
            let phi = self.phi(x).ok()?;
            Some(phi.iter().zip(&target).map(|(p, t)| p - t).collect())
        };
        // best residual wins, earlier start on ties
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut failures = 0;
        for s in &starts {
            match levenberg_marquardt(residual, s, &self.bounds, &opts.lm) {
                Some(r) if best.as_ref().is_none_or(|b| r.value < b.1) => best = Some((r.x, r.value)),
                Some(_) => {}
                None => failures += 1,
            }
        }
        let converged = failures == 0;
        let (x, residual) = best.ok_or_else(|| {
            Error::Numerical("pre-image: no start point could be evaluated".into())
        })?;
        let alpha = self.encode(&x)?;
        Ok(PreImage {
            x,
            alpha,
            residual,
            converged,
        })
    }

    fn is_on_manifold(&self, alpha: &[f64]) -> bool {
        self.stats.is_on_manifold(alpha)
    }

    fn d0(&self) -> f64 {
        self.stats.d0
    }

    fn coord_sample(&self) -> &[Vec<f64>] {
        &self.stats.sample
    }

    fn coord_variances(&self) -> Vec<f64> {
        self.basis.eigenvalues[..self.basis.d_prime].to_vec()
    }
}

/// A space whose coordinates are the design parameters themselves.
#[derive(Clone, Debug)]
pub struct IdentitySpace {
    pub bounds: Bounds,
}

impl DesignSpace for IdentitySpace {
    fn coord_dim(&self) -> usize {
        self.bounds.dim()
    }

    fn design_bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn coord_box(&self) -> &Bounds {
        &self.bounds
    }

    fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.bounds.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.dim(),
                got: x.len(),
            });
        }
        Ok(x.to_vec())
    }

    fn pre_image(&self, alpha_star: &[f64], _seed: u64) -> Result<PreImage> {
        let x = self.bounds.clamped(alpha_star);
        let residual = distance(&x, alpha_star);
        Ok(PreImage {
            alpha: x.clone(),
            x,
            residual,
            converged: true,
        })
    }

    fn is_on_manifold(&self, alpha: &[f64]) -> bool {
        self.bounds.contains(alpha)
    }

    fn d0(&self) -> f64 {
        0.0
    }

    fn coord_sample(&self) -> &[Vec<f64>] {
        &[]
    }

    fn coord_variances(&self) -> Vec<f64> {
        (0..self.bounds.dim()).map(|i| self.bounds.width(i).powi(2) / 12.0).collect()
    }
}
