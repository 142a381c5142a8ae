//! Random line embedding of the inactive coordinates.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::optim::Bounds;

/// α = A_emb [α^a, ᾱ]: active coordinates are kept, the inactive ones move
/// along the unit direction ā.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpec {
    pub dim: usize,
    pub active: Vec<usize>,
    pub inactive: Vec<usize>,
    /// Direction over the inactive coordinates, unit length.
    pub a_bar: Vec<f64>,
    /// [ᾱ_min, ᾱ_max]
    pub bounds: (f64, f64),
}

impl EmbeddingSpec {
    /// d′ × (δ + 1).
    pub fn matrix(&self) -> DMatrix<f64> {
        let delta = self.active.len();
        let mut a = DMatrix::zeros(self.dim, delta + 1);
        for (k, &i) in self.active.iter().enumerate() {
            a[(i, k)] = 1.0;
        }
        for (&i, &v) in self.inactive.iter().zip(&self.a_bar) {
            a[(i, delta)] = v;
        }
        a
    }

    /// A_emb z with z = [α^a, ᾱ].
    pub fn map(&self, z: &[f64]) -> Vec<f64> {
        let delta = self.active.len();
        let mut alpha = vec![0.0; self.dim];
        for (k, &i) in self.active.iter().enumerate() {
            alpha[i] = z[k];
        }
        for (&i, &v) in self.inactive.iter().zip(&self.a_bar) {
            alpha[i] = z[delta] * v;
        }
        alpha
    }

    /// A_embᵀ g.
    pub fn pull_back(&self, g: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.active.iter().map(|&i| g[i]).collect();
        out.push(self.inactive.iter().zip(&self.a_bar).map(|(&i, v)| g[i] * v).sum());
        out
    }

    /// Closest point of the embedded set in the least-squares sense.
    pub fn coordinates_of(&self, alpha: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = self.active.iter().map(|&i| alpha[i]).collect();
        let inactive: Vec<f64> = self.inactive.iter().map(|&i| alpha[i]).collect();
        z.push(dot(&inactive, &self.a_bar));
        z
    }

    /// Search box of [α^a, ᾱ] given the box of the active coordinates.
    pub fn search_bounds(&self, coord_box: &Bounds) -> Bounds {
        let mut b = coord_box.select(&self.active);
        b.lower.push(self.bounds.0);
        b.upper.push(self.bounds.1);
        b
    }
}

/// Draws ā with i.i.d. standard normal entries, normalized. Bounds are left
/// at [0, 0]; see [`embed_bounds`].
pub fn draw_embedding<R: Rng + ?Sized>(active: &[usize], dim: usize, rng: &mut R) -> Result<EmbeddingSpec> {
    if active.iter().any(|&i| i >= dim) {
        return Err(Error::InvalidArgument(format!("active set {active:?} outside dimension {dim}")));
    }
    let inactive: Vec<usize> = (0..dim).filter(|i| !active.contains(i)).collect();
    if inactive.is_empty() {
        return Err(Error::InvalidArgument("no inactive coordinate to embed".into()));
    }
    let mut a_bar: Vec<f64> = Vec::new();
    let mut len = 0.0;
    while !(len > 1e-12) {
        a_bar = (0..inactive.len()).map(|_| rng.sample(StandardNormal)).collect();
        len = norm(&a_bar);
    }
    a_bar.iter_mut().for_each(|v| *v /= len);
    Ok(EmbeddingSpec {
        dim,
        active: active.to_vec(),
        inactive,
        a_bar,
        bounds: (0.0, 0.0),
    })
}

/// Range of ᾱ: the projections of `sample` on ā (the box constraints alone
/// when the sample is empty), shrunk so that ᾱā stays inside `coord_box` on
/// every inactive coordinate. Empty intersections give [0, 0].
pub fn embed_bounds(sample: &[Vec<f64>], coord_box: &Bounds, spec: &EmbeddingSpec) -> (f64, f64) {
    let (mut lo, mut hi) = if sample.is_empty() {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        sample
            .iter()
            .map(|a| spec.inactive.iter().zip(&spec.a_bar).map(|(&i, v)| a[i] * v).sum::<f64>())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p), h.max(p)))
    };
    for (&i, &v) in spec.inactive.iter().zip(&spec.a_bar) {
        if v == 0.0 {
            continue;
        }
        let (a, b) = (coord_box.lower[i] / v, coord_box.upper[i] / v);
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    if lo > hi || !lo.is_finite() || !hi.is_finite() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}
