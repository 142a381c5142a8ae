//! Latin-hypercube initial designs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::optim::Bounds;

/// n points, exactly one in each of the n slices of every coordinate.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, bounds: &Bounds, rng: &mut R) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    let mut points = vec![vec![0.0; d]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for (i, p) in points.iter_mut().enumerate() {
            let u = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
            p[j] = bounds.lower[j] + u * bounds.width(j);
        }
    }
    points
}
