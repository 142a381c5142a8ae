//! Spectral projected gradient for box-constrained problems (nonmonotone
//! Barzilai–Borwein steps with a GLL line search).

use super::{Bounds, LocalResult};

#[derive(Clone, Debug)]
pub struct SpgOptions {
    pub max_iter: usize,
    /// Stop when the projected step is below `x_tol` times the mean box width.
    pub x_tol: f64,
    pub memory: usize,
}

impl Default for SpgOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            x_tol: 1e-9,
            memory: 10,
        }
    }
}

pub fn projected_gradient_minimize<F>(
    mut f: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &SpgOptions,
) -> Option<LocalResult>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let scale = (0..n).map(|i| bounds.width(i)).sum::<f64>() / n.max(1) as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut x = bounds.clamped(x0);
    let (mut fx, mut g) = f(&x).filter(|(v, g)| v.is_finite() && g.iter().all(|t| t.is_finite()))?;
    let mut evaluations = 1;
    let mut history = vec![fx];
    let ginf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut step = if ginf > 0.0 { 0.1 * scale / ginf } else { 1.0 };
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut d: Vec<f64> = (0..n)
            .map(|i| (x[i] - step * g[i]).clamp(bounds.lower[i], bounds.upper[i]) - x[i])
            .collect();
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if dmax < opts.x_tol * scale {
            break;
        }
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            break;
        }
        let fref = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..n)
                .map(|i| (x[i] + t * d[i]).clamp(bounds.lower[i], bounds.upper[i]))
                .collect();
            evaluations += 1;
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite() && gt.iter().all(|v| v.is_finite()) && ft <= fref + 1e-4 * t * slope
                {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };
        for (i, di) in d.iter_mut().enumerate() {
            *di = x_new[i] - x[i];
        }
        let sy: f64 = (0..n).map(|i| d[i] * (g_new[i] - g[i])).sum();
        let ss: f64 = d.iter().map(|v| v * v).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-30, 1e30) } else { 1e3 * step.max(1e-30) }.min(1e30);
        x = x_new;
        g = g_new;
        fx = f_new;
        history.push(fx);
        if history.len() > opts.memory {
            history.remove(0);
        }
    }
    Some(LocalResult {
        x,
        value: fx,
        iterations,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_bound_quadratic() {
        // minimum of (x-2)^2 + (y+1)^2 on [0,1]^2 is at (1,0)
        let f = |x: &[f64]| {
            Some((
                (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2),
                vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] + 1.0)],
            ))
        };
        let b = Bounds::uniform(2, 0.0, 1.0);
        let r = projected_gradient_minimize(f, &[0.5, 0.5], &b, &SpgOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-12 && r.x[1].abs() < 1e-12);
    }

    #[test]
    fn tiny_scale_objective() {
        // scaled so the objective is ~1e-12: the stopping rule must not be absolute
        let f = |x: &[f64]| {
            let c = 1e-12;
            Some((c * (x[0] - 0.3).powi(2), vec![2.0 * c * (x[0] - 0.3)]))
        };
        let b = Bounds::uniform(1, -1.0, 1.0);
        let r = projected_gradient_minimize(f, &[0.9], &b, &SpgOptions::default()).unwrap();
        assert!((r.x[0] - 0.3).abs() < 1e-6, "{:?}", r.x);
    }
}
