//! Nelder–Mead simplex search with vertices clamped to a box.

use super::{Bounds, LocalResult};

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Initial simplex edge as a fraction of each box width.
    pub initial_step: f64,
    pub f_tol: f64,
    /// Simplex size tolerance, as a fraction of the box width.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 0.05,
            f_tol: 1e-10,
            x_tol: 1e-9,
        }
    }
}

/// `f` may return non-finite values, which are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], bounds: &Bounds, opts: &NelderMeadOptions) -> LocalResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let start = bounds.clamped(x0);
    let mut simplex = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        let h = opts.initial_step * bounds.width(i).max(1e-12);
        v[i] = if v[i] + h <= bounds.upper[i] { v[i] + h } else { v[i] - h };
        bounds.clamp(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();
    let mut iterations = 0;
    let width: Vec<f64> = (0..n).map(|i| bounds.width(i).max(1e-12)).collect();

    while evaluations < opts.max_evals {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let mut size = 0.0f64;
        for v in &simplex[1..] {
            for i in 0..n {
                size = size.max((v[i] - simplex[0][i]).abs() / width[i]);
            }
        }
        if (spread.is_finite() && spread <= opts.f_tol * (1.0 + values[0].abs())) && size <= opts.x_tol.max(1e-6)
            || size <= opts.x_tol
        {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n)
                .map(|i| centroid[i] + t * (simplex[n][i] - centroid[i]))
                .collect();
            bounds.clamp(&mut p);
            p
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let p = along(-0.5);
                let v = eval(&p, &mut evaluations);
                (p, v)
            } else {
                let p = along(0.5);
                let v = eval(&p, &mut evaluations);
                (p, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for j in 1..=n {
                    let p: Vec<f64> = (0..n)
                        .map(|i| simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i]))
                        .collect();
                    values[j] = eval(&p, &mut evaluations);
                    simplex[j] = p;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap();
    LocalResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
    }
}
