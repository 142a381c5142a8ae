//! Box-projected Levenberg–Marquardt for nonlinear least squares with a
//! finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use super::{Bounds, LocalResult};

#[derive(Clone, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative change of the residual norm below which the solver stops.
    pub f_tol: f64,
    /// Finite-difference step as a fraction of each box width.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            f_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

/// Minimizes ½‖r(x)‖² over the box. `value` in the result is ‖r‖ (not
/// squared). Monotone: the returned point is never worse than the start.
/// Returns `None` if the residual cannot be evaluated at the start.
pub fn levenberg_marquardt<F>(
    mut residual: F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &LmOptions,
) -> Option<LocalResult>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let mut x = bounds.clamped(x0);
    let mut r = DVector::from_vec(residual(&x)?);
    let mut evaluations = 1;
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return None;
    }
    let mut mu = 1e-3;
    let mut iterations = 0;

    while iterations < opts.max_iter && cost > 0.0 {
        iterations += 1;
        // Jacobian columns by central differences, one-sided at the box.
        let mut jac = DMatrix::<f64>::zeros(r.len(), n);
        for i in 0..n {
            let h = opts.fd_step * bounds.width(i).max(1e-12);
            let up = (x[i] + h).min(bounds.upper[i]);
            let lo = (x[i] - h).max(bounds.lower[i]);
            if up - lo <= 0.0 {
                continue;
            }
            let mut xp = x.clone();
            xp[i] = up;
            let mut xm = x.clone();
            xm[i] = lo;
            let rp = if up == x[i] { Some(r.as_slice().to_vec()) } else { evaluations += 1; residual(&xp) };
            let rm = if lo == x[i] { Some(r.as_slice().to_vec()) } else { evaluations += 1; residual(&xm) };
            if let (Some(rp), Some(rm)) = (rp, rm) {
                for k in 0..r.len() {
                    jac[(k, i)] = (rp[k] - rm[k]) / (up - lo);
                }
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let diag_max = (0..n).map(|i| jtj[(i, i)]).fold(0.0f64, f64::max).max(1e-300);

        let mut improved = false;
        for _ in 0..30 {
            let Some(step) = damped_step(&jtj, &jtr, mu, diag_max, &x, bounds) else {
                mu *= 4.0;
                continue;
            };
            let mut trial: Vec<f64> = (0..n).map(|i| x[i] + step[i]).collect();
            bounds.clamp(&mut trial);
            if trial == x {
                break;
            }
            evaluations += 1;
            if let Some(rt) = residual(&trial) {
                let rt = DVector::from_vec(rt);
                let ct = rt.norm_squared();
                if ct.is_finite() && ct < cost {
                    let rel = (cost - ct) / cost;
                    x = trial;
                    r = rt;
                    cost = ct;
                    mu = (mu / 3.0).max(1e-12);
                    improved = rel > opts.f_tol;
                    if !improved {
                        // converged: accept and stop
                        return Some(LocalResult {
                            x,
                            value: cost.sqrt(),
                            iterations,
                            evaluations,
                        });
                    }
                    break;
                }
            }
            mu *= 4.0;
            if mu > 1e12 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Some(LocalResult {
        x,
        value: cost.sqrt(),
        iterations,
        evaluations,
    })
}

/// Solves the damped normal equations, freezing coordinates that sit on a
/// bound and would be pushed outward.
fn damped_step(
    jtj: &DMatrix<f64>,
    jtr: &DVector<f64>,
    mu: f64,
    diag_max: f64,
    x: &[f64],
    bounds: &Bounds,
) -> Option<Vec<f64>> {
    let n = x.len();
    let mut free: Vec<usize> = (0..n).collect();
    for _ in 0..=n {
        let m = free.len();
        if m == 0 {
            return Some(vec![0.0; n]);
        }
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for (p, &i) in free.iter().enumerate() {
            b[p] = -jtr[i];
            for (q, &j) in free.iter().enumerate() {
                a[(p, q)] = jtj[(i, j)];
            }
            a[(p, p)] += mu * (jtj[(i, i)] + 1e-9 * diag_max);
        }
        let sol = a.cholesky()?.solve(&b);
        let mut step = vec![0.0; n];
        let mut blocked = Vec::new();
        for (p, &i) in free.iter().enumerate() {
            step[i] = sol[p];
            let at_lo = x[i] <= bounds.lower[i] && sol[p] < 0.0;
            let at_hi = x[i] >= bounds.upper[i] && sol[p] > 0.0;
            if at_lo || at_hi {
                blocked.push(i);
            }
        }
        if blocked.is_empty() {
            return Some(step);
        }
        free.retain(|i| !blocked.contains(i));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential_decay() {
        let ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.5 * (-0.7 * t).exp()).collect();
        let res = |p: &[f64]| Some(ts.iter().zip(&ys).map(|(t, y)| p[0] * (-p[1] * t).exp() - y).collect());
        let b = Bounds::new(vec![0.0, 0.0], vec![10.0, 5.0]).unwrap();
        let r = levenberg_marquardt(res, &[1.0, 2.0], &b, &LmOptions::default()).unwrap();
        assert!((r.x[0] - 2.5).abs() < 1e-5 && (r.x[1] - 0.7).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds() {
        // unconstrained optimum at (3, -1); box forces (1, 0)
        let res = |p: &[f64]| Some(vec![p[0] - 3.0, p[1] + 1.0]);
        let b = Bounds::uniform(2, 0.0, 1.0);
        let r = levenberg_marquardt(res, &[0.5, 0.5], &b, &LmOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-9 && r.x[1].abs() < 1e-9, "{:?}", r.x);
    }
}
