//! Dense BFGS with a backtracking Armijo line search.

use nalgebra::{DMatrix, DVector};

use super::LocalResult;

#[derive(Clone, Debug)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the largest gradient entry falls below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease of one iteration falls below this.
    pub f_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-7,
            f_tol: 1e-11,
        }
    }
}

/// Minimizes `f`, which returns the value and gradient or `None` where it
/// cannot be evaluated. Returns `None` only if `x0` itself fails.
pub fn bfgs_minimize<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Option<LocalResult>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut evaluations = 1;
    let (mut fx, g0) = f(x0).filter(|(v, g)| v.is_finite() && g.iter().all(|x| x.is_finite()))?;
    let mut x = DVector::from_column_slice(x0);
    let mut g = DVector::from_vec(g0);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    let mut first = true;
    let mut stalls = 0;

    while iterations < opts.max_iter {
        if g.amax() < opts.grad_tol {
            break;
        }
        iterations += 1;
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h = DMatrix::identity(n, n);
            d = -g.clone();
            slope = -g.norm_squared();
        }
        let mut t = if first { (1.0 / g.norm()).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..50 {
            let trial = &x + &d * t;
            evaluations += 1;
            if let Some((ft, gt)) = f(trial.as_slice()) {
                if ft.is_finite()
                    && gt.iter().all(|v| v.is_finite())
                    && ft <= fx + 1e-4 * t * slope
                {
                    accepted = Some((trial, ft, DVector::from_vec(gt)));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            if first {
                h *= sy / y.norm_squared();
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy' + hy s') + (rho^2 yHy + rho) s s'
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
            first = false;
        }
        let decrease = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if decrease <= opts.f_tol * (1.0 + fx.abs()) {
            stalls += 1;
            if stalls >= 2 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Some(LocalResult {
        x: x.as_slice().to_vec(),
        value: fx,
        iterations,
        evaluations,
    })
}
