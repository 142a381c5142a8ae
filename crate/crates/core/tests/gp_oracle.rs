//! Dense-algebra and finite-difference oracles for the GP layer.

use eigenshape::acquisition::{ei_gradient, ei_value, expected_improvement, Surrogate};
use eigenshape::gp::{concentrated_loglik, fit_gp, FitOptions, GpModel, KernelFamily, KernelSpec};
use eigenshape::reduction::{fit_additive, AdditiveGpModel, AdditiveKernel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn matern52(u: &[f64], v: &[f64], theta: &[f64]) -> f64 {
    let r2: f64 = u.iter().zip(v).zip(theta).map(|((a, b), t)| ((a - b) / t).powi(2)).sum();
    let s = (5.0 * r2).sqrt();
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn random_data(n: usize, p: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y = x.iter().map(|v| v.iter().map(|t| (2.0 * t).sin()).sum::<f64>() + 0.3 * v[0] * v[0]).collect();
    (x, y)
}

/// Simple kriging with a GLS constant, computed from an explicit inverse.
struct DenseOracle {
    kinv: DMatrix<f64>,
    beta: f64,
    resid: DVector<f64>,
    var: f64,
}

impl DenseOracle {
    fn new(k: &DMatrix<f64>, y: &[f64], var: f64) -> Self {
        let n = y.len();
        let kinv = k.clone().try_inverse().unwrap();
        let ones = DVector::from_element(n, 1.0);
        let yv = DVector::from_column_slice(y);
        let beta = (ones.transpose() * &kinv * &yv)[0] / (ones.transpose() * &kinv * &ones)[0];
        let resid = yv - ones * beta;
        Self { kinv, beta, resid, var }
    }

    fn predict(&self, kq: &DVector<f64>) -> (f64, f64) {
        let m = self.beta + (kq.transpose() * &self.kinv * &self.resid)[0];
        let v = self.var - (kq.transpose() * &self.kinv * kq)[0];
        (m, v)
    }
}

fn plain_model(n: usize, p: usize, seed: u64) -> GpModel {
    let (x, y) = random_data(n, p, seed);
    let theta: Vec<f64> = (0..p).map(|j| 0.4 + 0.3 * j as f64).collect();
    GpModel::with_kernel(KernelSpec::new(KernelFamily::Matern52, theta, 1.7).unwrap(), x, y, 0.0).unwrap()
}

#[test]
fn plain_predictions_match_dense_algebra() {
    for n in 1..=5 {
        let p = 2;
        let model = plain_model(n, p, 10 + n as u64);
        let theta = &model.kernel.lengthscales;
        let var = model.kernel.variance;
        let x = &model.posterior.inputs;
        let mut k = DMatrix::from_fn(n, n, |i, j| var * matern52(&x[i], &x[j], theta));
        for i in 0..n {
            k[(i, i)] += model.posterior.nugget * var;
        }
        let oracle = DenseOracle::new(&k, &model.posterior.outputs, var);
        assert!((oracle.beta - model.beta_hat()).abs() <= 1e-10 * (1.0 + oracle.beta.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let q: Vec<f64> = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
            let kq = DVector::from_iterator(n, x.iter().map(|xi| var * matern52(&q, xi, theta)));
            let (m, v) = oracle.predict(&kq);
            let pred = model.predict(&q);
            assert!((pred.mean - m).abs() <= 1e-10 * (1.0 + m.abs()), "n={n}: {} vs {m}", pred.mean);
            assert!((pred.variance - v.max(0.0)).abs() <= 1e-10 * var, "n={n}: {} vs {v}", pred.variance);
        }
    }
}

#[test]
fn additive_predictions_match_dense_algebra() {
    let (x, y) = random_data(5, 3, 4);
    let kernel = AdditiveKernel {
        dim: 3,
        active: vec![0, 2],
        inactive: vec![1],
        kernel_active: KernelSpec::new(KernelFamily::Matern52, vec![0.5, 0.8], 2.0).unwrap(),
        kernel_inactive: Some(KernelSpec::new(KernelFamily::Matern52, vec![1.3], 0.3).unwrap()),
    };
    let model = AdditiveGpModel::with_kernel(kernel, x.clone(), y.clone(), 0.0).unwrap();
    let kf = |u: &[f64], v: &[f64]| {
        2.0 * matern52(&[u[0], u[2]], &[v[0], v[2]], &[0.5, 0.8]) + 0.3 * matern52(&[u[1]], &[v[1]], &[1.3])
    };
    let mut k = DMatrix::from_fn(5, 5, |i, j| kf(&x[i], &x[j]));
    for i in 0..5 {
        k[(i, i)] += model.posterior.nugget * 2.3;
    }
    let oracle = DenseOracle::new(&k, &y, 2.3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let kq = DVector::from_iterator(5, x.iter().map(|xi| kf(&q, xi)));
        let (m, v) = oracle.predict(&kq);
        let pred = model.predict(&q);
        assert!((pred.mean - m).abs() <= 1e-10 * (1.0 + m.abs()));
        assert!((pred.variance - v.max(0.0)).abs() <= 1e-10 * 2.3);
    }
}

#[test]
fn concentrated_likelihood_matches_dense_formula() {
    for n in 2..=5 {
        let (x, y) = random_data(n, 2, 20 + n as u64);
        let theta = [0.6, 0.9];
        let lambda = 0.37;
        let c = concentrated_loglik(&x, &y, KernelFamily::Matern52, &theta, lambda).unwrap();
        let mut r = DMatrix::from_fn(n, n, |i, j| matern52(&x[i], &x[j], &theta));
        for i in 0..n {
            r[(i, i)] += c.nugget;
        }
        let rinv = r.clone().try_inverse().unwrap();
        let ones = DVector::from_element(n, 1.0);
        let yv = DVector::from_column_slice(&y);
        let beta = (ones.transpose() * &rinv * &yv)[0] / (ones.transpose() * &rinv * &ones)[0];
        let e = &yv - &ones * beta;
        let s2 = (e.transpose() * &rinv * &e)[0] / n as f64;
        let logdet = r.determinant().ln();
        let expected = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI).ln() + s2.ln() + 1.0)
            - 0.5 * logdet
            - lambda * (1.0 / theta[0] + 1.0 / theta[1]);
        assert!((c.value - expected).abs() <= 1e-10 * (1.0 + expected.abs()), "n={n}: {} vs {expected}", c.value);
        assert!((c.beta_hat - beta).abs() <= 1e-10 * (1.0 + beta.abs()));
        assert!((c.sigma2_hat - s2).abs() <= 1e-10 * s2);
    }
}

#[test]
fn likelihood_gradient_matches_finite_differences() {
    let (x, y) = random_data(12, 3, 7);
    let theta = [0.5, 0.9, 1.4];
    let lambda = 0.2;
    let c = concentrated_loglik(&x, &y, KernelFamily::Matern52, &theta, lambda).unwrap();
    for j in 0..3 {
        let h: f64 = 1e-5;
        let mut up = theta;
        let mut dn = theta;
        up[j] *= h.exp();
        dn[j] *= (-h).exp();
        let fu = concentrated_loglik(&x, &y, KernelFamily::Matern52, &up, lambda).unwrap().value;
        let fd = concentrated_loglik(&x, &y, KernelFamily::Matern52, &dn, lambda).unwrap().value;
        let num = (fu - fd) / (2.0 * h);
        assert!((c.grad[j] - num).abs() <= 1e-5 * (1.0 + num.abs()), "{j}: {} vs {num}", c.grad[j]);
    }
}

#[test]
fn ei_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let draws = 10_000_000usize;
    for &(m, s, a) in &[(0.0, 1.0, 0.0), (1.0, 0.5, 0.3), (-0.4, 2.0, 0.5)] {
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..draws {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = (a - (m + s * z)).max(0.0);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / draws as f64;
        let se = ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        let ei = ei_value(m, s, a);
        assert!((ei - mean).abs() <= 3.0 * se, "EI {ei} vs MC {mean} ± {se}");
    }
}

#[test]
fn ei_of_model_matches_monte_carlo() {
    let model = plain_model(4, 2, 3);
    let q = [0.2, -0.3];
    let a = model.posterior.outputs.iter().cloned().fold(f64::INFINITY, f64::min);
    let p = model.predict(&q);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 10_000_000usize;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let v = (a - (p.mean + p.sd() * z)).max(0.0);
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / draws as f64;
    let se = ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt();
    let ei = expected_improvement(&model, &q, a);
    assert!((ei - mean).abs() <= 3.0 * se, "EI {ei} vs MC {mean} ± {se}");
}

/// Central differences of m, s and EI against the analytic gradients at
/// `queries` random points; returns the worst relative error.
fn worst_gradient_error<M: Surrogate>(model: &M, queries: usize, lo: f64, hi: f64, seed: u64) -> f64 {
    let p = model.input_dim();
    let a = model_threshold(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < queries {
        let q: Vec<f64> = (0..p).map(|_| rng.random_range(lo..hi)).collect();
        let Ok(g) = model.predict_gradient(&q) else { continue };
        if g.sd < 1e-4 {
            continue;
        }
        let (_, gei) = ei_gradient(model, &q, a).unwrap();
        for l in 0..p {
            let h = 1e-6 * (hi - lo);
            let mut up = q.clone();
            let mut dn = q.clone();
            up[l] += h;
            dn[l] -= h;
            let (pu, pd) = (model.predict(&up), model.predict(&dn));
            let dm = (pu.mean - pd.mean) / (2.0 * h);
            let ds = (pu.sd() - pd.sd()) / (2.0 * h);
            let de = (expected_improvement(model, &up, a) - expected_improvement(model, &dn, a)) / (2.0 * h);
            let gnorm_m = g.grad_mean.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-8);
            let gnorm_s = g.grad_sd.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-8);
            let gnorm_e = gei.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-8);
            worst = worst
                .max((g.grad_mean[l] - dm).abs() / gnorm_m)
                .max((g.grad_sd[l] - ds).abs() / gnorm_s)
                .max((gei[l] - de).abs() / gnorm_e);
        }
        done += 1;
    }
    worst
}

fn model_threshold<M: Surrogate>(model: &M) -> f64 {
    model.predict(&vec![0.0; model.input_dim()]).mean
}

#[test]
fn plain_gradients_match_finite_differences() {
    let (x, y) = random_data(15, 3, 2);
    let model = fit_gp(&x, &y, KernelFamily::Matern52, 0.0, false, &FitOptions::default()).unwrap();
    let worst = worst_gradient_error(&model, 100, -1.2, 1.2, 17);
    assert!(worst <= 1e-5, "worst relative error {worst}");
}

#[test]
fn additive_gradients_match_finite_differences() {
    let (x, y) = random_data(15, 4, 3);
    let model = fit_additive(&x, &y, &[0, 1], KernelFamily::Matern52, &FitOptions::default()).unwrap();
    let worst = worst_gradient_error(&model, 100, -1.2, 1.2, 18);
    assert!(worst <= 1e-5, "worst relative error {worst}");
}

#[test]
fn model_interpolates_training_data() {
    let (x, y) = random_data(10, 2, 11);
    let model = fit_gp(&x, &y, KernelFamily::Matern52, 0.0, false, &FitOptions::default()).unwrap();
    for (xi, yi) in x.iter().zip(&y) {
        let p = model.predict(xi);
        assert!((p.mean - yi).abs() < 1e-5 * (1.0 + yi.abs()));
        assert!(p.variance < 1e-6 * model.kernel.variance);
    }
}

#[test]
fn lengthscale_is_recovered_from_a_sample_path() {
    // draw y ~ GP(0, Matérn(θ = 0.3)) on 60 points and refit
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 60;
    let x: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + rng.random::<f64>()) / n as f64 * 2.0]).collect();
    let k = DMatrix::from_fn(n, n, |i, j| matern52(&x[i], &x[j], &[0.3]) + if i == j { 1e-10 } else { 0.0 });
    let l = k.cholesky().unwrap().l();
    let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
    let y: Vec<f64> = (l * z).iter().copied().collect();
    let model = fit_gp(&x, &y, KernelFamily::Matern52, 0.0, false, &FitOptions::default()).unwrap();
    let t = model.kernel.lengthscales[0];
    assert!(t > 0.15 && t < 0.6, "fitted θ = {t}");
}

#[test]
fn constant_response_gives_a_flat_model() {
    let (x, _) = random_data(6, 2, 1);
    let y = vec![3.5; 6];
    let m = fit_additive(&x, &y, &[0], KernelFamily::Matern52, &FitOptions::default()).unwrap();
    let p = m.predict(&[0.1, 0.2]);
    assert_eq!(p.mean, 3.5);
    assert_eq!(p.variance, 0.0);
}

#[test]
fn additive_fit_ignores_irrelevant_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<Vec<f64>> = (0..40).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|v| (3.0 * v[0]).sin()).collect();
    let m = fit_additive(&x, &y, &[0], KernelFamily::Matern52, &FitOptions::default()).unwrap();
    let va = m.kernel.kernel_active.variance;
    let vi = m.kernel.kernel_inactive.as_ref().unwrap().variance;
    assert!(vi <= 0.05 * va, "σ²_ā = {vi}, σ²_a = {va}");
}
