//! R2 comparison of metamodels built on designs or on eigencoordinates.

use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::objective::Objective;
use crate::bo::latin_hypercube;
use crate::eigenbasis::{DesignSpace, ShapeSpace};
use crate::error::{Error, Result};
use crate::gp::{fit_gp, FitOptions, KernelFamily};
use crate::linalg::{mean, sample_sd};
use crate::reduction::{fit_additive, select_active, SelectionOptions};

/// 1 − Σ(y − m)² / Σ(y − ȳ)².
pub fn r2_score(predicted: &[f64], y: &[f64]) -> Result<f64> {
    if y.is_empty() || predicted.len() != y.len() {
        return Err(Error::InvalidArgument("need matching non-empty predictions and outputs".into()));
    }
    let ybar = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::InvalidArgument("constant test outputs".into()));
    }
    let ss_res: f64 = y.iter().zip(predicted).map(|(v, m)| (v - m).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetaMethod {
    /// GP on the design parameters.
    GpX,
    /// GP on the first k eigencoordinates.
    GpAlpha(usize),
    /// GP on the selected active coordinates.
    GpActive,
    /// Additive GP over the active/inactive split.
    AddGp,
}

impl fmt::Display for MetaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaMethod::GpX => write!(f, "GP(X)"),
            MetaMethod::GpAlpha(k) => write!(f, "GP(alpha_1:{k})"),
            MetaMethod::GpActive => write!(f, "GP(alpha^a)"),
            MetaMethod::AddGp => write!(f, "AddGP(alpha^a+alpha^abar)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct R2Options {
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub test_size: usize,
    pub seed: u64,
    pub kernel: KernelFamily,
    pub fit_starts: usize,
}

impl Default for R2Options {
    fn default() -> Self {
        Self {
            sizes: vec![20, 50, 100, 200],
            runs: 5,
            test_size: 500,
            seed: 0,
            kernel: KernelFamily::Matern52,
            fit_starts: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct R2Row {
    pub method: String,
    pub n: usize,
    /// R2 of every successful run.
    pub values: Vec<f64>,
    pub failures: usize,
}

impl R2Row {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            f64::NAN
        } else {
            mean(&self.values)
        }
    }

    pub fn sd(&self) -> f64 {
        sample_sd(&self.values)
    }
}

/// Per-run seed shared by every method.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(run as u64)
}

/// Input dimension of a method, used to skip it when it is not below n.
fn input_dim(method: MetaMethod, space: &ShapeSpace) -> Option<usize> {
    match method {
        MetaMethod::GpX => Some(space.design_bounds().dim()),
        MetaMethod::GpAlpha(k) => Some(k),
        MetaMethod::GpActive | MetaMethod::AddGp => None,
    }
}

/// Fits every method on Latin-hypercube designs of each size and scores it on
/// a fresh uniform test set. Methods with at least as many inputs as
/// observations are skipped.
pub fn bench_metamodels(
    space: &ShapeSpace,
    objective: Objective,
    methods: &[MetaMethod],
    opts: &R2Options,
) -> Result<Vec<R2Row>> {
    let bounds = space.design_bounds();
    let mut rows = Vec::new();
    for &n in &opts.sizes {
        let mut per_method: Vec<R2Row> = methods
            .iter()
            .map(|m| R2Row {
                method: m.to_string(),
                n,
                values: Vec::new(),
                failures: 0,
            })
            .collect();
        let active_methods: Vec<bool> = methods
            .iter()
            .map(|&m| input_dim(m, space).is_none_or(|d| d < n))
            .collect();
        if active_methods.iter().all(|a| !a) {
            continue;
        }
        for run in 0..opts.runs {
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed(opts.seed, run) ^ (n as u64) << 32);
            let train = latin_hypercube(n, bounds, &mut rng);
            let test: Vec<Vec<f64>> = (0..opts.test_size).map(|_| bounds.sample(&mut rng)).collect();
            let y: Vec<f64> = train.iter().map(|x| objective.eval(x)).collect::<Result<_>>()?;
            let y_test: Vec<f64> = test.iter().map(|x| objective.eval(x)).collect::<Result<_>>()?;
            let a: Vec<Vec<f64>> = train.iter().map(|x| space.encode(x)).collect::<Result<_>>()?;
            let a_test: Vec<Vec<f64>> = test.iter().map(|x| space.encode(x)).collect::<Result<_>>()?;
            let fit = FitOptions {
                starts: opts.fit_starts,
                seed: run_seed(opts.seed, run),
                ..FitOptions::default()
            };
            let needs_selection = methods
                .iter()
                .zip(&active_methods)
                .any(|(m, &on)| on && matches!(m, MetaMethod::GpActive | MetaMethod::AddGp));
            let selected = if needs_selection {
                let sel = SelectionOptions {
                    family: opts.kernel,
                    fit: fit.clone(),
                    ..SelectionOptions::default()
                };
                select_active(&a, &y, &sel).ok()
            } else {
                None
            };
            for ((method, row), &on) in methods.iter().zip(per_method.iter_mut()).zip(&active_methods) {
                if !on {
                    continue;
                }
                let restrict = |pts: &[Vec<f64>], coords: &[usize]| -> Vec<Vec<f64>> {
                    pts.iter().map(|p| coords.iter().map(|&c| p[c]).collect()).collect()
                };
                let predicted: Result<Vec<f64>> = match method {
                    MetaMethod::GpX => fit_gp(&train, &y, opts.kernel, 0.0, false, &fit)
                        .map(|m| test.iter().map(|x| m.predict(x).mean).collect()),
                    MetaMethod::GpAlpha(k) => {
                        let coords: Vec<usize> = (0..*k).collect();
                        fit_gp(&restrict(&a, &coords), &y, opts.kernel, 0.0, false, &fit)
                            .map(|m| restrict(&a_test, &coords).iter().map(|q| m.predict(q).mean).collect())
                    }
                    MetaMethod::GpActive => match &selected {
                        Some(s) => fit_gp(&restrict(&a, &s.active), &y, opts.kernel, 0.0, false, &fit)
                            .map(|m| restrict(&a_test, &s.active).iter().map(|q| m.predict(q).mean).collect()),
                        None => Err(Error::Numerical("selection failed".into())),
                    },
                    MetaMethod::AddGp => match &selected {
                        Some(s) => fit_additive(&a, &y, &s.active, opts.kernel, &fit)
                            .map(|m| a_test.iter().map(|q| m.predict(q).mean).collect()),
                        None => Err(Error::Numerical("selection failed".into())),
                    },
                };
                match predicted.and_then(|p| r2_score(&p, &y_test)) {
                    Ok(r2) => row.values.push(r2),
                    Err(e) => {
                        log::warn!("{method} at n={n}, run {run}: {e}");
                        row.failures += 1;
                    }
                }
            }
        }
        rows.extend(
            per_method
                .into_iter()
                .zip(&active_methods)
                .filter(|(_, &on)| on)
                .map(|(r, _)| r),
        );
    }
    Ok(rows)
}

pub fn write_r2_csv<W: Write>(out: W, rows: &[R2Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "n", "mean_r2", "sd_r2"])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.n.to_string(),
            format!("{:.5}", r.mean()),
            format!("{:.5}", r.sd()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
