//! Supervised selection of active coordinates from L1-penalized length-scales.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{fit_gp, input_ranges, is_constant, FitOptions, KernelFamily};
use crate::optim::Bounds;

/// How the length-scales are normalized before comparison.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RangeMode {
    /// Range of the observed coordinates.
    #[default]
    Sample,
    /// Width of a fixed domain.
    Domain { bounds: Bounds },
}

#[derive(Clone, Debug)]
pub struct SelectionOptions {
    pub family: KernelFamily,
    /// Penalty weight; `None` means n/d′.
    pub lambda: Option<f64>,
    /// A coordinate is active when its normalized θ is within this factor of
    /// the smallest one.
    pub ratio: f64,
    pub range: RangeMode,
    pub fit: FitOptions,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            family: KernelFamily::Matern52,
            lambda: None,
            ratio: 10.0,
            range: RangeMode::Sample,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    /// Zero-based, increasing.
    pub active: Vec<usize>,
    pub thetas: Vec<f64>,
    pub ranges: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Set when the response was constant and no fit was attempted.
    pub degenerate: bool,
}

impl ActiveSet {
    /// Fixed active coordinates without a fit behind them.
    pub fn fixed(active: Vec<usize>, dim: usize) -> Self {
        Self {
            active,
            thetas: vec![f64::NAN; dim],
            ranges: vec![f64::NAN; dim],
            normalized: vec![f64::NAN; dim],
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.thetas.len()
    }

    pub fn inactive(&self) -> Vec<usize> {
        (0..self.dim()).filter(|j| !self.active.contains(j)).collect()
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active.contains(&j)
    }

    /// `j,theta_j,range_j,normalized_theta_j,active` with 1-based j.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "theta_j", "range_j", "normalized_theta_j", "active"])?;
        for j in 0..self.dim() {
            w.write_record([
                (j + 1).to_string(),
                format!("{:e}", self.thetas[j]),
                format!("{:e}", self.ranges[j]),
                format!("{:e}", self.normalized[j]),
                (self.is_active(j) as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Definition of the active set from normalized length-scales: every j with
/// θ_j/range_j ≤ ratio·min. If that keeps everything, only the
/// min(d′, max(1, ⌊n/5⌋)) smallest are kept.
pub fn classify_active(normalized: &[f64], ratio: f64, n: usize) -> Vec<usize> {
    let d = normalized.len();
    let min = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut active: Vec<usize> = (0..d).filter(|&j| normalized[j] <= ratio * min).collect();
    if active.len() == d && d > 1 {
        let cap = d.min((n / 5).max(1));
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| normalized[a].total_cmp(&normalized[b]).then(a.cmp(&b)));
        active = order[..cap].to_vec();
        active.sort_unstable();
    }
    active
}

/// Fits an anisotropic GP over all coordinates with the L1 penalty on 1/θ
/// and classifies the coordinates. Inputs are not normalized.
pub fn select_active(alphas: &[Vec<f64>], y: &[f64], opts: &SelectionOptions) -> Result<ActiveSet> {
    let n = y.len();
    let d = alphas.first().map_or(0, Vec::len);
    if n < 2 || d == 0 || alphas.len() != n {
        return Err(Error::InvalidArgument(format!(
            "selection needs at least 2 observations of positive dimension, got n={n}, d={d}"
        )));
    }
    let ranges = match &opts.range {
        RangeMode::Sample => input_ranges(alphas),
        RangeMode::Domain { bounds } => (0..d)
            .map(|j| {
                let w = bounds.width(j);
                if w > 0.0 {
                    w
                } else {
                    1.0
                }
            })
            .collect(),
    };
    if is_constant(y) {
        log::warn!("constant response: active set reduced to the first coordinate");
        return Ok(ActiveSet {
            active: vec![0],
            thetas: ranges.clone(),
            normalized: vec![1.0; d],
            ranges,
            degenerate: true,
        });
    }
    let lambda = opts.lambda.unwrap_or(n as f64 / d as f64);
    let model = fit_gp(alphas, y, opts.family, lambda, false, &opts.fit)?;
    let thetas = model.kernel.lengthscales.clone();
    let normalized: Vec<f64> = thetas.iter().zip(&ranges).map(|(t, r)| t / r).collect();
    let active = classify_active(&normalized, opts.ratio, n);
    Ok(ActiveSet {
        active,
        thetas,
        ranges,
        normalized,
        degenerate: false,
    })
}
