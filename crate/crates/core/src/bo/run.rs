//! The Bayesian-optimization loop with replication of off-manifold targets.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BoSettings, DoeSpace, SurrogateSpec};
use super::doe::latin_hypercube;
use crate::acquisition::{maximize_ei, Incumbent, SubsetModel, Surrogate};
use crate::eigenbasis::DesignSpace;
use crate::error::{Error, Result};
use crate::gp::{fit_gp, FitOptions};
use crate::linalg::distance;
use crate::reduction::{fit_additive, select_active, ActiveSet, AdditiveGpModel, SelectionOptions};

/// Replicated rows closer than this (relative to the box diagonal) to an
/// existing row are dropped.
const COLLISION_TOL: f64 = 1e-9;

/// One training row. Replicated rows carry the y of the real row evaluated in
/// the same iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub alpha: Vec<f64>,
    pub y: f64,
    /// The evaluated design; `None` for replicated rows.
    pub x: Option<Vec<f64>>,
    pub iter: usize,
}

impl Row {
    pub fn is_replicated(&self) -> bool {
        self.x.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct LogRow {
    pub iter: usize,
    /// 1-based count of true evaluations so far.
    pub eval_index: usize,
    pub x: Option<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub y: f64,
    pub f_min: f64,
    pub replicated: bool,
    pub strategy: String,
    pub active_set: Vec<usize>,
    pub ei: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RunState {
    pub rows: Vec<Row>,
    pub f_min: f64,
    pub iteration: usize,
    pub evaluations: usize,
    /// f_min after each true evaluation.
    pub trace: Vec<f64>,
    pub log: Vec<LogRow>,
    pub active: Option<ActiveSet>,
    rng: ChaCha8Rng,
}

impl RunState {
    pub fn real_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.is_replicated())
    }

    /// Best real row (first one on ties).
    pub fn best(&self) -> Option<&Row> {
        self.real_rows().fold(None, |b: Option<&Row>, r| match b {
            Some(b) if b.y <= r.y => Some(b),
            _ => Some(r),
        })
    }

    fn record(&mut self, row: Row, strategy: &str, active: &[usize], ei: Option<f64>, wall_ms: f64) {
        let replicated = row.is_replicated();
        if !replicated {
            self.evaluations += 1;
            self.f_min = self.f_min.min(row.y);
            self.trace.push(self.f_min);
        }
        self.log.push(LogRow {
            iter: row.iter,
            eval_index: self.evaluations,
            x: row.x.clone(),
            alpha: row.alpha.clone(),
            y: row.y,
            f_min: self.f_min,
            replicated,
            strategy: strategy.to_string(),
            active_set: active.to_vec(),
            ei,
            wall_ms,
        });
        self.rows.push(row);
    }

    /// Writes the run log: one line per training row.
    pub fn write_log<W: Write>(&self, out: W, design_dim: usize, coord_dim: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iter".to_string(), "eval_index".to_string()];
        header.extend((1..=design_dim).map(|j| format!("x_{j}")));
        header.extend((1..=coord_dim).map(|j| format!("alpha_{j}")));
        for h in ["y", "f_min", "replicated", "strategy", "active_set", "ei_value", "wall_ms"] {
            header.push(h.to_string());
        }
        w.write_record(&header)?;
        for r in &self.log {
            let mut rec = vec![r.iter.to_string(), r.eval_index.to_string()];
            match &r.x {
                Some(x) => rec.extend(x.iter().map(|v| v.to_string())),
                None => rec.extend(std::iter::repeat_n(String::new(), design_dim)),
            }
            rec.extend(r.alpha.iter().map(|v| v.to_string()));
            rec.push(r.y.to_string());
            rec.push(r.f_min.to_string());
            rec.push(r.replicated.to_string());
            rec.push(r.strategy.clone());
            rec.push(r.active_set.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(";"));
            rec.push(r.ei.map_or(String::new(), |v| v.to_string()));
            rec.push(format!("{:.3}", r.wall_ms));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    pub best_y: f64,
    pub trace: Vec<f64>,
    pub state: RunState,
}

enum Fitted {
    Plain(SubsetModel),
    Additive(AdditiveGpModel),
}

impl Fitted {
    fn surrogate(&self) -> &dyn Surrogate {
        match self {
            Fitted::Plain(m) => m,
            Fitted::Additive(m) => m,
        }
    }
}

/// Evaluates an n₀-point Latin hypercube. In coordinate space every sample is
/// turned into a design by its pre-image.
pub fn initial_doe<S, F>(space: &S, settings: &BoSettings, objective: &mut F) -> Result<RunState>
where
    S: DesignSpace + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut state = RunState {
        rows: Vec::new(),
        f_min: f64::INFINITY,
        iteration: 0,
        evaluations: 0,
        trace: Vec::new(),
        log: Vec::new(),
        active: None,
        rng: ChaCha8Rng::seed_from_u64(0),
    };
    let started = Instant::now();
    let designs: Vec<Vec<f64>> = match settings.doe {
        DoeSpace::Design => latin_hypercube(settings.n0, space.design_bounds(), &mut rng),
        DoeSpace::Coordinates => {
            let dim = space.coord_dim();
            let coords = match &settings.surrogate {
                SurrogateSpec::Plain { coords: Some(c) } => c.clone(),
                _ => (0..dim).collect(),
            };
            let cbox = space.coord_box();
            let base = cbox.clamped(&vec![0.0; dim]);
            let lhs = latin_hypercube(settings.n0, &cbox.select(&coords), &mut rng);
            let mut out = Vec::with_capacity(lhs.len());
            for p in lhs {
                let mut alpha = base.clone();
                for (&c, v) in coords.iter().zip(p) {
                    alpha[c] = v;
                }
                out.push(space.pre_image(&alpha, rng.random())?.x);
            }
            out
        }
    };
    for x in designs {
        let alpha = space.encode(&x)?;
        let y = objective(&x).map_err(|e| Error::Numerical(format!("initial design failed: {e}")))?;
        let wall = started.elapsed().as_secs_f64() * 1e3;
        state.record(
            Row {
                alpha,
                y,
                x: Some(x),
                iter: 0,
            },
            "doe",
            &[],
            None,
            wall,
        );
    }
    state.rng = rng;
    Ok(state)
}

/// One iteration: (re)select, refit, maximize EI, pre-image, evaluate and
/// append the real row plus, when the target is farther than d₀ from what
/// was obtained, the replicated row.
pub fn bo_step<S, F>(state: &mut RunState, settings: &BoSettings, space: &S, objective: &mut F) -> Result<()>
where
    S: DesignSpace + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let started = Instant::now();
    let dim = space.coord_dim();
    state.iteration += 1;
    let iter = state.iteration;
    let step_seed: u64 = state.rng.random();
    let mut rng = ChaCha8Rng::seed_from_u64(step_seed);

    let alphas: Vec<Vec<f64>> = state.rows.iter().map(|r| r.alpha.clone()).collect();
    let y: Vec<f64> = state.rows.iter().map(|r| r.y).collect();
    let fit = FitOptions {
        starts: settings.fit_starts,
        seed: rng.random(),
        ..FitOptions::default()
    };
    let (model, active) = match &settings.surrogate {
        SurrogateSpec::Plain { coords } => {
            let coords = coords.clone().unwrap_or_else(|| (0..dim).collect());
            let sub: Vec<Vec<f64>> = alphas.iter().map(|a| coords.iter().map(|&c| a[c]).collect()).collect();
            let gp = fit_gp(&sub, &y, settings.kernel, 0.0, false, &fit)?;
            (Fitted::Plain(SubsetModel::new(gp, coords.clone(), dim)?), coords)
        }
        SurrogateSpec::Additive { active } => {
            let active = match active {
                Some(a) => a.clone(),
                None => {
                    let due = state.active.is_none() || (iter - 1) % settings.selection_every == 0;
                    if due {
                        let opts = SelectionOptions {
                            family: settings.kernel,
                            fit: fit.clone(),
                            ..SelectionOptions::default()
                        };
                        state.active = Some(select_active(&alphas, &y, &opts)?);
                    }
                    state.active.as_ref().map(|s| s.active.clone()).unwrap_or_default()
                }
            };
            let m = fit_additive(&alphas, &y, &active, settings.kernel, &fit)?;
            (Fitted::Additive(m), active)
        }
    };

    let mut incumbents: Vec<&Row> = state.real_rows().collect();
    incumbents.sort_by(|a, b| a.y.total_cmp(&b.y));
    let incumbents: Vec<Incumbent> = incumbents
        .iter()
        .take(5)
        .map(|r| Incumbent {
            x: r.x.clone().unwrap_or_default(),
            alpha: r.alpha.clone(),
        })
        .collect();
    let found = maximize_ei(
        model.surrogate(),
        space,
        &active,
        state.f_min,
        &settings.acquisition,
        &incumbents,
        &mut rng,
    )?;
    if found.degenerate {
        log::warn!("iteration {iter}: EI maximization was degenerate");
    }
    let alpha_star = found.alpha.clone();
    let x = match &found.design {
        Some(x) => x.clone(),
        None => {
            let pre = space.pre_image(&alpha_star, rng.random())?;
            if !pre.converged {
                log::warn!("iteration {iter}: pre-image search did not converge from every start");
            }
            pre.x
        }
    };
    let alpha_new = space.encode(&x)?;
    let y_new = objective(&x).map_err(|e| Error::Numerical(format!("evaluation at iteration {iter} failed: {e}")))?;
    let strategy = found.strategy.name();
    let wall = started.elapsed().as_secs_f64() * 1e3;
    let gap = distance(&alpha_star, &alpha_new);
    state.record(
        Row {
            alpha: alpha_new,
            y: y_new,
            x: Some(x),
            iter,
        },
        strategy,
        &active,
        Some(found.ei),
        wall,
    );
    if settings.replication && gap > space.d0() {
        let cbox = space.coord_box();
        let diag = (0..dim).map(|j| cbox.width(j).powi(2)).sum::<f64>().sqrt();
        let collides = state
            .rows
            .iter()
            .any(|r| distance(&r.alpha, &alpha_star) <= COLLISION_TOL * diag.max(1e-300));
        if collides {
            log::warn!("iteration {iter}: replicated row collides with an existing row, dropped");
        } else {
            state.record(
                Row {
                    alpha: alpha_star,
                    y: y_new,
                    x: None,
                    iter,
                },
                strategy,
                &active,
                Some(found.ei),
                wall,
            );
        }
    }
    Ok(())
}

/// Initial design followed by `settings.iterations` steps.
pub fn run<S, F>(space: &S, settings: &BoSettings, mut objective: F) -> Result<RunResult>
where
    S: DesignSpace + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut state = initial_doe(space, settings, &mut objective)?;
    for _ in 0..settings.iterations {
        bo_step(&mut state, settings, space, &mut objective)?;
    }
    let best = state
        .best()
        .ok_or_else(|| Error::Numerical("run produced no evaluation".into()))?;
    Ok(RunResult {
        best_x: best.x.clone().unwrap_or_default(),
        best_y: best.y,
        trace: state.trace.clone(),
        state,
    })
}
