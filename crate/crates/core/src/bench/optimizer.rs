//! Optimization benchmark: best values and evaluations to targets.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metamodel::run_seed;
use super::objective::Objective;
use crate::acquisition::{AcquisitionConfig, Strategy};
use crate::bo::{run, BoSettings, DoeSpace, RunResult, SurrogateSpec};
use crate::eigenbasis::{DesignSpace, IdentitySpace, ShapeSpace};
use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd};

/// What the optimizer's coordinates are.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinateSpace {
    /// Eigencoordinates of the shape space.
    #[default]
    Eigen,
    /// The design parameters themselves.
    Design,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptMethod {
    pub name: String,
    #[serde(default)]
    pub space: CoordinateSpace,
    #[serde(flatten)]
    pub settings: BoSettings,
}

/// A benchmark definition as read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub targets: Vec<f64>,
    #[serde(rename = "method")]
    pub methods: Vec<OptMethod>,
}

fn default_runs() -> usize {
    5
}

impl BenchConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        for m in &cfg.methods {
            m.settings.validate()?;
        }
        Ok(cfg)
    }
}

/// First 1-based evaluation at which the best value is ≤ target.
pub fn evaluations_to_target(trace: &[f64], target: f64) -> Option<usize> {
    trace.iter().position(|&v| v <= target).map(|i| i + 1)
}

/// "mean (sd)" when every run hit, T̄_s/p_s with the success count in
/// brackets when some did, "x" when none did.
pub fn target_stat(hits: &[Option<usize>]) -> (String, usize) {
    let times: Vec<f64> = hits.iter().flatten().map(|&t| t as f64).collect();
    let s = times.len();
    let stat = if s == 0 {
        "x".to_string()
    } else if s == hits.len() {
        format!("{:.2} ({:.2})", mean(&times), sample_sd(&times))
    } else {
        let p = s as f64 / hits.len() as f64;
        format!("{:.1} [{s}]", mean(&times) / p)
    };
    (stat, s)
}

#[derive(Clone, Debug)]
pub struct MethodOutcome {
    pub name: String,
    pub results: Vec<RunResult>,
    pub failures: Vec<String>,
}

impl MethodOutcome {
    pub fn best_values(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.best_y).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptRow {
    pub method: String,
    pub best_mean: f64,
    pub best_sd: f64,
    pub target: Option<f64>,
    pub stat: String,
    pub successes: usize,
}

/// Runs each method `runs` times; run r of every method uses the same seed.
/// Failed runs are recorded, not fatal.
pub fn bench_optimizers(
    shape: Option<&ShapeSpace>,
    design: &IdentitySpace,
    objective: Objective,
    methods: &[OptMethod],
    runs: usize,
    seed: u64,
) -> Result<Vec<MethodOutcome>> {
    let mut out = Vec::new();
    for m in methods {
        let mut outcome = MethodOutcome {
            name: m.name.clone(),
            results: Vec::new(),
            failures: Vec::new(),
        };
        for r in 0..runs {
            let mut settings = m.settings.clone();
            settings.seed = run_seed(seed, r);
            let f = |x: &[f64]| objective.eval(x);
            let res = match m.space {
                CoordinateSpace::Eigen => {
                    let space: &dyn DesignSpace = shape
                        .ok_or_else(|| Error::InvalidArgument(format!("{}: no shape space for this problem", m.name)))?;
                    run(space, &settings, f)
                }
                CoordinateSpace::Design => run(design, &settings, f),
            };
            match res {
                Ok(res) => {
                    log::info!("{} run {r}: best {:.4}", m.name, res.best_y);
                    outcome.results.push(res);
                }
                Err(e) => {
                    log::warn!("{} run {r} failed: {e}", m.name);
                    outcome.failures.push(e.to_string());
                }
            }
        }
        out.push(outcome);
    }
    Ok(out)
}

/// One row per method and target (a single row without targets).
pub fn opt_report(outcomes: &[MethodOutcome], targets: &[f64]) -> Vec<OptRow> {
    let mut rows = Vec::new();
    for o in outcomes {
        let best = o.best_values();
        let (bm, bs) = if best.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (mean(&best), sample_sd(&best))
        };
        let total = o.results.len() + o.failures.len();
        if targets.is_empty() {
            rows.push(OptRow {
                method: o.name.clone(),
                best_mean: bm,
                best_sd: bs,
                target: None,
                stat: String::new(),
                successes: 0,
            });
        }
        for &t in targets {
            let mut hits: Vec<Option<usize>> = o.results.iter().map(|r| evaluations_to_target(&r.trace, t)).collect();
            hits.resize(total, None);
            let (stat, successes) = target_stat(&hits);
            rows.push(OptRow {
                method: o.name.clone(),
                best_mean: bm,
                best_sd: bs,
                target: Some(t),
                stat,
                successes,
            });
        }
    }
    rows
}

pub fn write_opt_csv<W: Write>(out: W, rows: &[OptRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "best_mean", "best_sd", "target", "stat", "successes"])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            format!("{:.4}", r.best_mean),
            format!("{:.4}", r.best_sd),
            r.target.map_or(String::new(), |t| t.to_string()),
            r.stat.clone(),
            r.successes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn method(name: &str, space: CoordinateSpace, n0: usize, iterations: usize, surrogate: SurrogateSpec, strategy: Strategy, replication: bool) -> OptMethod {
    OptMethod {
        name: name.to_string(),
        space,
        settings: BoSettings {
            n0,
            iterations,
            surrogate,
            acquisition: AcquisitionConfig {
                strategy,
                ..AcquisitionConfig::default()
            },
            replication,
            doe: DoeSpace::Coordinates,
            ..BoSettings::default()
        },
    }
}

/// The method rosters and targets used for each objective.
pub fn default_bench(objective: Objective) -> BenchConfig {
    use CoordinateSpace::{Design, Eigen};
    use Strategy::{ActiveOnly, Embed, FullAlpha};
    let plain = |c: Option<Vec<usize>>| SurrogateSpec::Plain { coords: c };
    let add = |a: Option<Vec<usize>>| SurrogateSpec::Additive { active: a };
    let (methods, targets) = match objective {
        Objective::F5 => (
            vec![
                method("GP(alpha_1:7)-EI(alpha_1:7) with replication", Eigen, 20, 60, plain(Some((0..7).collect())), ActiveOnly, true),
                method("GP(alpha_1:7)-EI(alpha_1:7) no replication", Eigen, 20, 60, plain(Some((0..7).collect())), ActiveOnly, false),
                method("AddGP(alpha^a+alpha^abar)-EI embed with replication", Eigen, 20, 60, add(None), Embed, true),
                method("GP(X)-EI(X)", Design, 40, 40, plain(None), FullAlpha, false),
            ],
            vec![27.0, 30.0, 35.0],
        ),
        Objective::Fmg => (
            vec![
                method("AddGP(X_1:2+X_3:40)-EI embed", Design, 20, 80, add(Some(vec![0, 1])), Embed, false),
                method("AddGP(X_1:2+X_3:40)-EI(X_1:2)", Design, 20, 80, add(Some(vec![0, 1])), ActiveOnly, false),
                method("GP(X_1:2)-EI(X_1:2)", Design, 20, 80, plain(Some(vec![0, 1])), ActiveOnly, false),
                method("GP(X)-EI(X)", Design, 50, 50, plain(None), FullAlpha, false),
            ],
            vec![],
        ),
        Objective::F4 => (
            vec![
                method("AddGP(alpha^a+alpha^abar)-EI embed with replication", Eigen, 20, 80, add(None), Embed, true),
                method("GP(X)-EI(X)", Design, 50, 50, plain(None), FullAlpha, false),
            ],
            vec![],
        ),
        Objective::F2 => (
            vec![
                method("GP(alpha_1:3)-EI(alpha_1:3) with replication", Eigen, 20, 30, plain(Some((0..3).collect())), ActiveOnly, true),
                method("GP(X)-EI(X)", Design, 50, 30, plain(None), FullAlpha, false),
            ],
            vec![],
        ),
    };
    BenchConfig {
        runs: 5,
        targets,
        methods,
    }
}
