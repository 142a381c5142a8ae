//! Maximization of EI under the four search strategies.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::ei::{ei_gradient, ei_value, expected_improvement};
use super::embedding::{draw_embedding, embed_bounds, EmbeddingSpec};
use super::Surrogate;
use crate::eigenbasis::DesignSpace;
use crate::error::{Error, Result};
use crate::optim::{
    differential_evolution, nelder_mead, projected_gradient_minimize, EvolutionOptions,
    NelderMeadOptions, SpgOptions,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// The whole coordinate box.
    #[default]
    FullAlpha,
    /// Active coordinates only, inactive ones held fixed.
    ActiveOnly,
    /// Active coordinates plus a random line through the inactive ones.
    Embed,
    /// Design parameters, scored through their coordinates.
    ViaX,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::FullAlpha => "full-alpha",
            Strategy::ActiveOnly => "active-only",
            Strategy::Embed => "embed",
            Strategy::ViaX => "via-x",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-alpha" | "full" => Ok(Strategy::FullAlpha),
            "active-only" | "active" => Ok(Strategy::ActiveOnly),
            "embed" => Ok(Strategy::Embed),
            "via-x" | "x" => Ok(Strategy::ViaX),
            _ => Err(Error::Parse(format!("unknown strategy '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchDomain {
    #[default]
    CoveringBox,
    /// EI is zero away from the sampled manifold.
    OnManifold,
}

/// Values of the inactive coordinates under [`Strategy::ActiveOnly`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InactiveFill {
    /// Their mean, zero.
    #[default]
    Zero,
    /// One draw from N(0, λ_j) per maximization.
    Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionConfig {
    pub strategy: Strategy,
    pub domain: SearchDomain,
    pub inactive_fill: InactiveFill,
    pub population: usize,
    pub generations: usize,
    /// Local searches started from the best candidates.
    pub polishes: usize,
    pub polish_iterations: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::FullAlpha,
            domain: SearchDomain::CoveringBox,
            inactive_fill: InactiveFill::Zero,
            population: 50,
            generations: 40,
            polishes: 5,
            polish_iterations: 100,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || self.generations == 0 || self.polish_iterations == 0 {
            return Err(Error::InvalidArgument("acquisition budgets must be positive".into()));
        }
        Ok(())
    }
}

/// A known design, used to seed the global search.
#[derive(Clone, Debug)]
pub struct Incumbent {
    pub x: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EiMaximum {
    pub alpha: Vec<f64>,
    /// The design itself when the search ran over design parameters.
    pub design: Option<Vec<f64>>,
    pub ei: f64,
    pub evaluations: usize,
    /// EI vanished everywhere; `alpha` is the most uncertain candidate.
    pub degenerate: bool,
    /// Strategy actually used (Embed falls back to ActiveOnly without
    /// inactive coordinates).
    pub strategy: Strategy,
    pub embedding: Option<EmbeddingSpec>,
    pub wall_ms: f64,
}

enum Plan {
    /// Search over `coords` with the other coordinates at `base`.
    Coords { coords: Vec<usize>, base: Vec<f64> },
    Embed(EmbeddingSpec),
    Design,
}

impl Plan {
    fn to_alpha<S: DesignSpace + ?Sized>(&self, space: &S, z: &[f64]) -> Option<Vec<f64>> {
        match self {
            Plan::Coords { coords, base } => {
                let mut a = base.clone();
                for (&c, &v) in coords.iter().zip(z) {
                    a[c] = v;
                }
                Some(a)
            }
            Plan::Embed(spec) => Some(spec.map(z)),
            Plan::Design => space.encode(z).ok(),
        }
    }

    fn pull_back(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Plan::Coords { coords, .. } => coords.iter().map(|&c| g[c]).collect(),
            Plan::Embed(spec) => spec.pull_back(g),
            Plan::Design => unreachable!("no gradient through the design map"),
        }
    }

    fn seed(&self, inc: &Incumbent) -> Vec<f64> {
        match self {
            Plan::Coords { coords, .. } => coords.iter().map(|&c| inc.alpha[c]).collect(),
            Plan::Embed(spec) => spec.coordinates_of(&inc.alpha),
            Plan::Design => inc.x.clone(),
        }
    }
}

/// Maximizes EI(α) below `threshold` with differential evolution followed by
/// local polishes (projected gradient with the analytic gradient, or
/// Nelder–Mead over design parameters). The result is never worse than any
/// evaluated candidate.
#[allow(clippy::too_many_arguments)]
pub fn maximize_ei<M, S, R>(
    model: &M,
    space: &S,
    active: &[usize],
    threshold: f64,
    config: &AcquisitionConfig,
    incumbents: &[Incumbent],
    rng: &mut R,
) -> Result<EiMaximum>
where
    M: Surrogate + ?Sized,
    S: DesignSpace + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let start = Instant::now();
    let dim = space.coord_dim();
    if model.input_dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: model.input_dim(),
        });
    }
    let coord_box = space.coord_box();
    let zero_base = || coord_box.clamped(&vec![0.0; dim]);

    let mut strategy = config.strategy;
    if strategy == Strategy::Embed && active.len() >= dim {
        strategy = Strategy::ActiveOnly;
    }
    let mut embedding = None;
    let (plan, bounds) = match strategy {
        Strategy::FullAlpha => (
            Plan::Coords {
                coords: (0..dim).collect(),
                base: zero_base(),
            },
            coord_box.clone(),
        ),
        Strategy::ActiveOnly => {
            let base = match config.inactive_fill {
                InactiveFill::Zero => zero_base(),
                InactiveFill::Sample => {
                    let var = space.coord_variances();
                    let mut b: Vec<f64> = var
                        .iter()
                        .map(|v| Normal::new(0.0, v.max(0.0).sqrt()).map_or(0.0, |n| n.sample(rng)))
                        .collect();
                    coord_box.clamp(&mut b);
                    b
                }
            };
            (
                Plan::Coords {
                    coords: active.to_vec(),
                    base,
                },
                coord_box.select(active),
            )
        }
        Strategy::Embed => {
            let mut spec = draw_embedding(active, dim, rng)?;
            spec.bounds = embed_bounds(space.coord_sample(), coord_box, &spec);
            let b = spec.search_bounds(coord_box);
            embedding = Some(spec.clone());
            (Plan::Embed(spec), b)
        }
        Strategy::ViaX => (Plan::Design, space.design_bounds().clone()),
    };
    if bounds.dim() == 0 {
        return Err(Error::InvalidArgument("empty search space".into()));
    }

    let on_manifold = config.domain == SearchDomain::OnManifold;
    let admissible = |alpha: &[f64]| !on_manifold || space.is_on_manifold(alpha);
    let score = |z: &[f64]| -> f64 {
        match plan.to_alpha(space, z) {
            Some(alpha) if admissible(&alpha) => expected_improvement(model, &alpha, threshold),
            _ => 0.0,
        }
    };

    let seeds: Vec<Vec<f64>> = incumbents
        .iter()
        .take(config.population / 2)
        .map(|inc| bounds.clamped(&plan.seed(inc)))
        .collect();
    let mut evaluations = 0;
    let de = differential_evolution(
        |z| {
            evaluations += 1;
            -score(z)
        },
        &bounds,
        &EvolutionOptions {
            population: config.population,
            generations: config.generations,
            ..EvolutionOptions::default()
        },
        &seeds,
        rng,
    );
    let mut best_z = de.best_x.clone();
    let mut best = -de.best_value;

    let mut polish_starts: Vec<Vec<f64>> = vec![de.best_x.clone()];
    for (z, _) in &de.population {
        if polish_starts.len() >= config.polishes {
            break;
        }
        if !polish_starts.contains(z) {
            polish_starts.push(z.clone());
        }
    }
    polish_starts.truncate(config.polishes);
    for z0 in &polish_starts {
        let found = match plan {
            Plan::Design => Some(nelder_mead(
                |z| {
                    evaluations += 1;
                    -score(z)
                },
                z0,
                &bounds,
                &NelderMeadOptions {
                    max_evals: 2 * config.polish_iterations,
                    ..NelderMeadOptions::default()
                },
            )),
            _ => projected_gradient_minimize(
                |z| {
                    evaluations += 1;
                    let alpha = plan.to_alpha(space, z)?;
                    if !admissible(&alpha) {
                        return Some((0.0, vec![0.0; z.len()]));
                    }
                    match ei_gradient(model, &alpha, threshold) {
                        Ok((v, g)) => Some((-v, plan.pull_back(&g).iter().map(|x| -x).collect())),
                        Err(_) => {
                            let p = model.predict(&alpha);
                            Some((-ei_value(p.mean, p.sd(), threshold), vec![0.0; z.len()]))
                        }
                    }
                },
                z0,
                &bounds,
                &SpgOptions {
                    max_iter: config.polish_iterations,
                    ..SpgOptions::default()
                },
            ),
        };
        if let Some(r) = found {
            // rescore: the local objective is only a proxy off the manifold
            let v = score(&r.x);
            evaluations += 1;
            if v > best {
                best = v;
                best_z = r.x;
            }
        }
    }

    let mut degenerate = false;
    if !(best > 0.0) {
        degenerate = true;
        let mut candidates: Vec<&Vec<f64>> = de.population.iter().map(|(z, _)| z).collect();
        candidates.push(&de.best_x);
        let mut top: Option<(f64, bool, Vec<f64>)> = None;
        for z in candidates {
            let Some(alpha) = plan.to_alpha(space, z) else { continue };
            let key = (admissible(&alpha), model.predict(&alpha).sd());
            if top.as_ref().is_none_or(|t| (key.0, key.1) > (t.1, t.0)) {
                top = Some((key.1, key.0, z.clone()));
            }
        }
        if let Some((_, _, z)) = top {
            best_z = z;
        }
        best = 0.0;
        log::warn!("EI vanished on every candidate; returning the most uncertain one");
    }

    let alpha = plan
        .to_alpha(space, &best_z)
        .ok_or_else(|| Error::Numerical("selected design could not be encoded".into()))?;
    let design = matches!(plan, Plan::Design).then(|| best_z.clone());
    Ok(EiMaximum {
        alpha,
        design,
        ei: best,
        evaluations,
        degenerate,
        strategy,
        embedding,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
