//! Differential evolution (rand/1/bin with dithered weight) over a box.

use rand::Rng;

use super::Bounds;

#[derive(Clone, Debug)]
pub struct EvolutionOptions {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 40,
            crossover: 0.7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    /// Best point over every evaluated candidate (first one wins ties).
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Final population sorted by value.
    pub population: Vec<(Vec<f64>, f64)>,
    pub evaluations: usize,
}

/// Minimizes `f` over `bounds`. `seeds` are copied into the initial population
/// (truncated to the population size) and the rest is uniform random.
/// NaN values are treated as +inf.
pub fn differential_evolution<F, R>(
    mut f: F,
    bounds: &Bounds,
    opts: &EvolutionOptions,
    seeds: &[Vec<f64>],
    rng: &mut R,
) -> EvolutionResult
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let n = bounds.dim();
    let np = opts.population.max(4);
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
    let mut pop: Vec<Vec<f64>> = seeds
        .iter()
        .take(np)
        .map(|s| bounds.clamped(s))
        .collect();
    while pop.len() < np {
        pop.push(bounds.sample(rng));
    }
    let mut vals: Vec<f64> = pop.iter().map(|x| eval(x, &mut evaluations)).collect();
    let mut best = 0;
    for i in 1..np {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    let mut best_x = pop[best].clone();
    let mut best_value = vals[best];

    for _ in 0..opts.generations {
        for i in 0..np {
            let mut pick = || loop {
                let k = rng.random_range(0..np);
                if k != i {
                    break k;
                }
            };
            let a = pick();
            let mut b = pick();
            while b == a {
                b = pick();
            }
            let mut c = pick();
            while c == a || c == b {
                c = pick();
            }
            let w = 0.5 + 0.5 * rng.random::<f64>();
            let forced = if n > 0 { rng.random_range(0..n) } else { 0 };
            let mut trial = pop[i].clone();
            for j in 0..n {
                if j == forced || rng.random::<f64>() < opts.crossover {
                    let mut v = pop[a][j] + w * (pop[b][j] - pop[c][j]);
                    // bounce back into the box, halfway towards the parent
                    if v < bounds.lower[j] {
                        v = 0.5 * (bounds.lower[j] + pop[i][j]);
                    } else if v > bounds.upper[j] {
                        v = 0.5 * (bounds.upper[j] + pop[i][j]);
                    }
                    trial[j] = v;
                }
            }
            let fv = eval(&trial, &mut evaluations);
            if fv < best_value {
                best_value = fv;
                best_x = trial.clone();
            }
            if fv <= vals[i] {
                pop[i] = trial;
                vals[i] = fv;
            }
        }
    }
    let mut order: Vec<usize> = (0..np).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    EvolutionResult {
        best_x,
        best_value,
        population: order.into_iter().map(|i| (pop[i].clone(), vals[i])).collect(),
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_rastrigin_basin() {
        let b = Bounds::uniform(2, -5.12, 5.12);
        let f = |x: &[f64]| {
            20.0 + x
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                .sum::<f64>()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = EvolutionOptions {
            population: 40,
            generations: 150,
            crossover: 0.9,
        };
        let r = differential_evolution(f, &b, &opts, &[], &mut rng);
        assert!(r.best_value < 1e-3, "{}", r.best_value);
        assert_eq!(r.evaluations, 40 * 151);
    }

    #[test]
    fn best_is_minimum_of_evaluated() {
        let b = Bounds::uniform(3, 0.0, 1.0);
        let mut seen = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let opts = EvolutionOptions {
            population: 10,
            generations: 5,
            crossover: 0.7,
        };
        let r = differential_evolution(
            |x| {
                let v = x.iter().map(|t| (t - 0.3).abs()).sum::<f64>();
                seen.push(v);
                v
            },
            &b,
            &opts,
            &[vec![0.3, 0.3, 0.9]],
            &mut rng,
        );
        let m = seen.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_value, m);
    }
}
