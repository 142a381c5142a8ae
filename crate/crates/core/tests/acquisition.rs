//! EI maximization against grid oracles, and embedding invariants.

use eigenshape::acquisition::{
    draw_embedding, ei_value, embed_bounds, expected_improvement, maximize_ei, AcquisitionConfig, SearchDomain,
    Strategy,
};
use eigenshape::eigenbasis::IdentitySpace;
use eigenshape::gp::{GpModel, KernelFamily, KernelSpec};
use eigenshape::optim::Bounds;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model_1d() -> GpModel {
    GpModel::with_kernel(
        KernelSpec::new(KernelFamily::Matern52, vec![0.5], 1.0).unwrap(),
        vec![vec![0.0], vec![1.0]],
        vec![1.0, 0.0],
        0.0,
    )
    .unwrap()
}

#[test]
fn one_dimensional_maximum_matches_a_dense_grid() {
    let model = model_1d();
    let space = IdentitySpace {
        bounds: Bounds::uniform(1, -0.5, 2.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = maximize_ei(&model, &space, &[0], 0.0, &AcquisitionConfig::default(), &[], &mut rng).unwrap();
    let (mut gx, mut gv) = (0.0, f64::NEG_INFINITY);
    for k in 0..=250_000 {
        let x = -0.5 + 2.5 * k as f64 / 250_000.0;
        let v = expected_improvement(&model, &[x], 0.0);
        if v > gv {
            (gx, gv) = (x, v);
        }
    }
    assert!(r.ei >= gv - 1e-9, "{} < grid {gv}", r.ei);
    assert!((r.alpha[0] - gx).abs() < 1e-3, "{} vs {gx}", r.alpha[0]);
    assert!(!r.degenerate);
}

#[test]
fn result_is_never_worse_than_seeded_incumbents() {
    let model = model_1d();
    let space = IdentitySpace {
        bounds: Bounds::uniform(1, -0.5, 2.0),
    };
    let inc = eigenshape::acquisition::Incumbent {
        x: vec![1.6],
        alpha: vec![1.6],
    };
    let cfg = AcquisitionConfig {
        population: 4,
        generations: 1,
        polishes: 1,
        polish_iterations: 1,
        ..AcquisitionConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = maximize_ei(&model, &space, &[0], 0.0, &cfg, &[inc], &mut rng).unwrap();
    assert!(r.ei >= expected_improvement(&model, &[1.6], 0.0));
}

#[test]
fn vanishing_ei_returns_the_most_uncertain_candidate() {
    // flat model (zero variance) above the threshold: EI is zero everywhere
    let model = GpModel::with_kernel(
        KernelSpec::new(KernelFamily::Matern52, vec![1.0, 1.0], 0.0).unwrap(),
        vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        vec![2.0, 2.0],
        0.0,
    )
    .unwrap();
    let space = IdentitySpace {
        bounds: Bounds::uniform(2, 0.0, 1.0),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = maximize_ei(&model, &space, &[0, 1], 1.0, &AcquisitionConfig::default(), &[], &mut rng).unwrap();
    assert!(r.degenerate);
    assert_eq!(r.ei, 0.0);
    assert!(space.bounds.contains(&r.alpha));
}

#[test]
fn on_manifold_search_stays_admissible() {
    let model = GpModel::with_kernel(
        KernelSpec::new(KernelFamily::Matern52, vec![0.7, 0.7], 1.0).unwrap(),
        vec![vec![0.2, 0.2], vec![0.8, 0.5]],
        vec![0.5, 0.1],
        0.0,
    )
    .unwrap();
    let space = IdentitySpace {
        bounds: Bounds::uniform(2, 0.0, 1.0),
    };
    let cfg = AcquisitionConfig {
        domain: SearchDomain::OnManifold,
        ..AcquisitionConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = maximize_ei(&model, &space, &[0, 1], 0.1, &cfg, &[], &mut rng).unwrap();
    assert!(space.bounds.contains(&r.alpha));
    assert!(r.ei > 0.0);
}

#[test]
fn embed_with_every_coordinate_active_is_active_only() {
    let model = model_1d();
    let space = IdentitySpace {
        bounds: Bounds::uniform(1, -0.5, 2.0),
    };
    let cfg = AcquisitionConfig {
        strategy: Strategy::Embed,
        ..AcquisitionConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = maximize_ei(&model, &space, &[0], 0.0, &cfg, &[], &mut rng).unwrap();
    assert_eq!(r.strategy, Strategy::ActiveOnly);
    assert!(r.embedding.is_none());
}

#[test]
fn embedded_search_moves_inactive_coordinates_along_the_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x: Vec<Vec<f64>> = (0..8).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|v| v[0] * v[0] + 0.1 * v[2]).collect();
    let model = GpModel::with_kernel(KernelSpec::new(KernelFamily::Matern52, vec![0.8; 4], 1.0).unwrap(), x, y, 0.0)
        .unwrap();
    let space = IdentitySpace {
        bounds: Bounds::uniform(4, -1.0, 1.0),
    };
    let cfg = AcquisitionConfig {
        strategy: Strategy::Embed,
        ..AcquisitionConfig::default()
    };
    let r = maximize_ei(&model, &space, &[0], 0.0, &cfg, &[], &mut rng).unwrap();
    let spec = r.embedding.unwrap();
    let z = spec.coordinates_of(&r.alpha);
    let back = spec.map(&z);
    for (a, b) in back.iter().zip(&r.alpha) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(z[1] >= spec.bounds.0 - 1e-12 && z[1] <= spec.bounds.1 + 1e-12);
    assert!(space.bounds.contains(&r.alpha));
}

proptest! {
    #[test]
    fn ei_is_nonnegative_and_monotone(m in -5.0f64..5.0, s in 0.0f64..3.0, a in -5.0f64..5.0, dm in 0.0f64..1.0) {
        let e = ei_value(m, s, a);
        prop_assert!(e >= 0.0);
        prop_assert!(e >= (a - m).max(0.0) - 1e-12);
        prop_assert!(ei_value(m + dm, s, a) <= e + 1e-12);
        prop_assert!(ei_value(m, s + dm, a) >= e - 1e-12);
    }

    #[test]
    fn embedding_round_trips(seed in 0u64..1000, z in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = draw_embedding(&[0, 3], 6, &mut rng).unwrap();
        let alpha = spec.map(&z);
        prop_assert_eq!(alpha[0], z[0]);
        prop_assert_eq!(alpha[3], z[1]);
        let back = spec.coordinates_of(&alpha);
        for (u, v) in z.iter().zip(&back) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        // the pull-back is the transpose of the matrix
        let g: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).sin()).collect();
        let pulled = spec.pull_back(&g);
        let dense = spec.matrix().transpose() * DVector::from_column_slice(&g);
        for (u, v) in pulled.iter().zip(dense.iter()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_bounds_are_tight_and_feasible(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = draw_embedding(&[1], 5, &mut rng).unwrap();
        let coord_box = Bounds::new(vec![-1.0, -2.0, -0.5, -1.5, -0.8], vec![1.2, 2.0, 0.7, 1.0, 0.9]).unwrap();
        let sample: Vec<Vec<f64>> = (0..30).map(|_| coord_box.sample(&mut rng)).collect();
        let (lo, hi) = embed_bounds(&sample, &coord_box, &spec);
        spec.bounds = (lo, hi);
        let proj: Vec<f64> = sample.iter().map(|a| spec.coordinates_of(a)[1]).collect();
        let pmin = proj.iter().cloned().fold(f64::INFINITY, f64::min);
        let pmax = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let in_box = |a: &[f64]| a.iter().enumerate().all(|(i, v)| *v >= coord_box.lower[i] - 1e-12 && *v <= coord_box.upper[i] + 1e-12);
        let feasible = |t: f64| in_box(&spec.map(&[0.0, t])) && t >= pmin - 1e-12 && t <= pmax + 1e-12;
        if lo < hi {
            prop_assert!(feasible(lo) && feasible(hi));
            let eps = 1e-6 * (1.0 + hi.abs().max(lo.abs()));
            prop_assert!(!feasible(hi + eps));
            prop_assert!(!feasible(lo - eps));
        }
    }
}
