use aiep_core::aiep::{boxed_objective, embedded_objective, toy_problem, toy_system, AiepProblem, ParameterScale, SpectrumQuantity, SystemPair};
use aiep_core::embedding::{jl_min_dimension, make_embedding};
use aiep_core::femodel::{fe_problem, FE_TARGETS, WingConfig};
use aiep_core::linalg::{generalized_eigenvalues, SymMatrix};
use aiep_core::pso::{minimize, PsoConfig, RandomCoefficients};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn forward_targets(base: &SystemPair, packed: &[f64], n: usize, quantity: SpectrumQuantity) -> Vec<f64> {
    let order = base.order();
    let tri = order * (order + 1) / 2;
    let expand = |t: &[f64]| {
        let mut m = DMatrix::zeros(order, order);
        let mut idx = 0;
        for i in 0..order {
            for j in i..order {
                m[(i, j)] = t[idx];
                m[(j, i)] = t[idx];
                idx += 1;
            }
        }
        SymMatrix::from_upper(m).unwrap()
    };
    let m = base.mass.add(&expand(&packed[..tri])).unwrap();
    let k = base.stiffness.add(&expand(&packed[tri..])).unwrap();
    generalized_eigenvalues(&m, &k, n).unwrap().into_iter().map(|l| quantity.from_eigenvalue(l)).collect()
}

#[test]
fn known_solution_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vec<f64> = (0..110).map(|_| rng.random_range(-0.3..0.3)).collect();
        let targets = forward_targets(&toy_system(), &x, 3, SpectrumQuantity::Eigenvalue);
        let p = AiepProblem::new(toy_system(), targets).unwrap();
        assert!(p.objective_packed(&x) < 1e-10);
    }
    let scale = ParameterScale::Diagonal { mass: 1e-3, stiffness: 1e-6 };
    let base = fe_problem(&WingConfig::b737(5), FE_TARGETS.to_vec(), scale).unwrap();
    let x: Vec<f64> = (0..132).map(|_| rng.random_range(-1.0..1.0)).collect();
    let delta = base.delta_from_parameters(&x).unwrap();
    let targets = forward_targets(base.base(), delta.packed(), 3, SpectrumQuantity::Frequency);
    let p = fe_problem(&WingConfig::b737(5), targets, scale).unwrap();
    assert!(p.objective_packed(&x) < 1e-10);
}

#[test]
fn objective_vanishes_only_on_matching_spectra() {
    let p = toy_problem();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let x: Vec<f64> = (0..110).map(|_| rng.random_range(-0.5..0.5)).collect();
        let value = p.objective_packed(&x);
        let spec = p.perturbed_spectrum(&x).unwrap();
        let direct = (spec[0] - 2.0).powi(2) + (spec[1] - 5.0).powi(2);
        assert!(value >= 0.0 && (value - direct).abs() <= 1e-12 * direct.max(1.0));
    }
}

#[test]
fn gaussian_projection_preserves_distances() {
    let (n, dim) = (200, 1000);
    let k = jl_min_dimension(n, 0.5).unwrap().k;
    // A is dim × k with entries of standard deviation 1/√k, so Aᵀ maps
    // R^dim → R^k preserving squared norms in expectation.
    let map = make_embedding(dim, k, 1.0, 11).unwrap();
    let at = map.matrix().transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let points: Vec<DVector<f64>> = (0..n).map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))).collect();
    let images: Vec<DVector<f64>> = points.iter().map(|p| &at * p).collect();
    let (mut good, mut total) = (0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let before = (&points[i] - &points[j]).norm_squared();
            let after = (&images[i] - &images[j]).norm_squared();
            total += 1;
            if after >= 0.5 * before && after <= 1.5 * before {
                good += 1;
            }
        }
    }
    assert!(good as f64 >= 0.95 * total as f64, "{good}/{total}");
}

fn toy_median(particles: usize) -> f64 {
    let problem = toy_problem();
    let mut finals: Vec<f64> = (0..10u64)
        .map(|seed| {
            let config = PsoConfig {
                particles,
                seed,
                coefficients: RandomCoefficients::PerDimension,
                ..PsoConfig::default()
            };
            minimize(boxed_objective(&problem, 10.0), 110, &config).unwrap().best_value
        })
        .collect();
    finals.sort_by(f64::total_cmp);
    0.5 * (finals[4] + finals[5])
}

#[test]
fn larger_swarms_do_no_worse() {
    let small = toy_median(250);
    let large = toy_median(500);
    assert!(small >= 0.9 * large, "250: {small}, 500: {large}");
}

#[test]
#[ignore = "not reached with the pinned swarm settings; see README"]
fn embedded_toy_runs_mostly_reach_tenth() {
    let problem = toy_problem();
    let hits = (0..10u64)
        .filter(|&seed| {
            let map = make_embedding(110, 50, 10.0, 1000 + seed).unwrap();
            let config = PsoConfig {
                particles: 500,
                seed,
                coefficients: RandomCoefficients::PerDimension,
                ..PsoConfig::default()
            };
            minimize(embedded_objective(&problem, &map).unwrap(), 50, &config).unwrap().best_value < 1e-1
        })
        .count();
    assert!(hits >= 7, "{hits} of 10");
}
