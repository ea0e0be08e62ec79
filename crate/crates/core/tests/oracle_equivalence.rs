use aiep_core::embedding::box_project;
use aiep_core::linalg::{generalized_eig, SymMatrix};
use aiep_core::perturbation::{study_cell, StudyConfig};
use aiep_oracles::{box_projection_qp, determinant_roots};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.5
}

fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-5.0..5.0));
    (&a + a.transpose()) * 0.5
}

#[test]
fn generalized_eig_matches_determinant_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(1..=6);
        let m = random_spd(n, &mut rng);
        let k = random_sym(n, &mut rng);
        let Some(roots) = determinant_roots(&m, &k) else { continue };
        let spec = generalized_eig(
            &SymMatrix::try_symmetric(m, 1e-12).unwrap(),
            &SymMatrix::try_symmetric(k, 1e-12).unwrap(),
            n,
        )
        .unwrap();
        for (got, want) in spec.eigenvalues.iter().zip(&roots) {
            assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "n={n}: {got} vs {want}");
        }
        checked += 1;
    }
}

#[test]
fn box_project_matches_qp() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let d = rng.random_range(1..=8);
        let c = rng.random_range(0.1..5.0);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0 * c..3.0 * c)).collect();
        let fast = box_project(&x, c);
        let slow = box_projection_qp(&x, c);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn one_dof_study_matches_closed_form() {
    let config = StudyConfig { dims: vec![1], p_values: vec![0.1], trials: 50, ..Default::default() };
    let report = study_cell(&config, 0.1, 1).unwrap();
    let mut total = 0.0;
    for t in 0..config.trials {
        let mut rng = aiep_core::seed::stream(config.seed, &format!("perturb/p={:e}/d=1/trial={t}", 0.1));
        let sample = aiep_core::perturbation::draw_trial(1, 0.1, &config, &mut rng);
        let (m, k) = (sample.base.mass.get(0, 0), sample.base.stiffness.get(0, 0));
        let (dm, dk) = (sample.delta_m.get(0, 0), sample.delta_k.get(0, 0));
        let exact = aiep_oracles::scalar_shift(m, k, dm, dk);
        let first_order = (dk - k / m * dm) / m;
        total += 100.0 * ((first_order - exact) / exact).abs();
    }
    let expected = total / config.trials as f64;
    assert_eq!(report.trials, config.trials);
    assert!((report.mean_abs_pct_error - expected).abs() <= 1e-9 * expected, "{} vs {expected}", report.mean_abs_pct_error);
}
