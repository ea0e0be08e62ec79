//! First-order eigenvalue sensitivities and the step-size study.
//!
//! The generalized-problem estimate is
//!
//! ```text
//! δλᵢ ≈ vᵢᵀ (ΔK − λᵢ ΔM) vᵢ / (vᵢᵀ D vᵢ)
//! ```
//!
//! where the denominator matrix `D` is either `ΔM` (the form used by the
//! step-size analysis this crate reproduces) or `M` (the textbook
//! Rayleigh-quotient form). Both are ratios of quadratic forms, so neither
//! depends on how `vᵢ` is scaled.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aiep::SystemPair;
use crate::error::{Error, Result};
use crate::linalg::{generalized_eig, generalized_eigenvalues, standard_eig, SymMatrix};
use crate::seed;

/// Below this `|vᵀΔMv|` the `ΔM`-denominator form is undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Exact shifts smaller than this are re-drawn in the study.
pub const MIN_EXACT_SHIFT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// `vᵢᵀ ΔM vᵢ`.
    #[default]
    DeltaMass,
    /// `vᵢᵀ M vᵢ`.
    Mass,
}

impl Denominator {
    pub fn name(self) -> &'static str {
        match self {
            Denominator::DeltaMass => "delta-mass",
            Denominator::Mass => "mass",
        }
    }
}

/// First-order shift of eigenvalue `mode` with the `ΔM` denominator.
pub fn first_order_delta_lambda(
    m: &SymMatrix,
    k: &SymMatrix,
    delta_m: &SymMatrix,
    delta_k: &SymMatrix,
    mode: usize,
) -> Result<f64> {
    first_order_delta_lambda_with(m, k, delta_m, delta_k, mode, Denominator::DeltaMass)
}

pub fn first_order_delta_lambda_with(
    m: &SymMatrix,
    k: &SymMatrix,
    delta_m: &SymMatrix,
    delta_k: &SymMatrix,
    mode: usize,
    denominator: Denominator,
) -> Result<f64> {
    for other in [k, delta_m, delta_k] {
        if other.order() != m.order() {
            return Err(Error::DimensionMismatch { expected: m.order(), found: other.order() });
        }
    }
    let spectrum = generalized_eig(m, k, mode + 1)?;
    let lambda = spectrum.eigenvalues[mode];
    let v = spectrum.eigenvector(mode).expect("vectors requested");
    let numerator = delta_k.quadratic_form(&v) - lambda * delta_m.quadratic_form(&v);
    let denom = match denominator {
        Denominator::DeltaMass => {
            let d = delta_m.quadratic_form(&v);
            // compare against the M-norm of v so the floor is scale-free
            if d.abs() < DENOMINATOR_FLOOR * m.quadratic_form(&v) {
                return Err(Error::DegenerateDenominator(d));
            }
            d
        }
        Denominator::Mass => m.quadratic_form(&v),
    };
    Ok(numerator / denom)
}

/// `vᵢᵀ ΔK vᵢ / vᵢᵀ vᵢ` for the standard problem.
pub fn first_order_delta_lambda_standard(k: &SymMatrix, delta_k: &SymMatrix, mode: usize) -> Result<f64> {
    if delta_k.order() != k.order() {
        return Err(Error::DimensionMismatch { expected: k.order(), found: delta_k.order() });
    }
    let spectrum = standard_eig(k, mode + 1)?;
    let v = spectrum.eigenvector(mode).expect("vectors requested");
    Ok(delta_k.quadratic_form(&v) / v.dot(&v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub dimension: usize,
    pub step_scale: f64,
    /// Mean of `100·|δλ₁† − δλ₁| / |δλ₁|`.
    pub mean_abs_pct_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub p_values: Vec<f64>,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub denominator: Denominator,
    /// Base mass matrices are scaled by `1 + mass_margin·√d` so that
    /// `M + ΔM` stays positive definite for the largest default `p`.
    pub mass_margin: f64,
    /// Diagonal shift of the base stiffness, per unit dimension.
    pub stiffness_shift: f64,
    /// Give up on a trial after this many rejected draws.
    pub max_redraws: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            p_values: vec![0.01, 0.1, 1.0, 10.0],
            dims: (1..=20).collect(),
            trials: 200,
            seed: 0,
            denominator: Denominator::Mass,
            mass_margin: 10.0,
            stiffness_shift: 10.0,
            max_redraws: 1000,
        }
    }
}

/// One random draw of a base system and its perturbation.
#[derive(Debug, Clone)]
pub struct TrialSample {
    pub base: SystemPair,
    pub delta_m: SymMatrix,
    pub delta_k: SymMatrix,
}

/// Predicted and exact shift of the smallest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub predicted: f64,
    pub exact: f64,
}

impl TrialOutcome {
    pub fn abs_pct_error(&self) -> f64 {
        100.0 * (self.predicted - self.exact).abs() / self.exact.abs()
    }
}

/// `M = s(I + diag(U[0,1]))` with `s = 1 + margin·√d`, and
/// `K = s(diag(B·1) − B + shift·d·I)` for a symmetric `B ~ U[0,1]`.
///
/// `K` is a shifted weighted Laplacian, so the fundamental mode has one sign
/// and the first-order shift of `λ₁` under nonnegative perturbations stays
/// away from zero.
pub fn random_base_system(d: usize, mass_margin: f64, stiffness_shift: f64, rng: &mut ChaCha8Rng) -> SystemPair {
    let scale = 1.0 + mass_margin * (d as f64).sqrt();
    let m = DMatrix::from_fn(d, d, |i, j| if i == j { scale * (1.0 + rng.random::<f64>()) } else { 0.0 });
    let mut b = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let w = rng.random::<f64>();
            b[(i, j)] = w;
            b[(j, i)] = w;
        }
    }
    let mut k = -b.clone();
    for i in 0..d {
        k[(i, i)] = b.row(i).sum() + stiffness_shift * d as f64;
    }
    SystemPair {
        mass: SymMatrix::from_upper(m).expect("square"),
        stiffness: SymMatrix::from_upper(k * scale).expect("square"),
    }
}

/// `Δᵢⱼ ~ p·U[0,1]` over all `d²` entries, then `(Δ + Δᵀ)/2`.
pub fn random_symmetrized(d: usize, p: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    let raw = DMatrix::from_fn(d, d, |_, _| p * rng.random::<f64>());
    SymMatrix::from_upper((&raw + raw.transpose()) * 0.5).expect("square")
}

pub fn draw_trial(d: usize, p: f64, config: &StudyConfig, rng: &mut ChaCha8Rng) -> TrialSample {
    let base = random_base_system(d, config.mass_margin, config.stiffness_shift, rng);
    let delta_m = random_symmetrized(d, p, rng);
    let delta_k = random_symmetrized(d, p, rng);
    TrialSample { base, delta_m, delta_k }
}

/// Compares the first-order estimate against an exact re-solve.
pub fn evaluate_trial(sample: &TrialSample, denominator: Denominator) -> Result<TrialOutcome> {
    let TrialSample { base, delta_m, delta_k } = sample;
    let before = generalized_eigenvalues(&base.mass, &base.stiffness, 1)?[0];
    let after = generalized_eigenvalues(&base.mass.add(delta_m)?, &base.stiffness.add(delta_k)?, 1)?[0];
    let predicted =
        first_order_delta_lambda_with(&base.mass, &base.stiffness, delta_m, delta_k, 0, denominator)?;
    Ok(TrialOutcome { predicted, exact: after - before })
}

/// Runs `trials` accepted draws for one `(p, d)` cell. Draws whose perturbed
/// mass is indefinite, whose estimate is undefined, or whose exact shift is
/// below [`MIN_EXACT_SHIFT`] are replaced.
pub fn study_cell(config: &StudyConfig, p: f64, d: usize) -> Result<PerturbationReport> {
    let outcomes: Vec<Result<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::stream(config.seed, &format!("perturb/p={p:e}/d={d}/trial={t}"));
            for _ in 0..config.max_redraws {
                let sample = draw_trial(d, p, config, &mut rng);
                match evaluate_trial(&sample, config.denominator) {
                    Ok(outcome) if outcome.exact.abs() >= MIN_EXACT_SHIFT => {
                        return Ok(outcome.abs_pct_error());
                    }
                    Ok(_) | Err(Error::NotPositiveDefinite { .. }) | Err(Error::DegenerateDenominator(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Err(Error::InvalidConfig(format!(
                "no admissible draw for p={p}, d={d} after {} attempts",
                config.max_redraws
            )))
        })
        .collect();
    let errors: Vec<f64> = outcomes.into_iter().collect::<Result<_>>()?;
    Ok(PerturbationReport {
        dimension: d,
        step_scale: p,
        mean_abs_pct_error: errors.iter().sum::<f64>() / errors.len() as f64,
        trials: errors.len(),
    })
}

/// Mean percentage error of the first-order estimate for every `(p, d)`,
/// ordered by `p` then `d`.
pub fn step_size_study(config: &StudyConfig) -> Result<Vec<PerturbationReport>> {
    if config.trials < 1 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if let Some(&p) = config.p_values.iter().find(|&&p| !(p > 0.0)) {
        return Err(Error::NonPositiveInput { name: "step scale p", value: p });
    }
    if config.dims.contains(&0) {
        return Err(Error::InvalidDimension("study dimensions must be at least 1".into()));
    }
    let mut reports = Vec::with_capacity(config.p_values.len() * config.dims.len());
    for &p in &config.p_values {
        for &d in &config.dims {
            reports.push(study_cell(config, p, d)?);
        }
    }
    Ok(reports)
}
