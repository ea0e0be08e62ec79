//! The additive inverse eigenvalue problem on truncated spectra.
//!
//! A perturbation `Δ = (ΔM, ΔK)` is searched as a flat vector holding the
//! upper triangles of both matrices. The objective is the squared distance
//! between the `n` smallest eigenvalues (or frequencies) of
//! `(M + ΔM, K + ΔK)` and the targets.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::embedding::EmbeddingMap;
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigenvalues, SymMatrix};
use crate::pso::Objective;

pub const DEFAULT_PENALTY: f64 = 1e12;

/// An undamped system `M ẍ + K x = 0` with `M` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPair {
    pub mass: SymMatrix,
    pub stiffness: SymMatrix,
}

impl SystemPair {
    pub fn new(mass: SymMatrix, stiffness: SymMatrix) -> Result<Self> {
        if mass.order() != stiffness.order() {
            return Err(Error::DimensionMismatch { expected: mass.order(), found: stiffness.order() });
        }
        crate::linalg::cholesky(&mass)?;
        Ok(Self { mass, stiffness })
    }

    pub fn order(&self) -> usize {
        self.mass.order()
    }
}

/// Number of packed parameters for an order-`n` system: `n(n+1)/2` per
/// matrix, two matrices.
pub fn free_parameter_count(n: usize) -> usize {
    n * (n + 1)
}

fn triangle_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// `(ΔM, ΔK)` packed as `[ΔM upper triangle | ΔK upper triangle]`, each
/// row-major with the diagonal included.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPair {
    order: usize,
    packed: Vec<f64>,
}

impl DeltaPair {
    pub fn new(order: usize, packed: Vec<f64>) -> Result<Self> {
        let expected = free_parameter_count(order);
        if packed.len() != expected {
            return Err(Error::BadLength { expected, found: packed.len() });
        }
        Ok(Self { order, packed })
    }

    pub fn zeros(order: usize) -> Self {
        Self { order, packed: vec![0.0; free_parameter_count(order)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    pub fn into_packed(self) -> Vec<f64> {
        self.packed
    }
}

pub fn pack(delta_m: &SymMatrix, delta_k: &SymMatrix) -> Result<DeltaPair> {
    let n = delta_m.order();
    if delta_k.order() != n {
        return Err(Error::DimensionMismatch { expected: n, found: delta_k.order() });
    }
    let mut packed = Vec::with_capacity(free_parameter_count(n));
    for m in [delta_m, delta_k] {
        for i in 0..n {
            for j in i..n {
                packed.push(m.get(i, j));
            }
        }
    }
    Ok(DeltaPair { order: n, packed })
}

pub fn unpack(delta: &DeltaPair) -> (SymMatrix, SymMatrix) {
    let n = delta.order;
    let (m_part, k_part) = delta.packed.split_at(triangle_len(n));
    let expand = |tri: &[f64]| {
        let mut m = DMatrix::zeros(n, n);
        add_triangle(&mut m, tri);
        SymMatrix::from_upper(m).expect("square, nonzero order")
    };
    (expand(m_part), expand(k_part))
}

/// Adds a packed upper triangle into both triangles of `m`.
fn add_triangle(m: &mut DMatrix<f64>, tri: &[f64]) {
    let n = m.nrows();
    let mut idx = 0;
    for i in 0..n {
        m[(i, i)] += tri[idx];
        idx += 1;
        for j in (i + 1)..n {
            m[(i, j)] += tri[idx];
            m[(j, i)] += tri[idx];
            idx += 1;
        }
    }
}

/// How packed parameters map to matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ParameterScale {
    /// Parameters are the entries themselves.
    #[default]
    Absolute,
    /// Entry `(i, j)` of `ΔM` is `mass·√(MᵢᵢMⱼⱼ)·x`, and likewise for `ΔK`.
    /// Makes parameters dimensionless when diagonal entries span many
    /// orders of magnitude, as in beam models with rotational DOFs.
    Diagonal { mass: f64, stiffness: f64 },
}

/// Per-entry multipliers `s·√(dᵢdⱼ)`, packed like a triangle.
fn diagonal_weights(m: &SymMatrix, factor: f64) -> Result<Vec<f64>> {
    let n = m.order();
    let mut roots = Vec::with_capacity(n);
    for i in 0..n {
        let d = m.get(i, i);
        if !(d > 0.0) {
            return Err(Error::NonPositiveInput { name: "diagonal entry for parameter scaling", value: d });
        }
        roots.push(d.sqrt());
    }
    let mut w = Vec::with_capacity(triangle_len(n));
    for i in 0..n {
        for j in i..n {
            w.push(factor * roots[i] * roots[j]);
        }
    }
    Ok(w)
}

/// What the targets are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumQuantity {
    /// Raw eigenvalues `λ`.
    #[default]
    Eigenvalue,
    /// Frequencies `sign(λ)·√|λ|`.
    Frequency,
}

impl SpectrumQuantity {
    pub fn from_eigenvalue(self, lambda: f64) -> f64 {
        match self {
            SpectrumQuantity::Eigenvalue => lambda,
            SpectrumQuantity::Frequency => lambda.signum() * lambda.abs().sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AiepProblem {
    base: SystemPair,
    targets: Vec<f64>,
    penalty: f64,
    quantity: SpectrumQuantity,
    scale: ParameterScale,
    // packed multipliers for ΔM then ΔK; empty when absolute
    weights: Vec<f64>,
}

impl AiepProblem {
    pub fn new(base: SystemPair, targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() || targets.len() > base.order() {
            return Err(Error::InvalidCount { requested: targets.len(), order: base.order() });
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("targets must be finite".into()));
        }
        if targets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig("targets must be sorted ascending".into()));
        }
        Ok(Self {
            base,
            targets,
            penalty: DEFAULT_PENALTY,
            quantity: SpectrumQuantity::Eigenvalue,
            scale: ParameterScale::Absolute,
            weights: Vec::new(),
        })
    }

    pub fn with_scale(mut self, scale: ParameterScale) -> Result<Self> {
        self.weights = match scale {
            ParameterScale::Absolute => Vec::new(),
            ParameterScale::Diagonal { mass, stiffness } => {
                let mut w = diagonal_weights(&self.base.mass, mass)?;
                w.extend(diagonal_weights(&self.base.stiffness, stiffness)?);
                w
            }
        };
        self.scale = scale;
        Ok(self)
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_quantity(mut self, quantity: SpectrumQuantity) -> Self {
        self.quantity = quantity;
        self
    }

    pub fn base(&self) -> &SystemPair {
        &self.base
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn truncation(&self) -> usize {
        self.targets.len()
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn quantity(&self) -> SpectrumQuantity {
        self.quantity
    }

    pub fn scale(&self) -> ParameterScale {
        self.scale
    }

    /// The `DeltaPair` a parameter vector stands for under the scaling.
    pub fn delta_from_parameters(&self, params: &[f64]) -> Result<DeltaPair> {
        let mut packed = params.to_vec();
        if !self.weights.is_empty() && packed.len() == self.weights.len() {
            packed.iter_mut().zip(&self.weights).for_each(|(x, w)| *x *= w);
        }
        DeltaPair::new(self.base.order(), packed)
    }

    pub fn parameter_count(&self) -> usize {
        free_parameter_count(self.base.order())
    }

    /// Spectrum of the perturbed pencil for a parameter vector, or `None`
    /// when `M + ΔM` is not positive definite.
    pub fn perturbed_spectrum(&self, packed: &[f64]) -> Option<Vec<f64>> {
        let n = self.base.order();
        assert_eq!(packed.len(), free_parameter_count(n), "packed perturbation length");
        let scaled;
        let packed = if self.weights.is_empty() {
            packed
        } else {
            scaled = packed.iter().zip(&self.weights).map(|(x, w)| x * w).collect::<Vec<_>>();
            &scaled
        };
        let (m_part, k_part) = packed.split_at(triangle_len(n));
        let mut m = self.base.mass.as_matrix().clone();
        add_triangle(&mut m, m_part);
        let mut k = self.base.stiffness.as_matrix().clone();
        add_triangle(&mut k, k_part);
        let m = SymMatrix::from_upper(m).ok()?;
        let k = SymMatrix::from_upper(k).ok()?;
        generalized_eigenvalues(&m, &k, self.truncation()).ok()
    }

    /// `Σ (σ†ᵢ − σᵢ)²` over the truncated spectrum; the penalty when the
    /// perturbed mass matrix is not positive definite.
    ///
    /// Panics if `packed` does not have `free_parameter_count(N)` entries.
    pub fn objective_packed(&self, packed: &[f64]) -> f64 {
        match self.perturbed_spectrum(packed) {
            None => self.penalty,
            Some(values) => {
                let value: f64 = values
                    .iter()
                    .zip(&self.targets)
                    .map(|(&lam, &t)| (t - self.quantity.from_eigenvalue(lam)).powi(2))
                    .sum();
                if value.is_finite() {
                    value
                } else {
                    self.penalty
                }
            }
        }
    }

    /// Objective at an explicit perturbation, bypassing any parameter
    /// scaling.
    pub fn objective(&self, delta: &DeltaPair) -> f64 {
        if self.weights.is_empty() {
            return self.objective_packed(&delta.packed);
        }
        let unscaled: Vec<f64> = delta.packed.iter().zip(&self.weights).map(|(x, w)| x / w).collect();
        self.objective_packed(&unscaled)
    }
}

/// `y ↦ objective(lift(y))`.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddedObjective<'a> {
    problem: &'a AiepProblem,
    map: &'a EmbeddingMap,
}

// Particles lifted per matrix product; bounds the scratch to D × this.
const LIFT_BATCH: usize = 32;

impl Objective for EmbeddedObjective<'_> {
    fn value(&self, y: &[f64]) -> f64 {
        let mut x = vec![0.0; self.map.ambient_dim()];
        match self.map.lift_into(y, &mut x) {
            Ok(()) => self.problem.objective_packed(&x),
            Err(_) => self.problem.penalty(),
        }
    }

    fn values(&self, positions: &[f64], dim: usize, parallel: bool, out: &mut [f64]) {
        let big = self.map.ambient_dim();
        let c = self.map.half_width();
        for (chunk, vals) in positions.chunks(dim * LIFT_BATCH).zip(out.chunks_mut(LIFT_BATCH)) {
            // particle-major rows are the columns of a d × batch matrix
            let y = DMatrix::from_column_slice(dim, vals.len(), chunk);
            let mut x = self.map.matrix() * y;
            x.iter_mut().for_each(|v| *v = v.clamp(-c, c));
            let x = x.as_slice();
            let eval = |(i, o): (usize, &mut f64)| *o = self.problem.objective_packed(&x[i * big..(i + 1) * big]);
            if parallel {
                vals.par_iter_mut().enumerate().for_each(eval);
            } else {
                vals.iter_mut().enumerate().for_each(eval);
            }
        }
    }
}

pub fn embedded_objective<'a>(problem: &'a AiepProblem, map: &'a EmbeddingMap) -> Result<EmbeddedObjective<'a>> {
    if map.ambient_dim() != problem.parameter_count() {
        return Err(Error::DimensionMismatch {
            expected: problem.parameter_count(),
            found: map.ambient_dim(),
        });
    }
    Ok(EmbeddedObjective { problem, map })
}

/// Full-dimensional objective with the same box projection the embedded
/// runs use.
pub fn boxed_objective(problem: &AiepProblem, half_width: f64) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |x: &[f64]| {
        if x.iter().all(|v| v.abs() <= half_width) {
            problem.objective_packed(x)
        } else {
            problem.objective_packed(&crate::embedding::box_project(x, half_width))
        }
    }
}

/// The 10-DOF stiffness of the toy problem.
pub const TOY_STIFFNESS: [[f64; 10]; 10] = [
    [200., -10., -20., -5., -5., -10., 0., 0., -50., -50.],
    [-10., 100., 0., 0., 0., 0., -20., -10., -20., -10.],
    [-20., 0., 300., -40., -30., -60., -10., 0., -20., -10.],
    [-5., 0., -40., 400., -30., -40., -50., -20., -10., -70.],
    [-5., 0., -30., -30., 150., -10., -5., -5., -20., 0.],
    [-10., 0., -60., -40., -10., 250., 0., 0., 0., -80.],
    [0., -20., -10., -50., -5., 0., 120., -5., 0., -10.],
    [0., -10., 0., -20., -5., 0., -5., 250., 0., -100.],
    [-50., -20., -20., -10., -20., 0., 0., 0., 350., -40.],
    [-50., -10., -10., -70., 0., -80., -10., -100., -40., 400.],
];

/// Target eigenvalues of the toy problem.
pub const TOY_TARGETS: [f64; 2] = [2.0, 5.0];

/// `M = diag(1, …, 10)` with the stiffness above.
pub fn toy_system() -> SystemPair {
    let k = DMatrix::from_fn(10, 10, |i, j| TOY_STIFFNESS[i][j]);
    let diag: Vec<f64> = (1..=10).map(f64::from).collect();
    SystemPair {
        mass: SymMatrix::from_diagonal(&diag).expect("non-empty"),
        stiffness: SymMatrix::try_symmetric(k, 0.0).expect("toy stiffness is symmetric"),
    }
}

pub fn toy_problem() -> AiepProblem {
    AiepProblem::new(toy_system(), TOY_TARGETS.to_vec()).expect("valid toy targets")
}
