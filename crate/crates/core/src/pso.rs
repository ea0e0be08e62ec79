//! Global-best particle swarm optimization.
//!
//! Each iteration is synchronous: every particle moves using the global best
//! known at the start of the iteration, then all objective values are
//! computed (optionally in parallel), then personal and global bests are
//! updated. Random draws happen only in the sequential move phase, so a run
//! is reproducible from its seed no matter how evaluations are scheduled.
//!
//! ```text
//! v ← ω v + c₁ r₁ (p_i − x) + c₂ r₂ (p_G − x)
//! x ← x + α v
//! ```

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed;

/// Granularity of the `r₁, r₂ ~ U(0, 1)` draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RandomCoefficients {
    /// One `(r₁, r₂)` pair per particle per iteration.
    #[default]
    PerParticle,
    /// Fresh `(r₁, r₂)` for every coordinate.
    PerDimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    /// Step size applied to the new velocity in the position update.
    pub alpha: f64,
    pub particles: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Initial positions are uniform in `[-init_span, init_span]`,
    /// velocities in a tenth of that range.
    pub init_span: f64,
    pub vmax: Option<f64>,
    pub coefficients: RandomCoefficients,
    /// Evaluate the swarm on the rayon pool.
    pub parallel: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            omega: 0.7298,
            c1: 1.49618,
            c2: 1.49618,
            alpha: 1.0,
            particles: 50,
            max_iters: 100,
            seed: 0,
            init_span: 1.0,
            vmax: None,
            coefficients: RandomCoefficients::PerParticle,
            parallel: true,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 1 {
            return Err(Error::InvalidConfig("particles must be at least 1".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.init_span > 0.0) {
            return Err(Error::NonPositiveInput { name: "init_span", value: self.init_span });
        }
        if let Some(v) = self.vmax {
            if !(v > 0.0) {
                return Err(Error::NonPositiveInput { name: "vmax", value: v });
            }
        }
        for (name, v) in [("omega", self.omega), ("c1", self.c1), ("c2", self.c2), ("alpha", self.alpha)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// `2ω > (c₁ + c₂) − 2`.
pub fn stability_check(config: &PsoConfig) -> bool {
    2.0 * config.omega > (config.c1 + config.c2) - 2.0
}

/// Global best after initialization (entry 0) and after each iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub best_values: Vec<f64>,
    /// Wall time of each entry of `best_values`, in seconds.
    pub iteration_seconds: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn final_value(&self) -> f64 {
        *self.best_values.last().unwrap_or(&f64::INFINITY)
    }
}

#[derive(Debug, Clone)]
pub struct PsoResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    pub trace: ConvergenceTrace,
}

/// Swarm state; rows are stored flat, particle-major.
#[derive(Debug, Clone)]
pub struct SwarmState {
    dim: usize,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub personal_best_pos: Vec<f64>,
    pub personal_best_val: Vec<f64>,
    pub global_best_pos: Vec<f64>,
    pub global_best_val: f64,
    pub iteration: usize,
}

impl SwarmState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> usize {
        self.personal_best_val.len()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }
}

/// Something the swarm can minimize. Plain closures qualify.
pub trait Objective: Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Values for `positions` laid out particle-major, `dim` entries each.
    /// Override when a whole swarm can be evaluated more cheaply than its
    /// particles one by one.
    fn values(&self, positions: &[f64], dim: usize, parallel: bool, out: &mut [f64]) {
        if parallel {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = self.value(&positions[i * dim..(i + 1) * dim]));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.value(&positions[i * dim..(i + 1) * dim]);
            }
        }
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A swarm that can be stepped one iteration at a time.
pub struct Swarm<F> {
    objective: F,
    config: PsoConfig,
    state: SwarmState,
    rng: ChaCha8Rng,
    values: Vec<f64>,
}

impl<F: Objective> Swarm<F> {
    /// Draws the initial swarm and evaluates it.
    pub fn new(objective: F, dim: usize, config: PsoConfig) -> Result<Self> {
        config.validate()?;
        if dim < 1 {
            return Err(Error::InvalidDimension("search dimension must be at least 1".into()));
        }
        let n = config.particles;
        let span = config.init_span;
        let mut rng = seed::stream(config.seed, "pso/init");
        let positions: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-span..=span)).collect();
        let vspan = span / 10.0;
        let velocities: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-vspan..=vspan)).collect();
        let state = SwarmState {
            dim,
            personal_best_pos: positions.clone(),
            positions,
            velocities,
            personal_best_val: vec![f64::INFINITY; n],
            global_best_pos: vec![0.0; dim],
            global_best_val: f64::INFINITY,
            iteration: 0,
        };
        let mut swarm = Self {
            objective,
            rng: seed::stream(config.seed, "pso/coefficients"),
            config,
            state,
            values: vec![0.0; n],
        };
        swarm.evaluate()?;
        swarm.update_bests(true);
        Ok(swarm)
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    /// One synchronous iteration: move everyone, evaluate, update bests.
    pub fn step(&mut self) -> Result<()> {
        let PsoConfig { omega, c1, c2, alpha, vmax, coefficients, .. } = self.config;
        let dim = self.state.dim;
        let st = &mut self.state;
        for i in 0..self.config.particles {
            let range = i * dim..(i + 1) * dim;
            let x = &mut st.positions[range.clone()];
            let v = &mut st.velocities[range.clone()];
            let p = &st.personal_best_pos[range];
            let g = &st.global_best_pos;
            let (mut r1, mut r2) = (self.rng.random::<f64>(), self.rng.random::<f64>());
            for j in 0..dim {
                if coefficients == RandomCoefficients::PerDimension && j > 0 {
                    r1 = self.rng.random();
                    r2 = self.rng.random();
                }
                let mut vj = omega * v[j] + c1 * r1 * (p[j] - x[j]) + c2 * r2 * (g[j] - x[j]);
                if let Some(vm) = vmax {
                    vj = vj.clamp(-vm, vm);
                }
                v[j] = vj;
                x[j] += alpha * vj;
            }
        }
        st.iteration += 1;
        self.evaluate()?;
        self.update_bests(false);
        Ok(())
    }

    fn evaluate(&mut self) -> Result<()> {
        self.objective
            .values(&self.state.positions, self.state.dim, self.config.parallel, &mut self.values);
        if let Some(particle) = self.values.iter().position(|v| v.is_nan()) {
            return Err(Error::ObjectiveNonFinite { iteration: self.state.iteration, particle });
        }
        Ok(())
    }

    fn update_bests(&mut self, initial: bool) {
        let dim = self.state.dim;
        let st = &mut self.state;
        for (i, &val) in self.values.iter().enumerate() {
            if initial || val < st.personal_best_val[i] {
                st.personal_best_val[i] = val;
                st.personal_best_pos[i * dim..(i + 1) * dim]
                    .copy_from_slice(&st.positions[i * dim..(i + 1) * dim]);
            }
        }
        // Ties keep the lowest particle index; an all-infinite swarm still
        // gets a defined global best.
        let mut best = 0;
        for i in 1..st.personal_best_val.len() {
            if st.personal_best_val[i] < st.personal_best_val[best] {
                best = i;
            }
        }
        if initial || st.personal_best_val[best] < st.global_best_val {
            st.global_best_val = st.personal_best_val[best];
            st.global_best_pos.copy_from_slice(&st.personal_best_pos[best * dim..(best + 1) * dim]);
        }
    }

    pub fn into_result(self, trace: ConvergenceTrace) -> PsoResult {
        PsoResult {
            best_position: self.state.global_best_pos,
            best_value: self.state.global_best_val,
            trace,
        }
    }
}

/// Runs exactly `config.max_iters` iterations.
pub fn minimize<F: Objective>(objective: F, dim: usize, config: &PsoConfig) -> Result<PsoResult> {
    let start = Instant::now();
    let mut swarm = Swarm::new(objective, dim, config.clone())?;
    let mut trace = ConvergenceTrace::default();
    trace.best_values.push(swarm.state.global_best_val);
    trace.iteration_seconds.push(start.elapsed().as_secs_f64());
    for _ in 0..config.max_iters {
        let t = Instant::now();
        swarm.step()?;
        trace.best_values.push(swarm.state.global_best_val);
        trace.iteration_seconds.push(t.elapsed().as_secs_f64());
    }
    Ok(swarm.into_result(trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn stability_region() {
        assert!(stability_check(&PsoConfig::default()));
        let cfg = PsoConfig { omega: 0.0, c1: 2.0, c2: 2.0, ..Default::default() };
        assert!(!stability_check(&cfg));
        let cfg = PsoConfig { omega: 1.0, c1: 1.99, c2: 1.99, ..Default::default() };
        assert!(stability_check(&cfg));
    }

    #[test]
    fn sphere_converges_for_most_seeds() {
        let hits = (0..10)
            .filter(|&seed| {
                let cfg = PsoConfig { particles: 50, max_iters: 200, seed, ..Default::default() };
                minimize(sphere, 5, &cfg).unwrap().best_value < 1e-6
            })
            .count();
        assert!(hits >= 9, "only {hits}/10 seeds converged");
    }

    #[test]
    fn inertial_drift_without_attraction() {
        let cfg = PsoConfig {
            particles: 1,
            omega: 1.0,
            c1: 0.0,
            c2: 0.0,
            alpha: 1.0,
            seed: 4,
            ..Default::default()
        };
        let mut swarm = Swarm::new(sphere, 3, cfg).unwrap();
        let x0 = swarm.state().position(0).to_vec();
        let v0 = swarm.state().velocity(0).to_vec();
        for k in 1..=25 {
            swarm.step().unwrap();
            for j in 0..3 {
                let want = x0[j] + k as f64 * v0[j];
                assert!((swarm.state().position(0)[j] - want).abs() <= 1e-12 * (1.0 + want.abs()));
                assert_eq!(swarm.state().velocity(0)[j], v0[j]);
            }
        }
    }

    #[test]
    fn trace_is_monotone_and_sized() {
        let cfg = PsoConfig { particles: 20, max_iters: 40, seed: 1, ..Default::default() };
        let res = minimize(|x: &[f64]| (x[0] - 0.3).abs() + x[1].sin().abs(), 2, &cfg).unwrap();
        assert_eq!(res.trace.best_values.len(), 41);
        assert!(res.trace.best_values.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(res.trace.final_value(), res.best_value);
    }

    #[test]
    fn global_best_is_min_of_personal_bests() {
        let cfg = PsoConfig { particles: 15, max_iters: 1, seed: 2, ..Default::default() };
        let mut swarm = Swarm::new(sphere, 4, cfg).unwrap();
        for _ in 0..10 {
            swarm.step().unwrap();
            let st = swarm.state();
            let min = st.personal_best_val.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(st.global_best_val, min);
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        let base = PsoConfig { particles: 30, max_iters: 30, seed: 9, ..Default::default() };
        let serial = minimize(sphere, 6, &PsoConfig { parallel: false, ..base.clone() }).unwrap();
        let parallel = minimize(sphere, 6, &PsoConfig { parallel: true, ..base }).unwrap();
        assert_eq!(serial.trace.best_values, parallel.trace.best_values);
        assert_eq!(serial.best_position, parallel.best_position);
    }

    #[test]
    fn infinite_penalty_allowed_nan_rejected() {
        let cfg = PsoConfig { particles: 5, max_iters: 3, ..Default::default() };
        let res = minimize(|x: &[f64]| if x[0] > 0.0 { f64::INFINITY } else { -x[0] }, 1, &cfg);
        assert!(res.is_ok());
        let err = minimize(|_: &[f64]| f64::NAN, 1, &cfg).unwrap_err();
        assert!(matches!(err, Error::ObjectiveNonFinite { iteration: 0, .. }));
    }

    #[test]
    fn per_dimension_mode_and_vmax() {
        let cfg = PsoConfig {
            particles: 20,
            max_iters: 50,
            coefficients: RandomCoefficients::PerDimension,
            vmax: Some(0.05),
            ..Default::default()
        };
        let mut swarm = Swarm::new(sphere, 3, cfg.clone()).unwrap();
        for _ in 0..5 {
            swarm.step().unwrap();
            assert!(swarm.state().velocities.iter().all(|v| v.abs() <= 0.05));
        }
        assert!(minimize(sphere, 3, &cfg).unwrap().best_value < 1e-2);
    }

    #[test]
    fn invalid_config() {
        let cfg = PsoConfig { particles: 0, ..Default::default() };
        assert!(matches!(minimize(sphere, 2, &cfg), Err(Error::InvalidConfig(_))));
        let cfg = PsoConfig { max_iters: 0, ..Default::default() };
        assert!(matches!(minimize(sphere, 2, &cfg), Err(Error::InvalidConfig(_))));
    }
}
