//! Multi-seed runs of the embedded (or full-dimensional) swarm.

use std::path::Path;

use aiep_core::aiep::{boxed_objective, embedded_objective, toy_system, AiepProblem, SystemPair};
use aiep_core::embedding::make_embedding_with;
use aiep_core::femodel::{fe_problem, WingConfig};
use aiep_core::linalg::parse_matrix_pair;
use aiep_core::pso::{minimize, ConvergenceTrace};
use aiep_core::seed::derive_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{num, write_atomic, write_csv};
use crate::spec::{check, ExperimentSpec, ProblemKind};

pub fn build_problem(spec: &ExperimentSpec) -> CliResult<AiepProblem> {
    let p = &spec.problem;
    let targets = p.targets.clone().unwrap_or_default();
    let quantity = p.quantity.map(Into::into).unwrap_or_default();
    let problem = match p.kind {
        ProblemKind::Toy => AiepProblem::new(toy_system(), targets)?,
        ProblemKind::Fe => {
            let config = WingConfig::unit(p.fe_elements.unwrap_or(35), p.mass_ratio.unwrap_or(0.0));
            fe_problem(&config, targets, spec.parameter_scale())?
        }
        ProblemKind::Custom => {
            let path = p.pair_file.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            let (m, k) = parse_matrix_pair(&text)?;
            AiepProblem::new(SystemPair::new(m, k)?, targets)?
        }
    };
    Ok(problem.with_penalty(p.penalty).with_quantity(quantity).with_scale(spec.parameter_scale())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub embedding_seed: Option<u64>,
    pub pso_seed: u64,
    pub final_value: f64,
    #[serde(skip)]
    pub trace: ConvergenceTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub iteration: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub search_dimension: usize,
    pub parameter_count: usize,
    pub runs: Vec<SeedRun>,
    #[serde(skip)]
    pub aggregate: Vec<AggregateRow>,
    pub median_final: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run_seed(spec: &ExperimentSpec, problem: &AiepProblem, seed: u64) -> CliResult<SeedRun> {
    let pso_seed = derive_seed(seed, "run/pso");
    let config = spec.pso.to_config(pso_seed);
    let big = problem.parameter_count();
    let c = spec.embedding.half_width;
    let (result, embedding_seed) = match spec.embedding.d {
        Some(d) => {
            let embedding_seed = derive_seed(seed, "run/embedding");
            let map = make_embedding_with(big, d, c, embedding_seed, spec.embedding.gaussian.into())?;
            (minimize(embedded_objective(problem, &map)?, d, &config)?, Some(embedding_seed))
        }
        None => (minimize(boxed_objective(problem, c), big, &config)?, None),
    };
    Ok(SeedRun { seed, embedding_seed, pso_seed, final_value: result.best_value, trace: result.trace })
}

fn aggregate(runs: &[SeedRun]) -> Vec<AggregateRow> {
    let len = runs.iter().map(|r| r.trace.best_values.len()).min().unwrap_or(0);
    (0..len)
        .map(|it| {
            let column: Vec<f64> = runs.iter().map(|r| r.trace.best_values[it]).collect();
            AggregateRow {
                iteration: it,
                mean: column.iter().sum::<f64>() / column.len() as f64,
                median: median(&column),
                min: column.iter().copied().fold(f64::INFINITY, f64::min),
            }
        })
        .collect()
}

/// Runs every seed and returns the results without touching the disk.
pub fn execute(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    check(spec)?;
    let problem = build_problem(spec)?;
    let big = problem.parameter_count();
    if let Some(d) = spec.embedding.d {
        if d > big {
            return Err(CliError::Validation(format!(
                "embedding.d = {d} exceeds the parameter count {big}"
            )));
        }
    }
    let runs = spec
        .seeds
        .par_iter()
        .map(|&seed| run_seed(spec, &problem, seed))
        .collect::<CliResult<Vec<_>>>()?;
    let finals: Vec<f64> = runs.iter().map(|r| r.final_value).collect();
    Ok(RunSummary {
        search_dimension: spec.embedding.d.unwrap_or(big),
        parameter_count: big,
        aggregate: aggregate(&runs),
        median_final: median(&finals),
        runs,
    })
}

fn run_header(spec: &ExperimentSpec, extra: &str) -> String {
    format!("aiep run{extra}\nresolved experiment:\n{}", spec.to_toml())
}

/// Writes per-seed traces, per-seed timings, the aggregate and a JSON
/// summary into `dir`.
pub fn write_artifacts(spec: &ExperimentSpec, summary: &RunSummary, dir: &Path) -> CliResult<()> {
    for run in &summary.runs {
        let header = run_header(spec, &format!(", seed {}", run.seed));
        let rows: Vec<Vec<String>> = run
            .trace
            .best_values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), num(*v)])
            .collect();
        write_csv(&dir.join(format!("trace_seed{}.csv", run.seed)), &header, &["iteration", "global_best"], &rows)?;
        let rows: Vec<Vec<String>> = run
            .trace
            .iteration_seconds
            .iter()
            .enumerate()
            .map(|(i, s)| vec![i.to_string(), num(*s)])
            .collect();
        write_csv(&dir.join(format!("timing_seed{}.csv", run.seed)), &header, &["iteration", "seconds"], &rows)?;
    }
    let rows: Vec<Vec<String>> = summary
        .aggregate
        .iter()
        .map(|r| vec![r.iteration.to_string(), num(r.mean), num(r.median), num(r.min)])
        .collect();
    write_csv(&dir.join("aggregate.csv"), &run_header(spec, ""), &["iteration", "mean", "median", "min"], &rows)?;
    let json = serde_json::json!({ "spec": spec, "summary": summary });
    let text = serde_json::to_string_pretty(&json).expect("summary serializes");
    write_atomic(&dir.join("summary.json"), text.as_bytes())
}

/// Runs the experiment and writes its artifacts to `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<RunSummary> {
    let summary = execute(spec)?;
    write_artifacts(spec, &summary, &spec.output_dir)?;
    Ok(summary)
}
