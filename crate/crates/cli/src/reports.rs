//! Table-style subcommands: JL bounds, the step-size study, modal reports
//! and ad-hoc eigensolves.

use std::fmt::Write as _;
use std::path::Path;

use aiep_core::embedding::{jl_min_dimension, JlBound};
use aiep_core::femodel::{mode_shapes, nondim_frequencies, Symmetry, WingConfig};
use aiep_core::linalg::{generalized_eig, parse_matrix_pair, Spectrum};
use aiep_core::perturbation::{step_size_study, Denominator, PerturbationReport, StudyConfig};

use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv};

pub const DEFAULT_EPSILONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];

pub fn jl_table(n: usize, epsilons: &[f64]) -> CliResult<Vec<JlBound>> {
    epsilons.iter().map(|&e| jl_min_dimension(n, e).map_err(CliError::from)).collect()
}

pub fn format_jl_table(rows: &[JlBound]) -> String {
    let mut out = String::new();
    let n = rows.first().map_or(0, |r| r.n);
    let _ = writeln!(out, "n = {n}");
    let _ = writeln!(out, "{:>8}  {:>8}", "epsilon", "k");
    for r in rows {
        let _ = writeln!(out, "{:>8}  {:>8}", r.epsilon, r.k);
    }
    out
}

pub fn write_jl_table(rows: &[JlBound], path: &Path) -> CliResult<()> {
    let n = rows.first().map_or(0, |r| r.n);
    let eps: Vec<String> = rows.iter().map(|r| num(r.epsilon)).collect();
    let header = format!("aiep jl-table\nn = {n}\nepsilons = [{}]\nk = ceil(4 ln n / (eps^2/2 - eps^3/3))", eps.join(", "));
    let data: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r.epsilon), r.k.to_string()]).collect();
    write_csv(path, &header, &["epsilon", "k"], &data)
}

pub fn perturb_study(config: &StudyConfig) -> CliResult<Vec<PerturbationReport>> {
    Ok(step_size_study(config)?)
}

fn study_header(config: &StudyConfig) -> String {
    let ps: Vec<String> = config.p_values.iter().map(|p| num(*p)).collect();
    let ds: Vec<String> = config.dims.iter().map(|d| d.to_string()).collect();
    format!(
        "aiep perturb-study\np_values = [{}]\ndims = [{}]\ntrials = {}\nseed = {}\ndenominator = {}\nmass_margin = {}\nstiffness_shift = {}\nmax_redraws = {}",
        ps.join(", "),
        ds.join(", "),
        config.trials,
        config.seed,
        config.denominator.name(),
        num(config.mass_margin),
        num(config.stiffness_shift),
        config.max_redraws
    )
}

pub fn write_study(config: &StudyConfig, reports: &[PerturbationReport], path: &Path) -> CliResult<()> {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| vec![num(r.step_scale), r.dimension.to_string(), num(r.mean_abs_pct_error), r.trials.to_string()])
        .collect();
    write_csv(path, &study_header(config), &["p", "d", "mean_abs_pct_error", "trials"], &rows)
}

pub fn parse_denominator(name: &str) -> CliResult<Denominator> {
    match name {
        "mass" => Ok(Denominator::Mass),
        "delta-mass" => Ok(Denominator::DeltaMass),
        other => Err(CliError::Validation(format!("unknown denominator `{other}` (mass | delta-mass)"))),
    }
}

/// Frequencies for `R = 0` and the configured `R`, both symmetries.
#[derive(Debug, Clone)]
pub struct ModalReport {
    pub config: WingConfig,
    pub modes: usize,
    pub symmetric_bare: Vec<f64>,
    pub symmetric: Vec<f64>,
    pub antisymmetric_bare: Vec<f64>,
    pub antisymmetric: Vec<f64>,
}

pub fn modal_report(config: &WingConfig, modes: usize) -> CliResult<ModalReport> {
    let bare = WingConfig { mass_ratio: 0.0, ..config.clone() };
    Ok(ModalReport {
        config: config.clone(),
        modes,
        symmetric_bare: nondim_frequencies(&bare, Symmetry::Symmetric, modes)?,
        symmetric: nondim_frequencies(config, Symmetry::Symmetric, modes)?,
        antisymmetric_bare: nondim_frequencies(&bare, Symmetry::Antisymmetric, modes)?,
        antisymmetric: nondim_frequencies(config, Symmetry::Antisymmetric, modes)?,
    })
}

fn wing_header(config: &WingConfig, modes: usize) -> String {
    format!(
        "aiep modal-report\nelements_per_halfspan = {}\nflexural_rigidity = {}\nhalf_span = {}\nwing_mass = {}\nmass_ratio = {}\nmodes = {modes}",
        config.elements_per_halfspan,
        num(config.flexural_rigidity),
        num(config.half_span),
        num(config.wing_mass),
        num(config.mass_ratio)
    )
}

/// Writes `frequencies.csv` and one mode-shape file per symmetry.
pub fn write_modal_report(report: &ModalReport, dir: &Path) -> CliResult<()> {
    let header = wing_header(&report.config, report.modes);
    let r = num(report.config.mass_ratio);
    let columns = [
        "mode".to_string(),
        "symmetric_R0".to_string(),
        format!("symmetric_R{r}"),
        "antisymmetric_R0".to_string(),
        format!("antisymmetric_R{r}"),
    ];
    let rows: Vec<Vec<String>> = (0..report.modes)
        .map(|i| {
            vec![
                (i + 1).to_string(),
                num(report.symmetric_bare[i]),
                num(report.symmetric[i]),
                num(report.antisymmetric_bare[i]),
                num(report.antisymmetric[i]),
            ]
        })
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_csv(&dir.join("frequencies.csv"), &header, &cols, &rows)?;
    for sym in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let shapes = mode_shapes(&report.config, sym, report.modes)?;
        let mut cols = vec!["x".to_string()];
        cols.extend((1..=report.modes).map(|m| format!("mode{m}")));
        let rows: Vec<Vec<String>> = shapes
            .coordinates
            .iter()
            .enumerate()
            .map(|(row, x)| {
                let mut line = vec![num(*x)];
                line.extend((0..report.modes).map(|m| num(shapes.shapes[(row, m)])));
                line
            })
            .collect();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        let header = format!("{header}\nsymmetry = {}", sym.name());
        write_csv(&dir.join(format!("mode_shapes_{}.csv", sym.name())), &header, &cols, &rows)?;
    }
    Ok(())
}

pub fn format_modal_report(report: &ModalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} elements per half-span, R = {}",
        report.config.elements_per_halfspan, report.config.mass_ratio
    );
    let _ = writeln!(out, "{:>5}  {:>12}  {:>12}  {:>12}  {:>12}", "mode", "sym R=0", "sym R", "anti R=0", "anti R");
    for i in 0..report.modes {
        let _ = writeln!(
            out,
            "{:>5}  {:>12.4}  {:>12.4}  {:>12.4}  {:>12.4}",
            i + 1,
            report.symmetric_bare[i],
            report.symmetric[i],
            report.antisymmetric_bare[i],
            report.antisymmetric[i]
        );
    }
    out
}

/// Solves the pencil in a matrix-pair file.
pub fn eig_file(path: &Path, count: Option<usize>) -> CliResult<Spectrum> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let (m, k) = parse_matrix_pair(&text)?;
    let count = count.unwrap_or(m.order());
    Ok(generalized_eig(&m, &k, count)?)
}

pub fn write_spectrum(spectrum: &Spectrum, source: &Path, path: &Path) -> CliResult<()> {
    let header = format!("aiep eig\npair_file = {}\ncount = {}", source.display(), spectrum.len());
    let rows: Vec<Vec<String>> =
        spectrum.eigenvalues.iter().enumerate().map(|(i, l)| vec![(i + 1).to_string(), num(*l)]).collect();
    write_csv(path, &header, &["index", "eigenvalue"], &rows)
}
