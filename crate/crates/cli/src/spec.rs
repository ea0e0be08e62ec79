//! The experiment file: TOML with one table per module.
//!
//! ```toml
//! seeds = [0, 1, 2]
//! output_dir = "runs/toy-d50"
//!
//! [problem]
//! kind = "toy"          # toy | fe | custom
//!
//! [embedding]
//! d = 50                # omit for a full-dimensional run
//! half_width = 10.0
//!
//! [pso]
//! particles = 500
//! max_iters = 100
//! coefficients = "per-dimension"
//! ```
//!
//! Unset problem fields are filled from the preset for `kind`; the resolved
//! form is what gets written into artifact headers.

use std::path::PathBuf;

use aiep_core::aiep::{ParameterScale, SpectrumQuantity, TOY_TARGETS};
use aiep_core::embedding::GaussianScale;
use aiep_core::femodel::{B737_MASS_RATIO, FE_TARGETS};
use aiep_core::pso::{PsoConfig, RandomCoefficients};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Parameter scaling used by the `fe` preset.
pub const FE_MASS_SCALE: f64 = 1e-3;
pub const FE_STIFFNESS_SCALE: f64 = 1e-6;
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Toy,
    Fe,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Eigenvalue,
    Frequency,
}

impl From<Quantity> for SpectrumQuantity {
    fn from(q: Quantity) -> Self {
        match q {
            Quantity::Eigenvalue => SpectrumQuantity::Eigenvalue,
            Quantity::Frequency => SpectrumQuantity::Frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    Absolute,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianChoice {
    #[default]
    StdDev,
    Variance,
}

impl From<GaussianChoice> for GaussianScale {
    fn from(g: GaussianChoice) -> Self {
        match g {
            GaussianChoice::StdDev => GaussianScale::StdDev,
            GaussianChoice::Variance => GaussianScale::Variance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientChoice {
    #[default]
    PerParticle,
    PerDimension,
}

impl From<CoefficientChoice> for RandomCoefficients {
    fn from(c: CoefficientChoice) -> Self {
        match c {
            CoefficientChoice::PerParticle => RandomCoefficients::PerParticle,
            CoefficientChoice::PerDimension => RandomCoefficients::PerDimension,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    /// Elements per half-span (`fe` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fe_elements: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_ratio: Option<f64>,
    /// Matrix-pair file (`custom` only): M then K in the plain-text format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    /// Truncation count; must equal the number of targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness_scale: Option<f64>,
}

fn default_penalty() -> f64 {
    aiep_core::aiep::DEFAULT_PENALTY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub gaussian: GaussianChoice,
}

fn default_half_width() -> f64 {
    DEFAULT_HALF_WIDTH
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        Self { d: None, half_width: DEFAULT_HALF_WIDTH, gaussian: GaussianChoice::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoSection {
    pub particles: usize,
    pub max_iters: usize,
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub init_span: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vmax: Option<f64>,
    pub coefficients: CoefficientChoice,
    pub parallel: bool,
}

impl Default for PsoSection {
    fn default() -> Self {
        let c = PsoConfig::default();
        Self {
            particles: c.particles,
            max_iters: c.max_iters,
            omega: c.omega,
            c1: c.c1,
            c2: c.c2,
            alpha: c.alpha,
            init_span: c.init_span,
            vmax: c.vmax,
            coefficients: CoefficientChoice::default(),
            parallel: c.parallel,
        }
    }
}

impl PsoSection {
    pub fn to_config(&self, seed: u64) -> PsoConfig {
        PsoConfig {
            omega: self.omega,
            c1: self.c1,
            c2: self.c2,
            alpha: self.alpha,
            particles: self.particles,
            max_iters: self.max_iters,
            seed,
            init_span: self.init_span,
            vmax: self.vmax,
            coefficients: self.coefficients.into(),
            parallel: self.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub problem: ProblemSection,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default)]
    pub pso: PsoSection,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentSpec {
    /// A spec for `kind` with every preset field filled in.
    pub fn preset(kind: ProblemKind) -> Self {
        let problem = ProblemSection {
            kind,
            fe_elements: None,
            mass_ratio: None,
            pair_file: None,
            targets: None,
            n: None,
            penalty: default_penalty(),
            quantity: None,
            scale: None,
            mass_scale: None,
            stiffness_scale: None,
        };
        let spec = Self {
            seeds: default_seeds(),
            output_dir: default_output_dir(),
            problem,
            embedding: EmbeddingSection::default(),
            pso: PsoSection::default(),
        };
        spec.resolved()
    }

    /// Fills unset problem fields from the preset for its kind.
    pub fn resolved(mut self) -> Self {
        let p = &mut self.problem;
        match p.kind {
            ProblemKind::Toy => {
                p.targets.get_or_insert_with(|| TOY_TARGETS.to_vec());
                p.quantity.get_or_insert(Quantity::Eigenvalue);
                p.scale.get_or_insert(ScaleKind::Absolute);
            }
            ProblemKind::Fe => {
                p.fe_elements.get_or_insert(35);
                p.mass_ratio.get_or_insert(B737_MASS_RATIO);
                p.targets.get_or_insert_with(|| FE_TARGETS.to_vec());
                p.quantity.get_or_insert(Quantity::Frequency);
                p.scale.get_or_insert(ScaleKind::Diagonal);
            }
            ProblemKind::Custom => {
                p.quantity.get_or_insert(Quantity::Eigenvalue);
                p.scale.get_or_insert(ScaleKind::Absolute);
            }
        }
        if p.scale == Some(ScaleKind::Diagonal) {
            p.mass_scale.get_or_insert(FE_MASS_SCALE);
            p.stiffness_scale.get_or_insert(FE_STIFFNESS_SCALE);
        }
        if let (None, Some(t)) = (p.n, p.targets.as_ref()) {
            p.n = Some(t.len());
        }
        self
    }

    pub fn parameter_scale(&self) -> ParameterScale {
        match self.problem.scale {
            Some(ScaleKind::Diagonal) => ParameterScale::Diagonal {
                mass: self.problem.mass_scale.unwrap_or(FE_MASS_SCALE),
                stiffness: self.problem.stiffness_scale.unwrap_or(FE_STIFFNESS_SCALE),
            },
            _ => ParameterScale::Absolute,
        }
    }

    /// Checks that do not need the base system. Each message names the
    /// offending field.
    pub fn validate(&self) -> Result<(), FieldError> {
        let p = &self.problem;
        if self.seeds.is_empty() {
            return Err(FieldError::new(None, "seeds", "at least one seed is required"));
        }
        let targets = p
            .targets
            .as_ref()
            .ok_or_else(|| FieldError::new(Some("problem"), "targets", "required for custom problems"))?;
        if targets.is_empty() {
            return Err(FieldError::new(Some("problem"), "targets", "must not be empty"));
        }
        if let Some(n) = p.n {
            if n != targets.len() {
                return Err(FieldError::new(
                    Some("problem"),
                    "n",
                    format!("n = {n} but {} targets given", targets.len()),
                ));
            }
        }
        if targets.windows(2).any(|w| w[0] > w[1]) {
            return Err(FieldError::new(Some("problem"), "targets", "must be sorted ascending"));
        }
        match p.kind {
            ProblemKind::Fe => {
                if p.fe_elements == Some(0) {
                    return Err(FieldError::new(Some("problem"), "fe_elements", "must be at least 1"));
                }
            }
            ProblemKind::Custom => {
                if p.pair_file.is_none() {
                    return Err(FieldError::new(Some("problem"), "pair_file", "required for custom problems"));
                }
            }
            ProblemKind::Toy => {}
        }
        if !(p.penalty > 0.0 && p.penalty.is_finite()) {
            return Err(FieldError::new(Some("problem"), "penalty", "must be positive and finite"));
        }
        for (key, v) in [("mass_scale", p.mass_scale), ("stiffness_scale", p.stiffness_scale)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(FieldError::new(Some("problem"), key, "must be positive"));
                }
            }
        }
        if !(self.embedding.half_width > 0.0) {
            return Err(FieldError::new(Some("embedding"), "half_width", "must be positive"));
        }
        if self.embedding.d == Some(0) {
            return Err(FieldError::new(Some("embedding"), "d", "must be at least 1"));
        }
        self.pso
            .to_config(0)
            .validate()
            .map_err(|e| FieldError::new(Some("pso"), "", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

/// A semantic error tied to `[section] key`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub section: Option<&'static str>,
    pub key: &'static str,
    pub message: String,
}

impl FieldError {
    fn new(section: Option<&'static str>, key: &'static str, message: impl Into<String>) -> Self {
        Self { section, key, message: message.into() }
    }

    fn describe(&self, source: Option<&str>) -> String {
        let field = match (self.section, self.key) {
            (Some(s), "") => s.to_string(),
            (Some(s), k) => format!("{s}.{k}"),
            (None, k) => k.to_string(),
        };
        match source.and_then(|src| line_of(src, self.section, self.key)) {
            Some(line) => format!("line {line}, field `{field}`: {}", self.message),
            None => format!("field `{field}`: {}", self.message),
        }
    }
}

/// 1-based line of `key = …` inside `[section]`, or of the section header
/// when the key is absent.
fn line_of(source: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    let mut header_line = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if section == Some(name.trim()) {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current.as_deref() != section || key.is_empty() {
            continue;
        }
        if let Some((lhs, _)) = line.split_once('=') {
            if lhs.trim() == key {
                return Some(i + 1);
            }
        }
    }
    header_line
}

/// Parses, resolves presets and validates.
pub fn parse_spec(source: &str) -> CliResult<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(source).map_err(|e| {
        let message = e.message().to_string();
        match e.span() {
            Some(span) => {
                let line = source[..span.start].matches('\n').count() + 1;
                CliError::Validation(format!("experiment file line {line}: {message}"))
            }
            None => CliError::Validation(format!("experiment file: {message}")),
        }
    })?;
    let spec = spec.resolved();
    spec.validate().map_err(|e| CliError::Validation(format!("experiment file {}", e.describe(Some(source)))))?;
    Ok(spec)
}

pub fn load_spec(path: &std::path::Path) -> CliResult<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Validation for specs built in code.
pub fn check(spec: &ExperimentSpec) -> CliResult<()> {
    spec.validate().map_err(|e| CliError::Validation(format!("experiment {}", e.describe(None))))
}
