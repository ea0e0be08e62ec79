//! One-dimensional Euler-Bernoulli wing model with a fuselage point mass.
//!
//! The half-span runs from the fuselage (node 0) to the wing tip. Each node
//! carries a transverse displacement and a rotation. Symmetric modes fix the
//! root rotation; antisymmetric modes fix the root translation, which also
//! removes the fuselage mass from the problem.

use nalgebra::{DMatrix, Matrix4};

use crate::aiep::{AiepProblem, ParameterScale, SpectrumQuantity, SystemPair};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eig, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

impl Symmetry {
    /// Index of the root DOF removed by this symmetry condition.
    fn removed_dof(self) -> usize {
        match self {
            Symmetry::Symmetric => 1,
            Symmetry::Antisymmetric => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Antisymmetric => "antisymmetric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WingConfig {
    pub elements_per_halfspan: usize,
    /// Flexural stiffness `EI`.
    pub flexural_rigidity: f64,
    /// Half-span length `L`.
    pub half_span: f64,
    /// Half-wing mass `M_w`, spread uniformly over the half-span.
    pub wing_mass: f64,
    /// Fuselage-to-wing mass ratio `R = M_F / M_w`.
    pub mass_ratio: f64,
}

/// Mass ratio of the 737-300 model.
pub const B737_MASS_RATIO: f64 = 1.35;

impl WingConfig {
    /// `EI = L = M_w = 1`.
    pub fn unit(elements_per_halfspan: usize, mass_ratio: f64) -> Self {
        Self {
            elements_per_halfspan,
            flexural_rigidity: 1.0,
            half_span: 1.0,
            wing_mass: 1.0,
            mass_ratio,
        }
    }

    pub fn b737(elements_per_halfspan: usize) -> Self {
        Self::unit(elements_per_halfspan, B737_MASS_RATIO)
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements_per_halfspan < 1 {
            return Err(Error::InvalidDimension("at least one element per half-span".into()));
        }
        for (name, value) in [
            ("flexural rigidity", self.flexural_rigidity),
            ("half-span", self.half_span),
            ("wing mass", self.wing_mass),
        ] {
            positive(name, value)?;
        }
        if !(self.mass_ratio >= 0.0) {
            return Err(Error::InvalidConfig(format!("mass ratio must be >= 0, got {}", self.mass_ratio)));
        }
        Ok(())
    }

    pub fn element_length(&self) -> f64 {
        self.half_span / self.elements_per_halfspan as f64
    }

    pub fn dof_count(&self) -> usize {
        2 * (self.elements_per_halfspan + 1) - 1
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}

/// Consistent stiffness and mass matrices of one beam element, DOF order
/// `(w₁, θ₁, w₂, θ₂)`.
pub fn element_matrices(ei: f64, ell: f64, me: f64) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    positive("flexural rigidity", ei)?;
    positive("element length", ell)?;
    positive("element mass", me)?;
    let l = ell;
    let l2 = l * l;
    #[rustfmt::skip]
    let k = Matrix4::new(
        12.0,     6.0 * l,  -12.0,    6.0 * l,
        6.0 * l,  4.0 * l2, -6.0 * l, 2.0 * l2,
        -12.0,    -6.0 * l, 12.0,     -6.0 * l,
        6.0 * l,  2.0 * l2, -6.0 * l, 4.0 * l2,
    ) * (ei / (l2 * l));
    #[rustfmt::skip]
    let m = Matrix4::new(
        13.0 / 35.0,         11.0 * l / 210.0,  9.0 / 70.0,          -13.0 * l / 420.0,
        11.0 * l / 210.0,    l2 / 105.0,        13.0 * l / 420.0,    -l2 / 140.0,
        9.0 / 70.0,          13.0 * l / 420.0,  13.0 / 35.0,         -11.0 * l / 210.0,
        -13.0 * l / 420.0,   -l2 / 140.0,       -11.0 * l / 210.0,   l2 / 105.0,
    ) * me;
    Ok((k, m))
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub system: SystemPair,
    pub symmetry: Symmetry,
    pub dof_count: usize,
    /// Node positions from root (0) to tip (`L`).
    pub node_coordinates: Vec<f64>,
}

impl ReducedSystem {
    /// Expands a reduced vector to the full `(w, θ)` layout, zero at the
    /// removed root DOF.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let removed = self.symmetry.removed_dof();
        let mut full = Vec::with_capacity(reduced.len() + 1);
        full.extend_from_slice(&reduced[..removed]);
        full.push(0.0);
        full.extend_from_slice(&reduced[removed..]);
        full
    }

    /// Reduced indices of the translational DOFs, root to tip; `None` marks
    /// the removed root translation.
    pub fn translation_indices(&self) -> Vec<Option<usize>> {
        let nodes = self.node_coordinates.len();
        (0..nodes)
            .map(|node| {
                let full = 2 * node;
                match self.symmetry {
                    Symmetry::Symmetric if full == 0 => Some(0),
                    Symmetry::Symmetric => Some(full - 1),
                    Symmetry::Antisymmetric if full == 0 => None,
                    Symmetry::Antisymmetric => Some(full - 1),
                }
            })
            .collect()
    }
}

/// Assembles the half-span and applies the root condition for `symmetry`.
pub fn assemble(config: &WingConfig, symmetry: Symmetry) -> Result<ReducedSystem> {
    config.validate()?;
    let n_el = config.elements_per_halfspan;
    let ell = config.element_length();
    let me = config.wing_mass / n_el as f64;
    let (ke, mke) = element_matrices(config.flexural_rigidity, ell, me)?;
    let full = 2 * (n_el + 1);
    let mut k = DMatrix::<f64>::zeros(full, full);
    let mut m = DMatrix::<f64>::zeros(full, full);
    for e in 0..n_el {
        let base = 2 * e;
        for a in 0..4 {
            for b in 0..4 {
                k[(base + a, base + b)] += ke[(a, b)];
                m[(base + a, base + b)] += mke[(a, b)];
            }
        }
    }
    m[(0, 0)] += config.mass_ratio * config.wing_mass;

    let removed = symmetry.removed_dof();
    let keep: Vec<usize> = (0..full).filter(|&i| i != removed).collect();
    let m = SymMatrix::from_upper(m)?.submatrix(&keep);
    let k = SymMatrix::from_upper(k)?.submatrix(&keep);
    Ok(ReducedSystem {
        system: SystemPair::new(m, k)?,
        symmetry,
        dof_count: keep.len(),
        node_coordinates: (0..=n_el).map(|i| i as f64 * ell).collect(),
    })
}

/// Unit-scaled (`EI = L = M_w = 1`) system for the given element count and
/// mass ratio; its eigenvalues are squared non-dimensional frequencies.
pub fn assemble_unit(config: &WingConfig, symmetry: Symmetry) -> Result<ReducedSystem> {
    assemble(&WingConfig::unit(config.elements_per_halfspan, config.mass_ratio), symmetry)
}

/// First `k` non-dimensional frequencies `ω̂ = ω √(M_w L³ / EI)`, ascending.
pub fn nondim_frequencies(config: &WingConfig, symmetry: Symmetry, k: usize) -> Result<Vec<f64>> {
    let reduced = assemble_unit(config, symmetry)?;
    let spectrum = generalized_eig(&reduced.system.mass, &reduced.system.stiffness, k)?;
    Ok(spectrum.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect())
}

/// Desired first three symmetric frequencies.
pub const FE_TARGETS: [f64; 3] = [2.0, 7.0, 22.0];

/// Symmetric-mode inverse problem on the unit-scaled model, matching
/// non-dimensional frequencies.
pub fn fe_problem(config: &WingConfig, targets: Vec<f64>, scale: ParameterScale) -> Result<AiepProblem> {
    let reduced = assemble_unit(config, Symmetry::Symmetric)?;
    AiepProblem::new(reduced.system, targets)?
        .with_quantity(SpectrumQuantity::Frequency)
        .with_scale(scale)
}

/// Translational mode shapes across the full span.
#[derive(Debug, Clone)]
pub struct ModeShapes {
    pub symmetry: Symmetry,
    /// Span positions from `-L` to `L`.
    pub coordinates: Vec<f64>,
    /// One column per mode, one row per coordinate.
    pub shapes: DMatrix<f64>,
    pub frequencies: Vec<f64>,
}

impl ModeShapes {
    /// Sign changes of mode `mode` over the half-span from root to tip.
    pub fn half_span_sign_changes(&self, mode: usize) -> usize {
        let half = (self.coordinates.len() - 1) / 2;
        let column = self.shapes.column(mode);
        let tail: Vec<f64> = column.iter().skip(half).copied().filter(|v| v.abs() > 1e-9).collect();
        tail.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }
}

/// First `k` mode shapes, mirrored about the root (even for symmetric, odd
/// for antisymmetric) and scaled to unit peak amplitude.
pub fn mode_shapes(config: &WingConfig, symmetry: Symmetry, k: usize) -> Result<ModeShapes> {
    let reduced = assemble(config, symmetry)?;
    let spectrum = generalized_eig(&reduced.system.mass, &reduced.system.stiffness, k)?;
    let vectors = spectrum.eigenvectors.as_ref().expect("generalized_eig returns vectors");
    let trans = reduced.translation_indices();
    let nodes = reduced.node_coordinates.len();
    let mirror = match symmetry {
        Symmetry::Symmetric => 1.0,
        Symmetry::Antisymmetric => -1.0,
    };
    let mut coordinates = Vec::with_capacity(2 * nodes - 1);
    for node in (1..nodes).rev() {
        coordinates.push(-reduced.node_coordinates[node]);
    }
    coordinates.extend_from_slice(&reduced.node_coordinates);

    let mut shapes = DMatrix::<f64>::zeros(coordinates.len(), k);
    for mode in 0..k {
        let half: Vec<f64> = trans
            .iter()
            .map(|idx| idx.map_or(0.0, |i| vectors[(i, mode)]))
            .collect();
        let mut full: Vec<f64> = (1..nodes).rev().map(|node| mirror * half[node]).collect();
        full.extend_from_slice(&half);
        let peak = full.iter().copied().fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        for (row, v) in full.iter().enumerate() {
            shapes[(row, mode)] = if peak != 0.0 { v / peak } else { 0.0 };
        }
    }
    let scale = (config.wing_mass * config.half_span.powi(3) / config.flexural_rigidity).sqrt();
    let frequencies = spectrum.eigenvalues.iter().map(|&l| l.max(0.0).sqrt() * scale).collect();
    Ok(ModeShapes { symmetry, coordinates, shapes, frequencies })
}

/// Inputs of the statistical wing and fuselage weight equations, in the
/// imperial units of the aircraft tables.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightInputs {
    /// Wing area `S_w` (ft²).
    pub wing_area: f64,
    /// Fuel in wing `W_fw` (lb).
    pub wing_fuel_weight: f64,
    /// Aspect ratio `A`.
    pub aspect_ratio: f64,
    /// Quarter-chord sweep `Λ` (degrees).
    pub sweep_deg: f64,
    /// Cruise dynamic pressure `q` (lb/ft²).
    pub dynamic_pressure: f64,
    /// Taper ratio `λ`.
    pub taper_ratio: f64,
    /// Thickness-to-chord ratio `t/c`.
    pub thickness_to_chord: f64,
    /// Ultimate load factor `N_z`.
    pub load_factor: f64,
    /// Design gross weight `W_dg` (lb).
    pub design_gross_weight: f64,
    /// Fuselage wetted area `S_f` (ft²).
    pub fuselage_area: f64,
    /// Tail length `L_t` (ft).
    pub tail_length: f64,
    /// Fuselage length over structural depth `L/D`.
    pub fuselage_slenderness: f64,
    /// Pressurized volume `V_pr` (ft³).
    pub pressurized_volume: f64,
    /// Cabin pressure differential `P_δ`.
    pub cabin_pressure_delta: f64,
}

impl WeightInputs {
    /// 737-300 values. Taper ratio, slenderness and pressurized volume are
    /// not tabulated: the taper is a typical transport value, and the other
    /// two come from the fuselage length (105.94 ft) and depth (12.33 ft).
    pub fn b737() -> Self {
        let length = 105.94;
        let depth = 12.33;
        Self {
            wing_area: 1133.90,
            wing_fuel_weight: 35640.0,
            aspect_ratio: 9.16,
            sweep_deg: 25.0,
            dynamic_pressure: 234.44,
            taper_ratio: 0.24,
            thickness_to_chord: 0.08,
            load_factor: 5.7,
            design_gross_weight: 109269.60,
            fuselage_area: 4104.80,
            tail_length: 15.89,
            fuselage_slenderness: length / depth,
            pressurized_volume: std::f64::consts::FRAC_PI_4 * depth * depth * length,
            cabin_pressure_delta: 8.0,
        }
    }
}

pub fn wing_weight(w: &WeightInputs) -> Result<f64> {
    for (name, v) in [
        ("wing area", w.wing_area),
        ("wing fuel weight", w.wing_fuel_weight),
        ("aspect ratio", w.aspect_ratio),
        ("dynamic pressure", w.dynamic_pressure),
        ("taper ratio", w.taper_ratio),
        ("thickness-to-chord", w.thickness_to_chord),
        ("load factor", w.load_factor),
        ("design gross weight", w.design_gross_weight),
    ] {
        positive(name, v)?;
    }
    let cos_sweep = w.sweep_deg.to_radians().cos();
    if !(cos_sweep > 0.0) {
        return Err(Error::NonPositiveInput { name: "cos(sweep)", value: cos_sweep });
    }
    Ok(0.036
        * w.wing_area.powf(0.758)
        * w.wing_fuel_weight.powf(0.0035)
        * (w.aspect_ratio / (cos_sweep * cos_sweep)).powf(0.6)
        * w.dynamic_pressure.powf(0.006)
        * w.taper_ratio.powf(0.04)
        * (100.0 * w.thickness_to_chord / cos_sweep).powf(-0.3)
        * (w.load_factor * w.design_gross_weight).powf(0.49))
}

/// `W_press = 11.9 + V_pr·P_δ`.
pub fn pressurization_weight(w: &WeightInputs) -> Result<f64> {
    if w.pressurized_volume < 0.0 || w.cabin_pressure_delta < 0.0 {
        return Err(Error::NonPositiveInput { name: "pressurization input", value: w.pressurized_volume.min(w.cabin_pressure_delta) });
    }
    Ok(11.9 + w.pressurized_volume * w.cabin_pressure_delta)
}

pub fn fuselage_weight(w: &WeightInputs) -> Result<f64> {
    for (name, v) in [
        ("fuselage area", w.fuselage_area),
        ("load factor", w.load_factor),
        ("design gross weight", w.design_gross_weight),
        ("tail length", w.tail_length),
        ("fuselage slenderness", w.fuselage_slenderness),
        ("dynamic pressure", w.dynamic_pressure),
    ] {
        positive(name, v)?;
    }
    Ok(0.052
        * w.fuselage_area.powf(1.086)
        * (w.load_factor * w.design_gross_weight).powf(0.177)
        * w.tail_length.powf(-0.051)
        * w.fuselage_slenderness.powf(-0.072)
        * w.dynamic_pressure.powf(0.241)
        + pressurization_weight(w)?)
}

/// `R = M_F / M_w`; the half-aircraft split cancels.
pub fn mass_ratio(wing_weight: f64, fuselage_weight: f64) -> Result<f64> {
    if wing_weight == 0.0 {
        return Err(Error::DivisionByZero("wing weight"));
    }
    Ok(fuselage_weight / wing_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector4;

    #[test]
    fn element_symmetry_and_rigid_modes() {
        let (k, m) = element_matrices(2.5, 0.4, 1.7).unwrap();
        assert_abs_diff_eq!((k - k.transpose()).amax(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((m - m.transpose()).amax(), 0.0, epsilon = 1e-14);
        let translate = Vector4::new(1.0, 0.0, 1.0, 0.0);
        let rotate = Vector4::new(-0.2, 1.0, 0.2, 1.0);
        assert!((k * translate).amax() < 1e-12);
        assert!((k * rotate).amax() < 1e-12);
        assert_abs_diff_eq!(translate.dot(&(m * translate)), 1.7, epsilon = 1e-14);
    }

    #[test]
    fn element_rejects_nonpositive() {
        assert!(matches!(element_matrices(0.0, 1.0, 1.0), Err(Error::NonPositiveInput { .. })));
        assert!(matches!(element_matrices(1.0, -1.0, 1.0), Err(Error::NonPositiveInput { .. })));
    }

    #[test]
    fn one_element_symmetric_is_element_without_root_rotation() {
        let cfg = WingConfig { mass_ratio: 0.7, ..WingConfig::unit(1, 0.0) };
        let red = assemble(&cfg, Symmetry::Symmetric).unwrap();
        let (k, m) = element_matrices(1.0, 1.0, 1.0).unwrap();
        let keep = [0usize, 2, 3];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                let extra = if i == 0 && j == 0 { 0.7 } else { 0.0 };
                assert_abs_diff_eq!(red.system.mass.get(a, b), m[(i, j)] + extra, epsilon = 1e-15);
                assert_abs_diff_eq!(red.system.stiffness.get(a, b), k[(i, j)], epsilon = 1e-15);
            }
        }
        assert_eq!(red.dof_count, 3);
    }

    #[test]
    fn dof_counts() {
        for (n, dofs) in [(5, 11), (10, 21), (35, 71), (100, 201)] {
            let red = assemble(&WingConfig::b737(n), Symmetry::Symmetric).unwrap();
            assert_eq!(red.dof_count, dofs);
            assert_eq!(crate::aiep::free_parameter_count(red.dof_count), [132, 462, 5112, 40602][[5, 10, 35, 100].iter().position(|&x| x == n).unwrap()]);
        }
    }

    #[test]
    fn frequency_table() {
        let f0 = nondim_frequencies(&WingConfig::unit(30, 0.0), Symmetry::Symmetric, 3).unwrap();
        let f1 = nondim_frequencies(&WingConfig::b737(30), Symmetry::Symmetric, 3).unwrap();
        assert!(f0[0] < 1e-3 && f1[0] < 1e-3);
        for (got, want) in [(f0[1], 5.59), (f0[2], 30.23), (f1[1], 4.09), (f1[2], 23.36)] {
            assert!((got - want).abs() / want < 0.005, "{got} vs {want}");
        }
    }

    #[test]
    fn physical_scaling_matches_unit_scaling() {
        let phys = WingConfig {
            elements_per_halfspan: 12,
            flexural_rigidity: 3.0e7,
            half_span: 47.0,
            wing_mass: 350.0,
            mass_ratio: 1.35,
        };
        let shapes = mode_shapes(&phys, Symmetry::Symmetric, 3).unwrap();
        let unit = nondim_frequencies(&phys, Symmetry::Symmetric, 3).unwrap();
        for (a, b) in shapes.frequencies.iter().zip(&unit).skip(1) {
            assert!((a - b).abs() / b < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn symmetric_rigid_mode_is_flat() {
        let shapes = mode_shapes(&WingConfig::b737(20), Symmetry::Symmetric, 4).unwrap();
        for v in shapes.shapes.column(0).iter() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-8);
        }
        for mode in 0..4 {
            assert_eq!(shapes.half_span_sign_changes(mode), mode);
        }
    }

    #[test]
    fn antisymmetric_modes_ignore_mass_ratio() {
        let a = mode_shapes(&WingConfig::unit(20, 0.0), Symmetry::Antisymmetric, 4).unwrap();
        let b = mode_shapes(&WingConfig::unit(20, 1.35), Symmetry::Antisymmetric, 4).unwrap();
        for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
        }
        assert_abs_diff_eq!((&a.shapes - &b.shapes).amax(), 0.0, epsilon = 1e-10);
        // odd reflection about the root
        let n = a.coordinates.len();
        for mode in 0..4 {
            for i in 0..n {
                assert_abs_diff_eq!(a.shapes[(i, mode)], -a.shapes[(n - 1 - i, mode)], epsilon = 1e-12);
            }
            assert_eq!(a.half_span_sign_changes(mode), mode);
        }
    }

    #[test]
    fn total_translational_mass() {
        let cfg = WingConfig { wing_mass: 2.0, ..WingConfig::b737(15) };
        let red = assemble(&cfg, Symmetry::Symmetric).unwrap();
        let mut ones = nalgebra::DVector::zeros(red.dof_count);
        for idx in red.translation_indices().into_iter().flatten() {
            ones[idx] = 1.0;
        }
        assert_abs_diff_eq!(red.system.mass.quadratic_form(&ones), 2.0 * (1.0 + 1.35), epsilon = 1e-10);
    }

    #[test]
    fn weight_scalings() {
        let ones = WeightInputs {
            wing_area: 1.0,
            wing_fuel_weight: 1.0,
            aspect_ratio: 1.0,
            sweep_deg: 0.0,
            dynamic_pressure: 1.0,
            taper_ratio: 1.0,
            thickness_to_chord: 1.0,
            load_factor: 1.0,
            design_gross_weight: 1.0,
            fuselage_area: 1.0,
            tail_length: 1.0,
            fuselage_slenderness: 1.0,
            pressurized_volume: 0.0,
            cabin_pressure_delta: 8.0,
        };
        assert_abs_diff_eq!(wing_weight(&ones).unwrap(), 0.036 * 100f64.powf(-0.3), epsilon = 1e-15);
        let doubled = WeightInputs { load_factor: 2.0, ..ones.clone() };
        assert_abs_diff_eq!(
            wing_weight(&doubled).unwrap() / wing_weight(&ones).unwrap(),
            2f64.powf(0.49),
            epsilon = 1e-12
        );
        assert_eq!(pressurization_weight(&ones).unwrap(), 11.9);
        let base = fuselage_weight(&ones).unwrap() - 11.9;
        let bigger = fuselage_weight(&WeightInputs { fuselage_area: 10.0, ..ones.clone() }).unwrap() - 11.9;
        assert_abs_diff_eq!(bigger / base, 10f64.powf(1.086), epsilon = 1e-10);
        assert!(matches!(
            wing_weight(&WeightInputs { wing_area: 0.0, ..ones }),
            Err(Error::NonPositiveInput { .. })
        ));
    }

    #[test]
    fn mass_ratio_cases() {
        assert_eq!(mass_ratio(3.0, 3.0).unwrap(), 1.0);
        assert_eq!(mass_ratio(3.0, 0.0).unwrap(), 0.0);
        assert!(matches!(mass_ratio(0.0, 1.0), Err(Error::DivisionByZero(_))));
    }
}
