//! Random Gaussian embeddings of a boxed search space.
//!
//! A point `y ∈ Rᵈ` is lifted to `p(Ay) ∈ [-c, c]ᴰ`, where `A` is a `D × d`
//! Gaussian matrix and `p` is the least-squares projection onto the box.
//! For an axis-aligned box that projection is a componentwise clamp.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed;

/// How the `1/√d` in `N(0, 1/√d)` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussianScale {
    /// Entries have standard deviation `1/√d`.
    #[default]
    StdDev,
    /// Entries have variance `1/√d`.
    Variance,
}

impl GaussianScale {
    pub fn std_dev(self, reduced: usize) -> f64 {
        let d = reduced as f64;
        match self {
            GaussianScale::StdDev => 1.0 / d.sqrt(),
            GaussianScale::Variance => d.powf(-0.25),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    matrix: DMatrix<f64>,
    half_width: f64,
    seed: u64,
}

impl EmbeddingMap {
    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn reduced_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `D × d` matrix `A`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `p(Ay)`: always inside `[-c, c]ᴰ`.
    pub fn lift(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.ambient_dim()];
        self.lift_into(y, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`lift`](Self::lift).
    pub fn lift_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        if y.len() != self.reduced_dim() {
            return Err(Error::DimensionMismatch { expected: self.reduced_dim(), found: y.len() });
        }
        if out.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: out.len() });
        }
        out.fill(0.0);
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.matrix.column(j).iter()) {
                *o += a * yj;
            }
        }
        box_project_in_place(out, self.half_width);
        Ok(())
    }
}

pub fn make_embedding(ambient: usize, reduced: usize, half_width: f64, seed: u64) -> Result<EmbeddingMap> {
    make_embedding_with(ambient, reduced, half_width, seed, GaussianScale::default())
}

pub fn make_embedding_with(
    ambient: usize,
    reduced: usize,
    half_width: f64,
    seed: u64,
    scale: GaussianScale,
) -> Result<EmbeddingMap> {
    if reduced < 1 || reduced > ambient {
        return Err(Error::InvalidDimension(format!(
            "embedded dimension {reduced} must lie in 1..={ambient}"
        )));
    }
    if !(half_width > 0.0) {
        return Err(Error::NonPositiveInput { name: "box half-width", value: half_width });
    }
    let normal = Normal::new(0.0, scale.std_dev(reduced)).expect("finite positive std dev");
    let mut rng = seed::stream(seed, "embedding");
    loop {
        // Column-major fill keeps each column contiguous in the stream.
        let matrix = DMatrix::from_fn(ambient, reduced, |_, _| normal.sample(&mut rng));
        let degenerate = matrix.column_iter().any(|c| c.iter().all(|&a| a == 0.0));
        if !degenerate {
            return Ok(EmbeddingMap { matrix, half_width, seed });
        }
    }
}

/// Least-squares projection onto `[-c, c]ᴰ`.
pub fn box_project(x: &[f64], half_width: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    box_project_in_place(&mut out, half_width);
    out
}

pub fn box_project_in_place(x: &mut [f64], half_width: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(-half_width, half_width);
    }
}

/// Sufficient target dimension for a `(1 ± ε)` distance-preserving map of
/// `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JlBound {
    pub n: usize,
    pub epsilon: f64,
    pub k: usize,
}

/// `k = ⌈4 ln n / (ε²/2 − ε³/3)⌉`.
pub fn jl_min_dimension(n: usize, epsilon: f64) -> Result<JlBound> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(format!("JL bound needs n >= 2, got {n}")));
    }
    let denom = epsilon * epsilon / 2.0 - epsilon.powi(3) / 3.0;
    let k = (4.0 * (n as f64).ln() / denom).ceil() as usize;
    Ok(JlBound { n, epsilon, k: k.max(1) })
}

/// `A·y` without the box projection, for diagnostics.
pub fn raw_image(map: &EmbeddingMap, y: &[f64]) -> Result<DVector<f64>> {
    if y.len() != map.reduced_dim() {
        return Err(Error::DimensionMismatch { expected: map.reduced_dim(), found: y.len() });
    }
    Ok(map.matrix() * DVector::from_column_slice(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shape_and_entry_scale() {
        let map = make_embedding(110, 10, 10.0, 3).unwrap();
        assert_eq!((map.ambient_dim(), map.reduced_dim()), (110, 10));
        let a = map.matrix();
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let std = (a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let target = 1.0 / 10f64.sqrt();
        assert!(std > 0.8 * target && std < 1.2 * target, "std {std}");
    }

    #[test]
    fn variance_reading_changes_scale() {
        assert_abs_diff_eq!(GaussianScale::Variance.std_dev(16), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(GaussianScale::StdDev.std_dev(16), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn seeded_determinism() {
        let a = make_embedding(30, 5, 1.0, 11).unwrap();
        let b = make_embedding(30, 5, 1.0, 11).unwrap();
        let c = make_embedding(30, 5, 1.0, 12).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn invalid_dimensions() {
        assert!(matches!(make_embedding(5, 6, 1.0, 0), Err(Error::InvalidDimension(_))));
        assert!(matches!(make_embedding(5, 0, 1.0, 0), Err(Error::InvalidDimension(_))));
        let map = make_embedding(5, 2, 1.0, 0).unwrap();
        assert!(matches!(map.lift(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lift_origin_and_saturation() {
        let map = make_embedding(8, 3, 2.0, 5).unwrap();
        assert!(map.lift(&[0.0; 3]).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(box_project(&[4.0, -6.0], 2.0), vec![2.0, -2.0]);
        // a huge y saturates every coordinate whose image is nonzero
        let lifted = map.lift(&[1e9, 0.0, 0.0]).unwrap();
        for (v, a) in lifted.iter().zip(map.matrix().column(0).iter()) {
            assert_eq!(*v, 2.0 * a.signum());
        }
    }

    #[test]
    fn square_map_inside_box_is_exact() {
        let map = make_embedding(4, 4, 100.0, 9).unwrap();
        let y = [0.3, -0.2, 0.1, 0.05];
        let lifted = map.lift(&y).unwrap();
        let raw = raw_image(&map, &y).unwrap();
        for (a, b) in lifted.iter().zip(raw.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn box_project_inside_is_identity() {
        let x = [0.5, -0.9, 0.0];
        assert_eq!(box_project(&x, 1.0), x.to_vec());
    }

    #[test]
    fn jl_tables() {
        let big: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 1.0]
            .iter()
            .map(|&e| jl_min_dimension(40602, e).unwrap().k)
            .collect();
        assert_eq!(big, vec![9096, 1180, 510, 325, 255]);
        let small: Vec<usize> = [0.1, 0.3, 0.7, 1.0]
            .iter()
            .map(|&e| jl_min_dimension(110, e).unwrap().k)
            .collect();
        for (got, want) in small.iter().zip([4029usize, 523, 143, 112]) {
            assert!(got.abs_diff(want) <= 1, "{got} vs {want}");
        }
        assert_eq!(small[1], 523);
        // 4 ln 2 / (1/2 - 1/3) = 16.64
        assert_eq!(jl_min_dimension(2, 1.0).unwrap().k, 17);
    }

    #[test]
    fn jl_rejects_bad_epsilon() {
        for eps in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(jl_min_dimension(10, eps), Err(Error::InvalidEpsilon(_))));
        }
        assert!(matches!(jl_min_dimension(1, 0.5), Err(Error::InvalidDimension(_))));
    }
}
