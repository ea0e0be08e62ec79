//! Dense symmetric-definite generalized eigensolver.
//!
//! `K v = λ M v` is reduced to a standard symmetric problem through the
//! Cholesky factor `M = L Lᵀ`, solved on `L⁻¹ K L⁻ᵀ`, and back-transformed
//! with `v = L⁻ᵀ u`. Eigenvalues are always reported in ascending order and
//! truncation keeps the smallest ones.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative pivot floor used by the Cholesky factorization.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Convergence threshold handed to the symmetric QR iteration.
const EIG_EPS: f64 = 1e-14;
const EIG_MAX_ITER: usize = 10_000;

/// Real symmetric matrix. The upper triangle is authoritative; the lower
/// triangle is mirrored from it on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from a square matrix, mirroring its upper triangle.
    pub fn from_upper(mut data: DMatrix<f64>) -> Result<Self> {
        let n = data.nrows();
        if n == 0 {
            return Err(Error::InvalidDimension("matrix order must be at least 1".into()));
        }
        if data.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: data.ncols() });
        }
        for j in 0..n {
            for i in (j + 1)..n {
                data[(i, j)] = data[(j, i)];
            }
        }
        Ok(Self { data })
    }

    /// Builds from a square matrix that must already be symmetric to within
    /// `tol * max|a_ij|`.
    pub fn try_symmetric(data: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = data.nrows();
        if n > 0 && data.ncols() == n {
            let scale = data.amax().max(f64::MIN_POSITIVE);
            for i in 0..n {
                for j in (i + 1)..n {
                    let diff = (data[(i, j)] - data[(j, i)]).abs();
                    if diff > tol * scale {
                        return Err(Error::NotSymmetric { row: i, col: j, diff });
                    }
                }
            }
        }
        Self::from_upper(data)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        Self::try_symmetric(DMatrix::from_fn(n, n, |i, j| rows[i][j]), 1e-12)
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: DMatrix::zeros(n.max(1), n.max(1)) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n.max(1), n.max(1)) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidDimension("matrix order must be at least 1".into()));
        }
        Ok(Self { data: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) })
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Sets `a_ij` and `a_ji` together.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[(i, j)] = value;
        self.data[(j, i)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_same_order(self, other)?;
        Ok(Self { data: &self.data + &other.data })
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        Self { data: &self.data * factor }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// `vᵀ A v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.data * v))
    }

    /// Keeps the rows and columns listed in `keep`, in that order.
    pub fn submatrix(&self, keep: &[usize]) -> SymMatrix {
        let n = keep.len();
        Self { data: DMatrix::from_fn(n, n, |i, j| self.data[(keep[i], keep[j])]) }
    }
}

/// Ascending eigenvalues with optional paired eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `N × k`, column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, i: usize) -> Option<DVector<f64>> {
        self.eigenvectors.as_ref().map(|v| v.column(i).into_owned())
    }
}

fn check_same_order(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch { expected: a.order(), found: b.order() });
    }
    Ok(())
}

fn check_count(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidCount { requested: k, order: n });
    }
    Ok(())
}

/// Lower Cholesky factor of `m`. Fails when a pivot drops below
/// `PIVOT_TOLERANCE * max|m_ii|`.
pub fn cholesky(m: &SymMatrix) -> Result<DMatrix<f64>> {
    let n = m.order();
    let a = m.as_matrix();
    let floor = PIVOT_TOLERANCE * a.diagonal().amax();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        // column j below the diagonal: l_ij = (a_ij - sum_p l_ip l_jp) / l_jj
        for i in (j + 1)..n {
            l[(i, j)] = a[(i, j)];
        }
        for p in 0..j {
            let ljp = l[(j, p)];
            if ljp != 0.0 {
                for i in (j + 1)..n {
                    l[(i, j)] -= l[(i, p)] * ljp;
                }
            }
        }
        for i in (j + 1)..n {
            l[(i, j)] /= djj;
        }
    }
    Ok(l)
}

pub fn is_positive_definite(m: &SymMatrix) -> bool {
    cholesky(m).is_ok()
}

/// `L⁻¹ K L⁻ᵀ`, symmetrized.
fn reduce(l: &DMatrix<f64>, k: &SymMatrix) -> DMatrix<f64> {
    let mut x = k.as_matrix().clone();
    l.solve_lower_triangular_mut(&mut x);
    let mut c = x.transpose();
    l.solve_lower_triangular_mut(&mut c);
    let n = c.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    c
}

fn sorted_order(values: &DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn symmetric_decomposition(c: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(c, EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)
}

/// The `k` smallest eigenpairs of `K v = λ M v`, with `M`-orthonormal
/// eigenvectors.
///
/// Eigenvalues are the Rayleigh quotients `vᵀKv / vᵀMv` of the returned
/// vectors. Their error is quadratic in the vector error, which matters for
/// near-zero modes of stiff pencils where the reduced matrix only resolves
/// eigenvalues to `ε·λ_max`.
pub fn generalized_eig(m: &SymMatrix, k_mat: &SymMatrix, k: usize) -> Result<Spectrum> {
    check_same_order(m, k_mat)?;
    check_count(k, m.order())?;
    let l = cholesky(m)?;
    let eig = symmetric_decomposition(reduce(&l, k_mat))?;
    let order = sorted_order(&eig.eigenvalues);
    let n = m.order();
    let mut vectors = DMatrix::<f64>::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[idx]);
        vectors.set_column(col, &eig.eigenvectors.column(idx));
    }
    // v = L⁻ᵀ u
    l.tr_solve_lower_triangular_mut(&mut vectors);
    for (col, value) in values.iter_mut().enumerate() {
        let v = vectors.column(col).into_owned();
        let rq = k_mat.quadratic_form(&v) / m.quadratic_form(&v);
        if rq.is_finite() {
            *value = rq;
        }
    }
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        idx
    };
    let values = order.iter().map(|&i| values[i]).collect();
    let vectors = DMatrix::from_fn(n, k, |r, c| vectors[(r, order[c])]);
    Ok(Spectrum { eigenvalues: values, eigenvectors: Some(vectors) })
}

/// Eigenvalues only; the hot path of every objective evaluation.
pub fn generalized_eigenvalues(m: &SymMatrix, k_mat: &SymMatrix, k: usize) -> Result<Vec<f64>> {
    check_same_order(m, k_mat)?;
    check_count(k, m.order())?;
    let l = cholesky(m)?;
    let c = reduce(&l, k_mat);
    let values = c.symmetric_eigenvalues();
    let mut values: Vec<f64> = values.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values.truncate(k);
    Ok(values)
}

/// The `k` smallest eigenpairs of `K v = λ v`, unit 2-norm eigenvectors.
pub fn standard_eig(k_mat: &SymMatrix, k: usize) -> Result<Spectrum> {
    check_count(k, k_mat.order())?;
    let eig = symmetric_decomposition(k_mat.as_matrix().clone())?;
    let order = sorted_order(&eig.eigenvalues);
    let mut vectors = DMatrix::<f64>::zeros(k_mat.order(), k);
    let mut values = Vec::with_capacity(k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[idx]);
        vectors.set_column(col, &eig.eigenvectors.column(idx));
    }
    Ok(Spectrum { eigenvalues: values, eigenvectors: Some(vectors) })
}

/// Parses one matrix: a line holding `N`, then `N` rows of `N` numbers.
/// Blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = content_lines(text);
    let m = read_matrix_block(&mut lines)?;
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, message: "trailing content after matrix".into() });
    }
    Ok(m)
}

/// Parses two consecutive matrix blocks, `M` then `K`.
pub fn parse_matrix_pair(text: &str) -> Result<(SymMatrix, SymMatrix)> {
    let mut lines = content_lines(text);
    let m = read_matrix_block(&mut lines)?;
    let k = read_matrix_block(&mut lines)?;
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, message: "trailing content after matrix pair".into() });
    }
    let m = SymMatrix::try_symmetric(m, 1e-9)?;
    let k = SymMatrix::try_symmetric(k, 1e-9)?;
    check_same_order(&m, &k)?;
    Ok((m, k))
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn read_matrix_block<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<DMatrix<f64>> {
    let (line_no, header) = lines
        .next()
        .ok_or(Error::Parse { line: 0, message: "missing matrix order".into() })?;
    let n: usize = header.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("expected matrix order, found {header:?}"),
    })?;
    if n == 0 {
        return Err(Error::Parse { line: line_no, message: "matrix order must be at least 1".into() });
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (line_no, row) = lines.next().ok_or(Error::Parse {
            line: line_no,
            message: format!("expected {n} rows, found {i}"),
        })?;
        let values: Vec<f64> = row
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != n {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {n} entries, found {}", values.len()),
            });
        }
        for (j, v) in values.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiep::toy_system;
    use approx::assert_abs_diff_eq;

    #[test]
    fn toy_first_two_eigenvalues() {
        let sys = toy_system();
        let spec = generalized_eig(&sys.mass, &sys.stiffness, 2).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 10.99, epsilon = 0.005);
        assert_abs_diff_eq!(spec.eigenvalues[1], 19.12, epsilon = 0.005);
    }

    #[test]
    fn diagonal_pencil() {
        let m = SymMatrix::identity(3);
        let k = SymMatrix::from_diagonal(&[25.0, 4.0, 9.0]).unwrap();
        let spec = generalized_eig(&m, &k, 3).unwrap();
        for (got, want) in spec.eigenvalues.iter().zip([4.0, 9.0, 25.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn standard_cases() {
        let k = SymMatrix::from_diagonal(&[-1.0, 0.0, 7.0]).unwrap();
        let spec = standard_eig(&k, 3).unwrap();
        assert_eq!(spec.eigenvalues, vec![-1.0, 0.0, 7.0]);

        let k = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let spec = standard_eig(&k, 2).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvalues[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn standard_matches_identity_mass() {
        let sys = toy_system();
        let a = standard_eig(&sys.stiffness, 10).unwrap();
        let b = generalized_eig(&SymMatrix::identity(10), &sys.stiffness, 10).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
        }
    }

    #[test]
    fn positive_definite_checks() {
        let diag: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!(is_positive_definite(&SymMatrix::from_diagonal(&diag).unwrap()));
        assert!(!is_positive_definite(&SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap()));
        // M + dM with a large negative off-diagonal block: [[1, -3], [-3, 2]] has det < 0
        let m = SymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let mut dm = SymMatrix::zeros(2);
        dm.set(0, 1, -3.0);
        let sum = m.add(&dm).unwrap();
        let spec = standard_eig(&sum, 2).unwrap();
        assert!(spec.eigenvalues[0] < 0.0);
        assert!(!is_positive_definite(&sum));
        assert!(matches!(
            generalized_eig(&sum, &m, 1),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn dimension_and_count_errors() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::identity(3);
        assert!(matches!(generalized_eig(&a, &b, 1), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(generalized_eig(&a, &a, 0), Err(Error::InvalidCount { .. })));
        assert!(matches!(generalized_eig(&a, &a, 3), Err(Error::InvalidCount { .. })));
    }

    #[test]
    fn residual_and_m_orthonormality() {
        let sys = toy_system();
        let spec = generalized_eig(&sys.mass, &sys.stiffness, 10).unwrap();
        let v = spec.eigenvectors.as_ref().unwrap();
        let m = sys.mass.as_matrix();
        let k = sys.stiffness.as_matrix();
        let gram = v.transpose() * m * v;
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[(i, j)], want, epsilon = 1e-8);
            }
            let vi = v.column(i);
            let lam = spec.eigenvalues[i];
            let residual = (k * vi - m * vi * lam).norm();
            assert!(residual <= 1e-8 * (k.norm() + lam.abs() * m.norm()));
        }
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvalues_only_path_agrees() {
        let sys = toy_system();
        let full = generalized_eig(&sys.mass, &sys.stiffness, 4).unwrap();
        let fast = generalized_eigenvalues(&sys.mass, &sys.stiffness, 4).unwrap();
        for (a, b) in full.eigenvalues.iter().zip(&fast) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn upper_triangle_is_authoritative() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 99.0, 3.0]);
        let s = SymMatrix::from_upper(m.clone()).unwrap();
        assert_eq!(s.get(1, 0), 2.0);
        assert!(matches!(SymMatrix::try_symmetric(m, 1e-12), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn matrix_text_format() {
        let text = "# mass\n2\n1 0.5\n0.5 2\n\n2\n4 1\n1 3\n";
        let (m, k) = parse_matrix_pair(text).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(k.get(1, 1), 3.0);
        let back = parse_matrix(&format_matrix(m.as_matrix())).unwrap();
        assert_eq!(&back, m.as_matrix());

        let err = parse_matrix("2\n1 2\n3\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, message: "expected 2 entries, found 1".into() });
        assert!(matches!(parse_matrix("2\n1 x\n0 1\n"), Err(Error::Parse { line: 2, .. })));
    }
}
