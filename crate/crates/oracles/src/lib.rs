//! Brute-force reference computations for tests.
//!
//! Nothing here shares code with `aiep-core`. Each function trades speed
//! for an argument that is easy to check by hand.

use nalgebra::DMatrix;

/// All roots of `det(K − λM)` for a small symmetric-definite pencil,
/// ascending, found by sign changes of the determinant on a refining grid
/// followed by bisection.
///
/// Returns `None` if fewer than `N` sign changes are found, which happens
/// for (near) repeated eigenvalues.
pub fn determinant_roots(m: &DMatrix<f64>, k: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = m.nrows();
    let det = |lam: f64| (k - m * lam).determinant();
    // every eigenvalue satisfies |λ| ≤ ‖M⁻¹K‖ ≤ ‖M⁻¹‖_F ‖K‖_F
    let m_inv = m.clone().try_inverse()?;
    let bound = 1.0 + m_inv.norm() * k.norm();
    let (lo, hi) = (-bound, bound);
    let mut cells = 4096;
    while cells <= 1 << 22 {
        let h = (hi - lo) / cells as f64;
        let mut brackets = Vec::new();
        let mut a = lo;
        let mut fa = det(a);
        for i in 1..=cells {
            let b = lo + i as f64 * h;
            let fb = det(b);
            if fa == 0.0 {
                brackets.push((a, a));
            } else if fa.signum() != fb.signum() && fb != 0.0 {
                brackets.push((a, b));
            }
            a = b;
            fa = fb;
        }
        if brackets.len() == n {
            return Some(brackets.into_iter().map(|(a, b)| bisect(&det, a, b)).collect());
        }
        cells *= 4;
    }
    None
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    if a == b {
        return a;
    }
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `argmin ‖z − x‖²` over `[-c, c]ᴰ` by enumerating every assignment of
/// each coordinate to lower bound, upper bound or free, keeping the best
/// feasible candidate. Exponential in `D`; meant for `D ≤ 8`.
pub fn box_projection_qp(x: &[f64], c: f64) -> Vec<f64> {
    let d = x.len();
    let mut best = vec![0.0; d];
    let mut best_cost = f64::INFINITY;
    let mut z = vec![0.0; d];
    for code in 0..3usize.pow(d as u32) {
        let mut rest = code;
        let mut feasible = true;
        for i in 0..d {
            z[i] = match rest % 3 {
                0 => -c,
                1 => c,
                _ => x[i],
            };
            rest /= 3;
            if z[i].abs() > c {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let cost: f64 = z.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        if cost < best_cost {
            best_cost = cost;
            best.copy_from_slice(&z);
        }
    }
    best
}

/// First `count` non-dimensional frequencies `(βL)²` of a uniform
/// guided–free beam, including the rigid mode at zero. Nonzero roots solve
/// `tan x + tanh x = 0`, one in each interval `((k − ½)π, kπ)`.
pub fn guided_free_frequencies(count: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let f = |x: f64| x.tan() + x.tanh();
    let pi = std::f64::consts::PI;
    for k in 1..count {
        let a = (k as f64 - 0.5) * pi + 1e-9;
        let b = k as f64 * pi;
        let root = bisect(&f, a, b);
        out.push(root * root);
    }
    out.truncate(count);
    out
}

/// Exact eigenvalue shift of a one-DOF system.
pub fn scalar_shift(m: f64, k: f64, dm: f64, dk: f64) -> f64 {
    (k + dk) / (m + dm) - k / m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil_roots() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 4.0]));
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -2.0, 10.0]));
        let r = determinant_roots(&m, &k).unwrap();
        for (got, want) in r.iter().zip([-1.0, 2.5, 3.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn projection_clamps() {
        assert_eq!(box_projection_qp(&[2.0, -0.5, -7.0], 1.0), vec![1.0, -0.5, -1.0]);
    }

    #[test]
    fn first_guided_free_root() {
        let w = guided_free_frequencies(3);
        assert_eq!(w[0], 0.0);
        // x = 2.3650 is the textbook first root
        assert!((w[1].sqrt() - 2.3650).abs() < 1e-4);
        assert!(w[2] > w[1]);
    }

    #[test]
    fn scalar() {
        assert_eq!(scalar_shift(2.0, 4.0, 0.0, 2.0), 1.0);
    }
}
