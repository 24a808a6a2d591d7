//! Dense linear algebra helpers bridging ndarray storage to nalgebra routines.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Components below this magnitude are dropped before dense kernels; products
/// of the survivors stay clear of the subnormal range, which is very slow.
pub const FLUSH_THRESHOLD: f64 = 1e-150;

fn flush(x: f64) -> f64 {
    if x.abs() < FLUSH_THRESHOLD {
        0.0
    } else {
        x
    }
}

fn is_tiny(c: &C64) -> bool {
    (c.re != 0.0 && c.re.abs() < FLUSH_THRESHOLD) || (c.im != 0.0 && c.im.abs() < FLUSH_THRESHOLD)
}

/// `a` with tiny components set to zero; borrows when nothing changes.
pub fn flushed(a: &Array2<C64>) -> Cow<'_, Array2<C64>> {
    if a.iter().any(is_tiny) {
        Cow::Owned(a.mapv(|c| C64::new(flush(c.re), flush(c.im))))
    } else {
        Cow::Borrowed(a)
    }
}

/// Dense product with tiny components flushed from both factors.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    flushed(a).dot(flushed(b).as_ref())
}

fn to_nalgebra(a: &Array2<C64>) -> DMatrix<C64> {
    let a = flushed(a);
    let (r, c) = a.dim();
    DMatrix::from_fn(r, c, |i, j| a[[i, j]])
}

/// Pairwise (cascade) summation; keeps rounding error at `O(log n)`.
pub fn pairwise_sum(xs: &[C64]) -> C64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

const SVD_MAX_ITERATIONS: usize = 10_000;

/// Singular values in descending order.
///
/// The matrix is scaled to unit maximum entry first. If the iteration does
/// not converge, only the largest singular value is returned, estimated by
/// power iteration on `A*A`.
pub fn singular_values(a: &Array2<C64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let scale = a.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if scale == 0.0 {
        return vec![0.0; a.nrows().min(a.ncols())];
    }
    let m = to_nalgebra(a).unscale(scale);
    let mut s: Vec<f64> = match nalgebra::SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITERATIONS) {
        Some(svd) => svd.singular_values.iter().map(|v| v * scale).collect(),
        None => vec![largest_singular_value(&m) * scale],
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn largest_singular_value(m: &DMatrix<C64>) -> f64 {
    let mut v = DVector::from_fn(m.ncols(), |i, _| C64::new(1.0 + (i as f64).sin() * 0.5, (i as f64).cos() * 0.25));
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = m.adjoint() * (m * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w.unscale(norm);
        if (next - sigma).abs() <= 1e-14 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Smallest singular value of a small complex matrix; `0` when the SVD fails.
pub fn min_singular_value(a: &DMatrix<C64>) -> f64 {
    nalgebra::SVD::try_new(a.clone(), false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .map(|svd| svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min))
        .unwrap_or(0.0)
}

/// Singular values of a real matrix, descending.
pub fn real_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = match nalgebra::SVD::try_new(a.clone(), false, false, f64::EPSILON, SVD_MAX_ITERATIONS) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => Vec::new(),
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Eigenvalues sorted lexicographically by `(re, im)`.
pub fn eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    let m = to_nalgebra(a);
    let ev = nalgebra::Schur::try_new(m, f64::EPSILON, SVD_MAX_ITERATIONS)
        .and_then(|schur| schur.eigenvalues())
        .ok_or_else(|| Error::InvalidArgument("Schur decomposition did not converge".into()))?;
    let mut v: Vec<C64> = ev.iter().copied().collect();
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(v)
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn solve(a: &DMatrix<C64>, b: &[C64]) -> Result<Vec<C64>> {
    let rhs = DVector::from_column_slice(b);
    a.clone()
        .lu()
        .solve(&rhs)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::InvalidArgument("singular linear system".into()))
}

/// Least-squares solution of a real system via SVD, with the smallest singular value.
pub fn real_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| Error::InvalidArgument("SVD did not converge".into()))?;
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let x = svd
        .solve(b, 1e-300)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((x, smin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_spectrum() {
        let a = array![[C64::new(2.0, 0.0), C64::new(1.0, 0.0)], [C64::new(0.0, 0.0), C64::new(-1.0, 1.0)]];
        let ev = eigenvalues(&a).unwrap();
        assert!((ev[0] - C64::new(-1.0, 1.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_singular_values() {
        let a = array![[C64::new(0.0, 0.0), C64::new(3.0, 0.0)], [C64::new(0.0, -2.0), C64::new(0.0, 0.0)]];
        let s = singular_values(&a);
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lu_solve() {
        let a = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 1.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        let x = solve(&a, &[C64::new(1.0, 1.0), C64::new(3.0, 0.0)]).unwrap();
        assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<C64> = (0..100).map(|i| C64::new(i as f64, -(i as f64))).collect();
        assert_eq!(pairwise_sum(&xs), C64::new(4950.0, -4950.0));
    }
}
