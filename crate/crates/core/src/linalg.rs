//! Small dense linear algebra: generic vector arithmetic for jet-valued
//! code, a generic Cholesky solve, and `f64` rank / null-space helpers
//! backed by nalgebra's SVD.

use nalgebra::DMatrix;

use crate::jet::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn scale<T: Scalar>(k: T, a: &[T]) -> Vec<T> {
    a.iter().map(|x| k * *x).collect()
}

/// `y += k·x`
pub fn axpy<T: Scalar>(k: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += k * *xi;
    }
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn normalize<T: Scalar>(a: &[T]) -> Vec<T> {
    let inv = norm(a).recip();
    scale(inv, a)
}

pub fn norm_f(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Multiplication by the standard complex structure of ℂⁿ on interleaved
/// coordinates `(x₁, y₁, …, xₙ, yₙ)`: each pair `(x, y)` maps to `(−y, x)`.
pub fn complex_mult<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks_exact(2) {
        out.push(-pair[1]);
        out.push(pair[0]);
    }
    out
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major, `m×m`).
///
/// Works for any scalar type; returns `None` when a pivot is not positive.
pub fn cholesky_solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let m = b.len();
    let mut l = vec![vec![T::zero(); m]; m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s.value() > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![T::zero(); m];
    for i in 0..m {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); m];
    for i in (0..m).rev() {
        let mut s = y[i];
        for k in i + 1..m {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Builds a matrix whose rows are the given vectors.
pub fn rows_to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank with a threshold relative to `max(1, σ_max)`.
pub fn rank_of(sv: &[f64], rel_tol: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal (Euclidean) basis of the null space of the matrix whose rows
/// are `rows`, in a space of dimension `dim`.
pub fn null_space(rows: &[Vec<f64>], dim: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // Pad to a square matrix so the SVD returns a full V.
    let nr = rows.len().max(dim);
    let m = DMatrix::from_fn(nr, dim, |i, j| if i < rows.len() { rows[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b)).max(1.0);
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= rel_tol * smax {
            out.push(v_t.row(i).iter().copied().collect());
        }
    }
    out
}

/// Euclidean modified Gram–Schmidt with absolute drop tolerance.
pub fn orthonormalize_euclidean(vectors: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            let c = dot(&w, e);
            axpy(-c, e, &mut w);
        }
        let nw = norm_f(&w);
        if nw > drop_tol {
            out.push(scale(1.0 / nw, &w));
        }
    }
    out
}

/// Euclidean orthonormal basis of the tangent space of the unit sphere at `p`.
pub fn sphere_tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    null_space(&[p.to_vec()], p.len(), 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_mult_examples() {
        assert_eq!(complex_mult(&[1.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(complex_mult(&[0.0, 1.0, 1.0, 0.0]), vec![-1.0, 0.0, 0.0, 1.0]);
        let v = [0.3, -0.2, 1.5, 0.7];
        let twice = complex_mult(&complex_mult(&v));
        for (a, b) in twice.iter().zip(v.iter()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn cholesky_matches_direct_solution() {
        let a = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let b = vec![1.0, -2.0, 0.5];
        let x = cholesky_solve(&a, &b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-14);
        }
        assert!(cholesky_solve(&[vec![-1.0]], &[1.0]).is_none());
    }

    #[test]
    fn null_space_of_point_is_tangent_space() {
        let p = normalize(&[0.3, -0.1, 0.8, 0.5]);
        let basis = sphere_tangent_basis(&p);
        assert_eq!(basis.len(), 3);
        for b in &basis {
            assert!(dot(b, &p).abs() < 1e-14);
            assert!((norm_f(b) - 1.0).abs() < 1e-14);
        }
    }
}
