//! Seeded random points and tangent vectors.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{norm_f, scale};
use crate::tensor::project;

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniformly distributed point of the unit sphere in `ℝ^dim`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let r = norm_f(&v);
        if r > 1e-6 {
            return scale(1.0 / r, &v);
        }
    }
}

/// Gaussian vector projected to the tangent space of the sphere at `p`.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, p: &[f64]) -> Vec<f64> {
    project(p, &gaussian_vector(rng, p.len()))
}

/// Random unit combination of the given vectors (uniform on the unit sphere
/// of their span when they are orthonormal).
pub fn random_combination<R: Rng + ?Sized>(rng: &mut R, vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vectors.first().map_or(0, |v| v.len())];
    if vectors.is_empty() {
        return out;
    }
    let c = random_unit(rng, vectors.len());
    for (ci, v) in c.iter().zip(vectors) {
        crate::linalg::axpy(*ci, v, &mut out);
    }
    out
}
