//! Sasakian structures on `S^{2n−1}`: the round one and the weighted family
//! `η_A = η₀ / Σ a_j|z_j|²`.
//!
//! Conventions: `η₀(X) = ⟨i·p, X⟩`, the round Reeb field is `ξ = i·p` (so
//! `η₀(ξ) = 1`), the weighted Reeb field has pair components `a_j(−y_j, x_j)`,
//! and `φ = ∇ξ` is always obtained from the Levi-Civita connection of the
//! structure's own metric.
//!
//! The weighted metric is `g_A(X,Y) = η_A(X)η_A(Y) + ½dη_A(X_c, I·Y_c)` where
//! `X_c = X − η_A(X)R_A` and `dη_A` is computed by jet differentiation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeometryError, Result};
use crate::jet::Scalar;
use crate::linalg::{self, axpy, complex_mult, dot, sub};
use crate::random;
use crate::tensor::{
    self, covariant_derivative, curvature_operator, derivative_along_scalar, exterior_derivative,
    AmbientPoint, Metric, VectorField,
};
use crate::tolerances;

const PROBE_POINTS: usize = 32;
const PROBE_SEED: u64 = 0x5a5a_1d1d;

#[derive(Clone, Debug, PartialEq)]
pub struct SasakianStructure {
    weights: Vec<f64>,
    round: bool,
}

impl SasakianStructure {
    /// The standard structure on `S^{2n−1} ⊂ ℂⁿ`.
    pub fn round(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::InvalidInput(format!("complex dimension n = {n} must be at least 2")));
        }
        Ok(SasakianStructure { weights: vec![1.0; n], round: true })
    }

    /// The weighted structure with `0 < a₁ ≤ … ≤ aₙ`.
    ///
    /// Positivity of the transverse metric is probed at 32 fixed points.
    pub fn weighted(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(GeometryError::InvalidInput(format!("need at least 2 weights, got {}", a.len())));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::InvalidInput("weights must be finite".into()));
        }
        if a.windows(2).any(|w| w[1] < w[0]) {
            return Err(GeometryError::InvalidInput("weights must be nondecreasing".into()));
        }
        let s = SasakianStructure { weights: a, round: false };
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut worst = f64::INFINITY;
        for _ in 0..PROBE_POINTS {
            let p = random::random_unit(&mut rng, 2 * s.n());
            let ev = s.transverse_min_eigenvalue(&p);
            worst = if ev.is_nan() { f64::NAN } else { worst.min(ev) };
            if !(worst >= tolerances::CONTACT_MIN_EIGENVALUE) {
                return Err(GeometryError::DegenerateContact { min_eigenvalue: worst });
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_round(&self) -> bool {
        self.round
    }

    /// `f(q) = Σ a_j |z_j|²`.
    pub fn weight_function<T: Scalar>(&self, q: &[T]) -> T {
        let mut f = T::zero();
        for (a, pair) in self.weights.iter().zip(q.chunks_exact(2)) {
            f += (pair[0] * pair[0] + pair[1] * pair[1]).scale(*a);
        }
        f
    }

    /// Ambient covector field representing `η`.
    pub fn eta_covector<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let iq = complex_mult(q);
        if self.round {
            iq
        } else {
            let inv = self.weight_function(q).recip();
            linalg::scale(inv, &iq)
        }
    }

    pub fn eta<T: Scalar>(&self, q: &[T], x: &[T]) -> T {
        dot(&self.eta_covector(q), x)
    }

    pub fn reeb<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let mut out = complex_mult(q);
        if !self.round {
            for (a, pair) in self.weights.iter().zip(out.chunks_exact_mut(2)) {
                pair[0] = pair[0].scale(*a);
                pair[1] = pair[1].scale(*a);
            }
        }
        out
    }

    /// `dη(u, v)` at `q` for ambient vectors `u, v`.
    pub fn d_eta<T: Scalar>(&self, q: &[T], u: &[T], v: &[T]) -> T {
        exterior_derivative(|x| self.eta_covector(x), q, u, v)
    }

    /// `X − η(X)ξ`, the component of `X` in the contact distribution.
    pub fn contact_part<T: Scalar>(&self, q: &[T], x: &[T]) -> Vec<T> {
        let e = self.eta(q, x);
        let mut out = x.to_vec();
        axpy(-e, &self.reeb(q), &mut out);
        out
    }

    /// `g_A(X, Y)` on tangent vectors.
    pub fn weighted_metric(&self, p: &AmbientPoint, x: &[f64], y: &[f64]) -> f64 {
        self.inner(p.coords(), x, y)
    }

    /// `φX = ∇_X ξ` at a jet-valued point.
    pub fn phi_at<T: Scalar>(&self, q: &[T], x: &[T]) -> Vec<T> {
        covariant_derivative(self, q, x, &ReebField(self))
    }

    pub fn phi(&self, p: &AmbientPoint, x: &[f64]) -> Result<Vec<f64>> {
        tensor::koszul_connection(self, p, x, &ReebField(self))
    }

    /// `|g(∇_Xξ, Y) + g(∇_Yξ, X)|`.
    pub fn killing_residual(&self, p: &AmbientPoint, x: &[f64], y: &[f64]) -> f64 {
        killing_residual_of(self, &ReebField(self), p.coords(), x, y)
    }

    /// `‖R(X,ξ)Y − η(Y)X + g(X,Y)ξ‖` in the structure's metric.
    pub fn sasakian_residual(&self, p: &AmbientPoint, x: &[f64], y: &[f64]) -> Result<f64> {
        let q = p.coords();
        let xi = self.reeb(q);
        let r = curvature_operator(self, p, x, &xi, y)?;
        let mut diff = r;
        axpy(-self.eta(q, y), x, &mut diff);
        axpy(self.inner(q, x, y), &xi, &mut diff);
        Ok(self.inner(q, &diff, &diff).max(0.0).sqrt())
    }

    /// Residuals of `φξ = 0`, `φ²X = −X + η(X)ξ`, `η∘φ = 0` and
    /// `g(φX, φY) = g(X,Y) − η(X)η(Y)`.
    pub fn structure_residuals(&self, p: &AmbientPoint, x: &[f64], y: &[f64]) -> Result<StructureResiduals> {
        let q = p.coords();
        let xi = self.reeb(q);
        let norm = |v: &[f64]| self.inner(q, v, v).max(0.0).sqrt();
        let phi_xi = self.phi(p, &xi)?;
        let phi_x = self.phi(p, x)?;
        let phi_y = self.phi(p, y)?;
        let phi2_x = self.phi(p, &phi_x)?;
        let mut almost = phi2_x;
        axpy(1.0, x, &mut almost);
        axpy(-self.eta(q, x), &xi, &mut almost);
        let compat = self.inner(q, &phi_x, &phi_y) - self.inner(q, x, y) + self.eta(q, x) * self.eta(q, y);
        Ok(StructureResiduals {
            phi_xi: norm(&phi_xi),
            phi_squared: norm(&almost),
            eta_phi: self.eta(q, &phi_x).abs(),
            compatibility: compat.abs(),
        })
    }

    /// `|η(ξ) − 1|` and `|dη(ξ, X)|`.
    pub fn reeb_residuals(&self, p: &AmbientPoint, x: &[f64]) -> (f64, f64) {
        let q = p.coords();
        let xi = self.reeb(q);
        ((self.eta(q, &xi) - 1.0).abs(), self.d_eta(q, &xi, x).abs())
    }

    /// Euclidean orthonormal basis of `Ker η ∩ T_pS` (the span of `p` and
    /// `i·p` removed).
    pub fn contact_basis(&self, p: &[f64]) -> Vec<Vec<f64>> {
        linalg::null_space(&[p.to_vec(), complex_mult(p)], p.len(), tolerances::RANK_REL)
    }

    /// Smallest eigenvalue of `½dη(·, I·)` on `Ker η`.
    pub fn transverse_min_eigenvalue(&self, p: &[f64]) -> f64 {
        let basis = self.contact_basis(p);
        let k = basis.len();
        let m = nalgebra::DMatrix::from_fn(k, k, |a, b| {
            let ab = 0.5 * self.d_eta(p, &basis[a], &complex_mult(&basis[b]));
            let ba = 0.5 * self.d_eta(p, &basis[b], &complex_mult(&basis[a]));
            0.5 * (ab + ba)
        });
        if m.iter().any(|x| !x.is_finite()) {
            return f64::NAN;
        }
        nalgebra::SymmetricEigen::new(m).eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// `|det dη|` on a `g`-orthonormal frame of `Ker η`.
    pub fn contact_determinant(&self, p: &[f64]) -> Result<f64> {
        let frame = tensor::gram_schmidt(self, p, &self.contact_basis(p))?;
        let k = frame.len();
        let m = nalgebra::DMatrix::from_fn(k, k, |a, b| self.d_eta(p, &frame.vectors[a], &frame.vectors[b]));
        Ok(m.determinant().abs())
    }

    /// `(L_F η)(Y) = dη(F, Y) + Y(η(F))` for a field `F` at `p`.
    pub fn eta_lie_derivative<F: VectorField>(&self, field: &F, p: &[f64], y: &[f64]) -> f64 {
        let fp = field.eval(p);
        let along = derivative_along_scalar(p, y, |c| {
            let fc = field.eval(c);
            self.eta(c, &fc)
        });
        self.d_eta(p, &fp, y) + along
    }
}

impl Metric for SasakianStructure {
    fn inner<T: Scalar>(&self, q: &[T], u: &[T], v: &[T]) -> T {
        if self.round {
            return dot(u, v);
        }
        let eu = self.eta(q, u);
        let ev = self.eta(q, v);
        let xi = self.reeb(q);
        let mut uc = u.to_vec();
        axpy(-eu, &xi, &mut uc);
        let mut vc = v.to_vec();
        axpy(-ev, &xi, &mut vc);
        eu * ev + self.d_eta(q, &uc, &complex_mult(&vc)).scale(0.5)
    }

    fn is_euclidean(&self) -> bool {
        self.round
    }
}

/// The Reeb field of a structure as a vector field.
pub struct ReebField<'a>(pub &'a SasakianStructure);

impl VectorField for ReebField<'_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        self.0.reeb(q)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StructureResiduals {
    pub phi_xi: f64,
    pub phi_squared: f64,
    pub eta_phi: f64,
    pub compatibility: f64,
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        self.phi_xi.max(self.phi_squared).max(self.eta_phi).max(self.compatibility)
    }
}

/// `|g(∇_X F, Y) + g(∇_Y F, X)|` for an arbitrary field `F`.
pub fn killing_residual_of<M: Metric, F: VectorField>(metric: &M, field: &F, p: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let nx = covariant_derivative(metric, p, x, field);
    let ny = covariant_derivative(metric, p, y, field);
    (metric.inner(p, &nx, y) + metric.inner(p, &ny, x)).abs()
}

pub fn reeb_at(s: &SasakianStructure, p: &AmbientPoint) -> Vec<f64> {
    s.reeb(p.coords())
}

/// `‖v‖` in the structure's metric.
pub fn metric_norm<M: Metric>(metric: &M, p: &[f64], v: &[f64]) -> f64 {
    metric.inner(p, v, v).max(0.0).sqrt()
}

/// `‖a − b‖` in the structure's metric.
pub fn metric_distance<M: Metric>(metric: &M, p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    metric_norm(metric, p, &sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_f;
    use crate::tensor::{tangential_project, EuclideanMetric, ProjectedConstant};

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn round_eta_and_reeb_examples() {
        let s = SasakianStructure::round(2).unwrap();
        let p = AmbientPoint::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let xi = reeb_at(&s, &p);
        assert_eq!(xi, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.eta(p.coords(), &xi), 1.0);
        assert_eq!(s.eta(p.coords(), &[0.0, 0.0, 1.0, 0.0]), 0.0);
    }

    #[test]
    fn weighted_eta_and_reeb_examples() {
        let s = SasakianStructure::weighted(vec![1.0, 2.0]).unwrap();
        let p = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(s.reeb(&p), vec![0.0, 1.0, 0.0, 0.0]);
        let x = [0.0, 0.7, 0.3, -0.2];
        assert_eq!(s.eta(&p, &x), dot(&complex_mult(&p), &x));
        let q = [0.0, 0.0, 1.0, 0.0];
        let r = s.reeb(&q);
        assert_eq!(r, vec![0.0, 0.0, 0.0, 2.0]);
        assert!((s.eta(&q, &r) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_reeb_is_unit_and_orthogonal_to_contact() {
        let s = SasakianStructure::weighted(vec![1.0, 2.0, 3.0]).unwrap();
        let mut r = rng();
        for _ in 0..10 {
            let p = random::random_unit(&mut r, 6);
            let xi = s.reeb(&p);
            assert!((s.eta(&p, &xi) - 1.0).abs() < 1e-10);
            assert!((s.inner(&p, &xi, &xi) - 1.0).abs() < 1e-9);
            let x = s.contact_part(&p, &random::random_tangent(&mut r, &p));
            assert!(s.inner(&p, &xi, &x).abs() < 1e-9);
            let y = random::random_tangent(&mut r, &p);
            assert!((s.inner(&p, &x, &y) - s.inner(&p, &y, &x)).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_weights_agree_with_round() {
        let w = SasakianStructure::weighted(vec![1.0; 3]).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let p = random::random_unit(&mut r, 6);
            let x = random::random_tangent(&mut r, &p);
            let y = random::random_tangent(&mut r, &p);
            assert!((w.inner(&p, &x, &y) - dot(&x, &y)).abs() < 1e-9);
        }
    }

    #[test]
    fn round_phi_is_projected_complex_structure() {
        let s = SasakianStructure::round(3).unwrap();
        let mut r = rng();
        let p = AmbientPoint::new(random::random_unit(&mut r, 6)).unwrap();
        let x = s.contact_part(p.coords(), &random::random_tangent(&mut r, p.coords()));
        let phi = s.phi(&p, &x).unwrap();
        let oracle = tangential_project(&p, &complex_mult(&x)).vec;
        assert!(norm_f(&sub(&phi, &oracle)) < 1e-9);
        let xi = reeb_at(&s, &p);
        assert!(norm_f(&s.phi(&p, &xi).unwrap()) < 1e-9);
    }

    #[test]
    fn round_structure_residuals_vanish() {
        let s = SasakianStructure::round(4).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let p = AmbientPoint::new(random::random_unit(&mut r, 8)).unwrap();
            let x = random::random_tangent(&mut r, p.coords());
            let y = random::random_tangent(&mut r, p.coords());
            assert!(s.structure_residuals(&p, &x, &y).unwrap().max() < 1e-8);
            assert!(s.sasakian_residual(&p, &x, &y).unwrap() < 1e-7);
            assert!(s.killing_residual(&p, &x, &y) < 1e-9);
            let (a, b) = s.reeb_residuals(&p, &x);
            assert!(a < 1e-12 && b < 1e-9);
        }
    }

    #[test]
    fn weighted_structure_is_sasakian() {
        let s = SasakianStructure::weighted(vec![1.0, 2.0, 3.0]).unwrap();
        let mut r = rng();
        for _ in 0..3 {
            let p = AmbientPoint::new(random::random_unit(&mut r, 6)).unwrap();
            let x = random::random_tangent(&mut r, p.coords());
            let y = random::random_tangent(&mut r, p.coords());
            assert!(s.killing_residual(&p, &x, &y) < 1e-5);
            assert!(s.sasakian_residual(&p, &x, &y).unwrap() < 1e-4);
            assert!(s.structure_residuals(&p, &x, &y).unwrap().max() < 1e-5);
        }
    }

    #[test]
    fn non_killing_field_is_detected() {
        let mut r = rng();
        let p = random::random_unit(&mut r, 4);
        let field = ProjectedConstant(vec![1.0, 0.0, 0.0, 0.0]);
        let x = random::random_tangent(&mut r, &p);
        assert!(killing_residual_of(&EuclideanMetric, &field, &p, &x, &x) > 1e-2);
    }

    #[test]
    fn rescaled_metric_fails_sasakian_identity() {
        struct Scaled;
        impl Metric for Scaled {
            fn inner<T: Scalar>(&self, _q: &[T], u: &[T], v: &[T]) -> T {
                dot(u, v).scale(4.0)
            }
        }
        let mut r = rng();
        let p = AmbientPoint::new(random::random_unit(&mut r, 6)).unwrap();
        let xi: Vec<f64> = linalg::scale(0.5, &complex_mult(p.coords()));
        let x = random::random_tangent(&mut r, p.coords());
        let rr = curvature_operator(&Scaled, &p, &x, &xi, &xi).unwrap();
        let mut diff = rr;
        let eta_xi = Scaled.inner(p.coords(), &xi, &xi);
        axpy(-eta_xi, &x, &mut diff);
        axpy(Scaled.inner(p.coords(), &x, &xi), &xi, &mut diff);
        assert!(metric_norm(&Scaled, p.coords(), &diff) > 0.1);
    }

    #[test]
    fn contact_nondegeneracy() {
        let s = SasakianStructure::weighted(vec![1.0, 2.0, 3.0]).unwrap();
        let mut r = rng();
        let p = random::random_unit(&mut r, 6);
        assert!(s.contact_determinant(&p).unwrap() > 1e-6);
        assert!(s.transverse_min_eigenvalue(&p) > 0.0);
    }

    #[test]
    fn bad_weights_are_rejected() {
        assert!(matches!(
            SasakianStructure::weighted(vec![-1.0, 1.0]),
            Err(GeometryError::DegenerateContact { .. })
        ));
        assert!(matches!(SasakianStructure::weighted(vec![2.0, 1.0]), Err(GeometryError::InvalidInput(_))));
        assert!(SasakianStructure::round(1).is_err());
    }
}
