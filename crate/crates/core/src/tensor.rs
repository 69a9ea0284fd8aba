//! Extrinsic differential geometry on the unit sphere `S^{2n−1} ⊂ ℝ^{2n}`.
//!
//! Points and vectors are plain ambient coordinate arrays. A tangent vector
//! `v` at `p` is extended to a vector field by `q ↦ v − ⟨v, q⟩q` (the
//! projected-constant extension); every connection, curvature and bracket
//! evaluation in the crate goes through that single convention. Curves
//! through `p` are the retractions `t ↦ (p + t·v)/|p + t·v|`.
//!
//! The Levi-Civita connection of an arbitrary metric is obtained from the
//! Koszul formula. For projected-constant fields all brackets vanish at the
//! base point, so
//!
//! ```text
//! g(∇_U Ṽ, Z) = ½ (U·g(Ṽ, Z̃) + V·g(Z̃, Ũ) − Z·g(Ũ, Ṽ))
//! ```
//!
//! and for a general field `Y` one has `∇_X Y = P(D_X Y) + ∇_X Ỹ(p)` where `P`
//! is the tangential projection and `D` the ambient derivative.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GeometryError, Result};
use crate::jet::{eps_part, lift, lift_dual, Dual, Jet2, Scalar};
use crate::linalg::{self, axpy, cholesky_solve, dot, norm_f, normalize, sub};
use crate::tolerances;

/// A unit vector of `ℝ^{2n} ≅ ℂⁿ`, coordinates `(x₁, y₁, …, xₙ, yₙ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint {
    coords: Vec<f64>,
}

impl AmbientPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || !coords.len().is_multiple_of(2) {
            return Err(GeometryError::InvalidInput(format!(
                "ambient dimension must be even and positive, got {}",
                coords.len()
            )));
        }
        let r = norm_f(&coords);
        if (r - 1.0).abs() > tolerances::UNIT_NORM {
            return Err(GeometryError::InvalidInput(format!("point has norm {r}, expected 1")));
        }
        Ok(AmbientPoint { coords })
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let r = norm_f(v);
        if !(r > 0.0) || !r.is_finite() {
            return Err(GeometryError::InvalidInput("cannot normalize a zero vector".into()));
        }
        AmbientPoint::new(v.iter().map(|x| x / r).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Complex dimension `n` of the ambient `ℂⁿ`.
    pub fn complex_dim(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// An ambient vector attached to a sphere point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: AmbientPoint,
    pub vec: Vec<f64>,
}

impl TangentVector {
    pub fn is_tangent(&self) -> bool {
        dot(&self.vec, self.base.coords()).abs() < tolerances::TANGENCY
    }
}

/// Ordered orthonormal family of vectors at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub base: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

impl Frame {
    pub fn empty(base: &[f64]) -> Self {
        Frame { base: base.to_vec(), vectors: Vec::new(), labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Largest entry of `Gram − I` in the given metric.
    pub fn orthonormality_defect<M: Metric>(&self, metric: &M) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let g = metric.inner(&self.base, a, b);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Metric-orthogonal projection of `w` onto the span of the frame.
    pub fn project<M: Metric>(&self, metric: &M, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        for e in &self.vectors {
            axpy(metric.inner(&self.base, w, e), e, &mut out);
        }
        out
    }

    /// Components `g(w, e_a)` of `w` along the frame.
    pub fn coefficients<M: Metric>(&self, metric: &M, w: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|e| metric.inner(&self.base, w, e)).collect()
    }

    /// Linear combination `Σ c_a e_a`.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.base.len()];
        for (c, e) in coeffs.iter().zip(&self.vectors) {
            axpy(*c, e, &mut out);
        }
        out
    }
}

/// A Riemannian metric on the sphere, evaluated on tangent vectors.
///
/// Implementations must be smooth in `q` and are evaluated at jet-valued
/// points; only tangent `u, v` are ever passed in.
pub trait Metric: Sync {
    fn inner<T: Scalar>(&self, q: &[T], u: &[T], v: &[T]) -> T;

    /// True when `inner` is the ambient dot product; enables shortcuts.
    fn is_euclidean(&self) -> bool {
        false
    }
}

/// The round metric induced by the flat metric of `ℂⁿ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanMetric;

impl Metric for EuclideanMetric {
    fn inner<T: Scalar>(&self, _q: &[T], u: &[T], v: &[T]) -> T {
        dot(u, v)
    }

    fn is_euclidean(&self) -> bool {
        true
    }
}

/// A smooth vector field on a neighbourhood of the sphere.
pub trait VectorField: Sync {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T>;
}

/// The projected-constant extension `q ↦ v − ⟨v, q⟩q` of a tangent vector.
#[derive(Clone, Debug)]
pub struct ProjectedConstant(pub Vec<f64>);

impl VectorField for ProjectedConstant {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        project(q, &lift(&self.0))
    }
}

/// A linear field `q ↦ M q` (`M` row-major, square).
#[derive(Clone, Debug)]
pub struct LinearField {
    pub matrix: Vec<Vec<f64>>,
}

impl VectorField for LinearField {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        self.matrix
            .iter()
            .map(|row| {
                let mut s = T::zero();
                for (a, x) in row.iter().zip(q) {
                    if *a != 0.0 {
                        s += x.scale(*a);
                    }
                }
                s
            })
            .collect()
    }
}

/// Tangential projection `v − ⟨v, q⟩q` at a unit point, generic over jets.
pub fn project<T: Scalar>(q: &[T], v: &[T]) -> Vec<T> {
    let c = dot(v, q);
    let mut out = v.to_vec();
    axpy(-c, q, &mut out);
    out
}

pub fn tangential_project(p: &AmbientPoint, v: &[f64]) -> TangentVector {
    TangentVector { base: p.clone(), vec: project(p.coords(), v) }
}

/// Evaluates `f` on the retraction curve `normalize(q + ε·dir)` and returns
/// the derivative at `ε = 0`.
pub fn derivative_along<T, F>(q: &[T], dir: &[T], f: F) -> Vec<T>
where
    T: Scalar,
    F: FnOnce(&[Dual<T>]) -> Vec<Dual<T>>,
{
    let curve: Vec<Dual<T>> = q.iter().zip(dir).map(|(a, b)| Dual::new(*a, *b)).collect();
    let curve = normalize(&curve);
    eps_part(&f(&curve))
}

pub fn derivative_along_scalar<T, F>(q: &[T], dir: &[T], f: F) -> T
where
    T: Scalar,
    F: FnOnce(&[Dual<T>]) -> Dual<T>,
{
    let curve: Vec<Dual<T>> = q.iter().zip(dir).map(|(a, b)| Dual::new(*a, *b)).collect();
    let curve = normalize(&curve);
    f(&curve).eps
}

/// Straight-line ambient derivative, used for exterior derivatives of forms
/// defined on a neighbourhood of the sphere.
pub fn ambient_derivative<T, F>(q: &[T], dir: &[T], f: F) -> Vec<T>
where
    T: Scalar,
    F: FnOnce(&[Dual<T>]) -> Vec<Dual<T>>,
{
    let line: Vec<Dual<T>> = q.iter().zip(dir).map(|(a, b)| Dual::new(*a, *b)).collect();
    eps_part(&f(&line))
}

/// Exterior derivative of a 1-form given by its ambient covector field:
/// `dα(u, v) = ∂_u(α·v) − ∂_v(α·u)` for constant `u, v`.
pub fn exterior_derivative<T, F>(alpha: F, q: &[T], u: &[T], v: &[T]) -> T
where
    T: Scalar,
    F: Fn(&[Dual<T>]) -> Vec<Dual<T>>,
{
    let du = ambient_derivative(q, u, |x| alpha(x));
    let dv = ambient_derivative(q, v, |x| alpha(x));
    dot(&du, v) - dot(&dv, u)
}

/// First and (optionally) second derivative of a field along the retraction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalDerivative {
    pub first: Vec<f64>,
    pub second: Option<Vec<f64>>,
}

/// Exact derivatives of `t ↦ field(normalize(p + t·dir))` at `t = 0`,
/// computed with [`Jet2`] arithmetic.
pub fn directional_derivative<F: VectorField>(
    field: &F,
    p: &AmbientPoint,
    dir: &[f64],
    order: usize,
) -> Result<DirectionalDerivative> {
    if !(1..=2).contains(&order) {
        return Err(GeometryError::InvalidInput(format!("derivative order {order} not in 1..=2")));
    }
    let curve: Vec<Jet2> =
        p.coords().iter().zip(dir).map(|(a, b)| Jet2::new(*a, *b, 0.0)).collect();
    let curve = normalize(&curve);
    let out = field.eval(&curve);
    if out.len() != p.dim() || out.iter().any(|j| !(j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite())) {
        return Err(GeometryError::NotDifferentiable);
    }
    let first = out.iter().map(|j| j.d1).collect();
    let second = (order == 2).then(|| out.iter().map(|j| j.d2).collect());
    Ok(DirectionalDerivative { first, second })
}

fn unit<T: Scalar>(dim: usize, k: usize) -> Vec<T> {
    let mut e = vec![T::zero(); dim];
    e[k] = T::one();
    e
}

/// Projections of the ambient coordinate vectors onto `T_qS`.
fn tangent_spanning_set<T: Scalar>(q: &[T]) -> Vec<Vec<T>> {
    (0..q.len()).map(|k| project(q, &unit(q.len(), k))).collect()
}

/// `Ĝ_kl = g(Pe_k, Pe_l) + q_k q_l`, positive definite on all of `ℝ^{2n}`.
fn extended_gram<T: Scalar, M: Metric>(metric: &M, q: &[T], z: &[Vec<T>]) -> Vec<Vec<T>> {
    let m = q.len();
    let mut g = vec![vec![T::zero(); m]; m];
    for k in 0..m {
        for l in k..m {
            let v = metric.inner(q, &z[k], &z[l]) + q[k] * q[l];
            g[k][l] = v;
            g[l][k] = v;
        }
    }
    g
}

/// Solves for the tangent vector `w` with `g(w, Pe_k) = b_k` for all `k`.
/// `b` must be the restriction of a linear functional on `T_qS`.
pub fn raise_index<T: Scalar, M: Metric>(metric: &M, q: &[T], b: &[T]) -> Vec<T> {
    if metric.is_euclidean() {
        return project(q, b);
    }
    let z = tangent_spanning_set(q);
    let g = extended_gram(metric, q, &z);
    cholesky_solve(&g, b).unwrap_or_else(|| vec![T::cst(f64::NAN); q.len()])
}

/// `∇_U Ṽ` at `q` for projected-constant extensions of tangent `u, v`.
///
/// For the round metric this is identically zero; in general it is the
/// difference between the Levi-Civita connection of `metric` and the round
/// one, a symmetric tensor in `(u, v)`.
pub fn connection_correction<T: Scalar, M: Metric>(metric: &M, q: &[T], u: &[T], v: &[T]) -> Vec<T> {
    let m = q.len();
    if metric.is_euclidean() {
        return vec![T::zero(); m];
    }
    let z = tangent_spanning_set(q);
    let zd: Vec<Vec<Dual<T>>> = z.iter().map(|zk| lift_dual(zk)).collect();
    let ud = lift_dual(u);
    let vd = lift_dual(v);

    let along_u = derivative_along(q, u, |c| {
        let vv = project(c, &vd);
        zd.iter().map(|zk| metric.inner(c, &vv, &project(c, zk))).collect()
    });
    let along_v = derivative_along(q, v, |c| {
        let uu = project(c, &ud);
        zd.iter().map(|zk| metric.inner(c, &project(c, zk), &uu)).collect()
    });
    let mut b = Vec::with_capacity(m);
    for k in 0..m {
        let along_z = derivative_along_scalar(q, &z[k], |c| {
            metric.inner(c, &project(c, &ud), &project(c, &vd))
        });
        b.push((along_u[k] + along_v[k] - along_z).scale(0.5));
    }
    raise_index(metric, q, &b)
}

/// `∇_x Y` at `q` for a tangent vector `x` and a tangent field `Y`.
pub fn covariant_derivative<T, M, F>(metric: &M, q: &[T], x: &[T], field: &F) -> Vec<T>
where
    T: Scalar,
    M: Metric,
    F: VectorField,
{
    let y = field.eval(q);
    let dy = derivative_along(q, x, |c| field.eval(c));
    let mut out = project(q, &dy);
    let corr = connection_correction(metric, q, x, &y);
    axpy(T::one(), &corr, &mut out);
    out
}

/// Condition number of the metric on an orthonormal tangent frame at `p`.
pub fn metric_condition<M: Metric>(metric: &M, p: &[f64]) -> f64 {
    let basis = linalg::sphere_tangent_basis(p);
    let k = basis.len();
    let g = DMatrix::from_fn(k, k, |i, j| metric.inner(p, &basis[i], &basis[j]));
    let eig = SymmetricEigen::new(g).eigenvalues;
    let min = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let max = eig.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_metric<M: Metric>(metric: &M, p: &[f64]) -> Result<()> {
    let condition = metric_condition(metric, p);
    if !(condition <= tolerances::MAX_CONDITION) {
        return Err(GeometryError::SingularMetric { condition });
    }
    Ok(())
}

/// Levi-Civita derivative `∇_X Y` at `p` via the Koszul formula.
pub fn koszul_connection<M: Metric, F: VectorField>(
    metric: &M,
    p: &AmbientPoint,
    x: &[f64],
    y_field: &F,
) -> Result<Vec<f64>> {
    check_metric(metric, p.coords())?;
    Ok(covariant_derivative(metric, p.coords(), x, y_field))
}

/// The field `q ↦ ∇_{Y(q)} Z` built from two fields.
pub struct CovariantField<'a, M, Y, Z> {
    pub metric: &'a M,
    pub direction: &'a Y,
    pub field: &'a Z,
}

impl<M: Metric, Y: VectorField, Z: VectorField> VectorField for CovariantField<'_, M, Y, Z> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let y = self.direction.eval(q);
        covariant_derivative(self.metric, q, &y, self.field)
    }
}

/// Ambient Lie bracket `D_X Y − D_Y X` at `q`.
pub fn bracket<T: Scalar, X: VectorField, Y: VectorField>(x: &X, y: &Y, q: &[T]) -> Vec<T> {
    let xv = x.eval(q);
    let yv = y.eval(q);
    let dxy = derivative_along(q, &xv, |c| y.eval(c));
    let dyx = derivative_along(q, &yv, |c| x.eval(c));
    sub(&dxy, &dyx)
}

/// `[X, Y](p)` projected to the tangent space of the sphere.
pub fn lie_bracket<X: VectorField, Y: VectorField>(x: &X, y: &Y, p: &AmbientPoint) -> Vec<f64> {
    project(p.coords(), &bracket(x, y, p.coords()))
}

/// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z` for arbitrary fields.
pub fn curvature_of_fields<M, X, Y, Z>(metric: &M, p: &[f64], x: &X, y: &Y, z: &Z) -> Vec<f64>
where
    M: Metric,
    X: VectorField,
    Y: VectorField,
    Z: VectorField,
{
    let xv = x.eval(p);
    let yv = y.eval(p);
    let w_yz = CovariantField { metric, direction: y, field: z };
    let w_xz = CovariantField { metric, direction: x, field: z };
    let a = covariant_derivative(metric, p, &xv, &w_yz);
    let b = covariant_derivative(metric, p, &yv, &w_xz);
    let br = project(p, &bracket(x, y, p));
    let c = covariant_derivative(metric, p, &br, z);
    let mut out = sub(&a, &b);
    axpy(-1.0, &c, &mut out);
    out
}

/// Riemann curvature operator `R(X,Y)Z` at `p` for tangent vectors.
pub fn curvature_operator<M: Metric>(
    metric: &M,
    p: &AmbientPoint,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<Vec<f64>> {
    check_metric(metric, p.coords())?;
    let (xf, yf, zf) = (
        ProjectedConstant(x.to_vec()),
        ProjectedConstant(y.to_vec()),
        ProjectedConstant(z.to_vec()),
    );
    Ok(curvature_of_fields(metric, p.coords(), &xf, &yf, &zf))
}

/// Deterministic modified Gram–Schmidt in the metric `g` at `p`.
///
/// Vectors whose residual norm falls below the drop tolerance are skipped.
pub fn gram_schmidt<M: Metric>(metric: &M, p: &[f64], vectors: &[Vec<f64>]) -> Result<Frame> {
    let labels: Vec<String> = (0..vectors.len()).map(|i| format!("v{i}")).collect();
    gram_schmidt_labeled(metric, p, vectors, &labels)
}

pub fn gram_schmidt_labeled<M: Metric>(
    metric: &M,
    p: &[f64],
    vectors: &[Vec<f64>],
    labels: &[String],
) -> Result<Frame> {
    let frame = extend_orthonormal(metric, &Frame::empty(p), vectors, labels);
    if frame.is_empty() {
        return Err(GeometryError::EmptyFrame);
    }
    Ok(frame)
}

/// Continues Gram–Schmidt on top of an existing orthonormal frame and
/// returns only the newly created vectors.
pub fn extend_orthonormal<M: Metric>(
    metric: &M,
    against: &Frame,
    vectors: &[Vec<f64>],
    labels: &[String],
) -> Frame {
    let p = &against.base;
    let mut all = against.vectors.clone();
    let mut out = Frame::empty(p);
    for (v, label) in vectors.iter().zip(labels) {
        let mut w = v.clone();
        // Two passes keep the result orthonormal to rounding.
        for _ in 0..2 {
            for e in &all {
                let c = metric.inner(p, &w, e);
                axpy(-c, e, &mut w);
            }
        }
        let n = metric.inner(p, &w, &w).max(0.0).sqrt();
        if n > tolerances::GS_DROP {
            let e: Vec<f64> = w.iter().map(|x| x / n).collect();
            all.push(e.clone());
            out.vectors.push(e);
            out.labels.push(label.clone());
        }
    }
    out
}
