//! Curvature of a submersion `N → P` where `N ⊂ M = S^{2n−1}` is a
//! constraint submanifold.
//!
//! Slot convention: `R(X,Y,Z,W) = g(R(X,Y)Z, W)` and the sectional curvature
//! of an orthonormal pair is `K(X,Y) = R(X,Y,Y,X)`. In this convention
//!
//! ```text
//! Gauss:    R^N(X,Y,Z,W) = R^M(X,Y,Z,W) + g(h(X,W),h(Y,Z)) − g(h(X,Z),h(Y,W))
//! O'Neill:  R^P(X,Y,Z,W) = R^N(X,Y,Z,W) − 2g(A_X Y, A_Z W)
//!                          + g(A_Y Z, A_X W) − g(A_X Z, A_Y W)
//! ```
//!
//! for horizontal arguments, so `K^P = K^N + 3‖A_X Y‖²`.
//!
//! Two independent paths are available for `R^N`: the Gauss equation, and
//! direct jet differentiation of the Levi-Civita connection of `N`.

use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::jet::Scalar;
use crate::linalg::{self, axpy, norm_f, sub};
use crate::reduction::{LocalSubmersion, NExtension, ReductionFrame, Submersion};
use crate::sasakian::{ReebField, SasakianStructure};
use crate::tensor::{self, bracket, curvature_operator, extend_orthonormal, AmbientPoint, Frame, Metric, VectorField};
use crate::tolerances;
use crate::torus::MomentumCovector;

/// Second fundamental form, O'Neill tensor and curvature data at one point.
pub struct QuotientGeometry<'a> {
    pub local: LocalSubmersion<'a>,
    pub frame: ReductionFrame,
    /// `g`-orthonormal basis of `T_pN`: vertical, Reeb, contact.
    tangent: Vec<Vec<f64>>,
    /// `g`-orthonormal basis of the horizontal space: contact, Reeb.
    horizontal: Vec<Vec<f64>>,
    h_table: Vec<Vec<Vec<f64>>>,
    a_table: Vec<Vec<Vec<f64>>>,
}

/// `q ↦ ∇^N_{Ỹ(q)} Z̃` for constraint-tangent extensions.
struct NCovariant<'a, 'b> {
    local: &'a LocalSubmersion<'b>,
    direction: NExtension<'a, 'b>,
    field: NExtension<'a, 'b>,
}

impl VectorField for NCovariant<'_, '_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let y = self.direction.eval(q);
        self.local.covariant_n(q, &y, &self.field)
    }
}

/// `q ↦ φ_q X(q) / ‖X(q)‖` for a fundamental field `X`.
struct UnitPhiField<'a> {
    structure: &'a SasakianStructure,
    field: crate::torus::FundamentalField<'a>,
}

impl VectorField for UnitPhiField<'_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let x = self.field.eval(q);
        let n = self.structure.inner(q, &x, &x).sqrt();
        let phi = self.structure.phi_at(q, &x);
        linalg::scale(n.recip(), &phi)
    }
}

impl<'a> QuotientGeometry<'a> {
    pub fn new(setup: &'a Submersion, p: &[f64]) -> Result<Self> {
        let local = setup.local(p)?;
        let frame = local.frame()?;
        crate::reduction::check_frame(&setup.structure, &frame)?;
        let mut tangent = frame.vertical.vectors.clone();
        tangent.extend(frame.reeb.iter().cloned());
        tangent.extend(frame.contact.vectors.iter().cloned());
        let horizontal = frame.horizontal_basis();
        let mut geo = QuotientGeometry { local, frame, tangent, horizontal, h_table: Vec::new(), a_table: Vec::new() };
        geo.h_table = geo.tangent.iter().map(|x| geo.tangent.iter().map(|y| geo.h_direct(x, y)).collect()).collect();
        geo.a_table = geo.horizontal.iter().map(|x| geo.horizontal.iter().map(|y| geo.a_direct(x, y)).collect()).collect();
        Ok(geo)
    }

    pub fn structure(&self) -> &SasakianStructure {
        self.local.structure()
    }

    pub fn point(&self) -> &[f64] {
        &self.frame.point
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.structure().inner(self.point(), u, v)
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    pub fn horizontal_basis(&self) -> &[Vec<f64>] {
        &self.horizontal
    }

    pub fn tangent_basis(&self) -> &[Vec<f64>] {
        &self.tangent
    }

    pub fn reeb(&self) -> Option<&[f64]> {
        self.frame.reeb.as_deref()
    }

    fn coefficients(&self, basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        basis.iter().map(|e| self.inner(v, e)).collect()
    }

    /// `g`-orthogonal projection onto `T_pN`.
    pub fn tangent_part(&self, v: &[f64]) -> Vec<f64> {
        self.local.project_n(self.point(), v)
    }

    pub fn normal_part(&self, v: &[f64]) -> Vec<f64> {
        sub(v, &self.tangent_part(v))
    }

    /// Vertical component of a vector tangent to `N`.
    pub fn vertical_part(&self, v: &[f64]) -> Vec<f64> {
        sub(v, &self.local.horizontal(self.point(), v))
    }

    pub fn horizontal_part(&self, v: &[f64]) -> Vec<f64> {
        self.local.horizontal(self.point(), v)
    }

    /// `φv = ∇_v ξ` at the base point.
    pub fn phi(&self, v: &[f64]) -> Vec<f64> {
        self.structure().phi_at(self.point(), v)
    }

    /// `h(X,Y)`: normal part of `∇^M_X Ỹ`.
    pub fn h_direct(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ext = self.local.n_extension(y);
        let d = tensor::covariant_derivative(self.structure(), self.point(), x, &ext);
        self.normal_part(&d)
    }

    /// `h(X,Y)` from the precomputed table on `T_pN`.
    pub fn h(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        bilinear(&self.h_table, &self.coefficients(&self.tangent, x), &self.coefficients(&self.tangent, y), x.len())
    }

    /// `A(X,Y)`: vertical part of `∇^N_X Ỹ` for a horizontal extension `Ỹ`.
    pub fn a_direct(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ext = self.local.h_extension(y);
        let d = self.local.covariant_n(self.point(), x, &ext);
        self.vertical_part(&d)
    }

    /// `A(X,Y)` from the precomputed table on the horizontal space.
    pub fn a(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        bilinear(&self.a_table, &self.coefficients(&self.horizontal, x), &self.coefficients(&self.horizontal, y), x.len())
    }

    /// `½·v[X̃, Ỹ]` with horizontal extensions.
    pub fn a_bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let br = bracket(&self.local.h_extension(x), &self.local.h_extension(y), self.point());
        linalg::scale(0.5, &self.vertical_part(&br))
    }

    /// `R^M(X,Y,Z,W)` of the ambient sphere metric.
    pub fn r_m(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let p = AmbientPoint::new(self.point().to_vec())?;
        let r = curvature_operator(self.structure(), &p, x, y, z)?;
        Ok(self.inner(&r, w))
    }

    /// `R^N(X,Y,Z,W)` by the Gauss equation.
    pub fn r_n_gauss(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let m = self.r_m(x, y, z, w)?;
        Ok(m + self.inner(&self.h(x, w), &self.h(y, z)) - self.inner(&self.h(x, z), &self.h(y, w)))
    }

    /// `R^N(X,Y)Z` by direct differentiation of the connection of `N`.
    pub fn r_n_direct(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let p = self.point();
        let l = &self.local;
        let w_yz = NCovariant { local: l, direction: l.n_extension(y), field: l.n_extension(z) };
        let w_xz = NCovariant { local: l, direction: l.n_extension(x), field: l.n_extension(z) };
        let a = l.covariant_n(p, x, &w_yz);
        let b = l.covariant_n(p, y, &w_xz);
        let br = l.project_n(p, &bracket(&l.n_extension(x), &l.n_extension(y), p));
        let c = l.covariant_n(p, &br, &l.n_extension(z));
        let mut out = sub(&a, &b);
        axpy(-1.0, &c, &mut out);
        out
    }

    /// `R^P(X,Y,Z,W)` on horizontal lifts by O'Neill's formula.
    pub fn r_p(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
        let n = self.r_n_gauss(x, y, z, w)?;
        let a = |u: &[f64], v: &[f64]| self.a(u, v);
        Ok(n - 2.0 * self.inner(&a(x, y), &a(z, w)) + self.inner(&a(y, z), &a(x, w)) - self.inner(&a(x, z), &a(y, w)))
    }

    fn plane_area(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2)
    }

    pub fn sectional_m(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.r_m(x, y, y, x)? / self.plane_area(x, y))
    }

    pub fn sectional_n(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.r_n_gauss(x, y, y, x)? / self.plane_area(x, y))
    }

    pub fn sectional_p(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.r_p(x, y, y, x)? / self.plane_area(x, y))
    }

    /// `R^P(X,Y)Z` as a horizontal vector.
    pub fn r_p_vector(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        for e in &self.horizontal {
            axpy(self.r_p(x, y, z, e)?, e, &mut out);
        }
        Ok(out)
    }

    /// `‖R^P(X,ζ)Y − η(Y)X + g(X,Y)ζ‖`, or `None` when the Reeb field is
    /// vertical.
    pub fn quotient_sasakian_residual(&self, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
        self.sasakian_residual_with(x, y, self.reeb().map(<[f64]>::to_vec))
    }

    /// The same residual with an arbitrary unit horizontal field in place of
    /// the Reeb field.
    pub fn sasakian_residual_with(&self, x: &[f64], y: &[f64], zeta: Option<Vec<f64>>) -> Result<Option<f64>> {
        let Some(zeta) = zeta else { return Ok(None) };
        let r = self.r_p_vector(x, &zeta, y)?;
        let mut diff = r;
        axpy(-self.inner(&zeta, y), x, &mut diff);
        axpy(self.inner(x, y), &zeta, &mut diff);
        Ok(Some(self.norm(&diff)))
    }

    /// `K^P(X, φX)` for a horizontal contact vector `X`.
    pub fn phi_sectional(&self, x: &[f64]) -> Result<f64> {
        let phi_x = self.horizontal_part(&self.tangent_part(&self.phi(x)));
        self.sectional_p(x, &phi_x)
    }

    /// `|g(∇^P_X ζ, Y) + g(∇^P_Y ζ, X)|` on horizontal lifts.
    pub fn projected_killing_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let xi = ReebField(self.structure());
        let p = self.point();
        let lift = |v: &[f64]| self.horizontal_part(&self.local.covariant_n(p, v, &xi));
        (self.inner(&lift(x), y) + self.inner(&lift(y), x)).abs()
    }

    /// Weingarten formula for the normal `φX_i/‖X_i‖` of the `i`-th vertical
    /// generator, compared with its closed form.
    pub fn weingarten_check(&self, i: usize, y: &[f64], z: &[f64]) -> Result<f64> {
        let gen = self
            .local
            .vertical_generators
            .get(i)
            .ok_or_else(|| GeometryError::InvalidInput(format!("no vertical generator {i}")))?;
        let s = self.structure();
        let p = self.point();
        let action = &self.local.setup.action;
        let nu = UnitPhiField { structure: s, field: action.field(gen) };
        let d = tensor::covariant_derivative(s, p, y, &nu);
        let lhs = -self.inner(&self.tangent_part(&d), z);
        let x = action.fundamental_field(gen, p);
        let nabla_x = tensor::covariant_derivative(s, p, y, &action.field(gen));
        let rhs = (self.inner(&x, y) * s.eta(p, z) - self.inner(&self.phi(&nabla_x), z)) / self.norm(&x);
        Ok((lhs - rhs).abs())
    }

    /// Contact CR splitting `TN = D ⊕ D^⊥ ⊕ ⟨ξ⟩`, `T^⊥N = φD^⊥ ⊕ ν`.
    pub fn cr_decomposition(&self) -> Result<CRDecomposition> {
        let p = self.point().to_vec();
        let s = self.structure();
        let mut base: Vec<Vec<f64>> = self.frame.vertical.vectors.clone();
        base.extend(self.frame.contact.vectors.iter().cloned());
        let k = base.len();
        let images: Vec<Vec<f64>> = base.iter().map(|e| self.tangent_part(&self.phi(e))).collect();
        let m = nalgebra::DMatrix::from_fn(k, k, |b, a| self.inner(&images[a], &base[b]));
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("v_t requested");
        let threshold = tolerances::RANK_REL;
        let mut d_vecs = Vec::new();
        let mut perp_vecs = Vec::new();
        let mut sigmas: Vec<f64> = Vec::new();
        for (i, sigma) in svd.singular_values.iter().enumerate() {
            if *sigma > threshold / 10.0 && *sigma < threshold * 10.0 {
                return Err(GeometryError::AmbiguousSplit { sigma: *sigma });
            }
            sigmas.push(*sigma);
            let mut v = vec![0.0; p.len()];
            for (a, e) in base.iter().enumerate() {
                axpy(v_t[(i, a)], e, &mut v);
            }
            if *sigma <= threshold {
                perp_vecs.push(v);
            } else {
                d_vecs.push(v);
            }
        }
        sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let label = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let d = extend_orthonormal(s, &Frame::empty(&p), &d_vecs, &label("D", d_vecs.len()));
        let d_perp = extend_orthonormal(s, &Frame::empty(&p), &perp_vecs, &label("Dperp", perp_vecs.len()));
        let phi_perp: Vec<Vec<f64>> = d_perp.vectors.iter().map(|v| self.phi(v)).collect();
        let phi_d_perp = extend_orthonormal(s, &Frame::empty(&p), &phi_perp, &label("phiDperp", phi_perp.len()));
        let nu = extend_orthonormal(s, &phi_d_perp, &self.frame.normal.vectors, &label("nu", self.frame.normal.len()));

        let mut phi_d_invariance = 0.0f64;
        for v in &d.vectors {
            let w = self.phi(v);
            let inside = d.project(s, &w);
            phi_d_invariance = phi_d_invariance.max(self.norm(&sub(&w, &inside)));
        }
        let mut phi_perp_normal = 0.0f64;
        for w in &phi_perp {
            phi_perp_normal = phi_perp_normal.max(self.norm(&self.tangent_part(w)));
        }
        let mut nu_invariance = 0.0f64;
        for v in &nu.vectors {
            let w = self.phi(v);
            nu_invariance = nu_invariance.max(self.norm(&sub(&w, &nu.project(s, &w))));
        }
        Ok(CRDecomposition {
            dims: CRDims { d: d.len(), d_perp: d_perp.len(), nu: nu.len() },
            singular_values: sigmas,
            phi_d_invariance,
            phi_perp_normal,
            nu_invariance,
            d,
            d_perp,
            phi_d_perp,
            nu,
        })
    }

    /// Second fundamental form relations at horizontal contact vectors `X, Y`.
    pub fn relations(&self, cr: &CRDecomposition, x: &[f64], y: &[f64]) -> RelationResiduals {
        let s = self.structure();
        let h_xy = self.h(x, y);
        let phi_y = self.phi(y);
        let phi_x = self.phi(x);
        let h_bar = cr.phi_d_perp.project(s, &h_xy);
        let h_tilde = cr.nu.project(s, &h_xy);
        let a_xy = self.a(x, y);
        let a_x_phiy = self.a(x, &phi_y);
        let h_x_phiy = self.h(x, &phi_y);

        let rel1_a = self.norm(&sub(&a_x_phiy, &self.vertical_part(&self.phi(&h_xy))));
        let mut rhs = self.phi(&a_xy);
        axpy(1.0, &self.phi(&h_tilde), &mut rhs);
        let rel1_b = self.norm(&sub(&h_x_phiy, &rhs));
        let hb2 = self.inner(&h_bar, &h_bar);
        let ht2 = self.inner(&h_tilde, &h_tilde);
        let norm1 = (self.inner(&self.h(&phi_x, &phi_y), &h_xy) - hb2 + ht2).abs();
        let norm2_a = (self.inner(&h_x_phiy, &h_x_phiy) - self.inner(&a_xy, &a_xy) - ht2).abs();
        let norm2_b = (self.inner(&a_x_phiy, &a_x_phiy) - hb2).abs();
        RelationResiduals { rel1_a, rel1_b, norm1, norm2_a, norm2_b }
    }

    /// Terms of `K^P_φ(X) = K^M_φ(X) + 4‖h̄(X,X)‖² − 2‖h̃(X,X)‖²` and the
    /// O'Neill identity `K^N − K^P + 3‖A(X,φX)‖² = 0`.
    pub fn final_identity(&self, cr: &CRDecomposition, x: &[f64]) -> Result<FinalIdentity> {
        let s = self.structure();
        let phi_x = self.phi(x);
        let k_p = self.sectional_p(x, &phi_x)?;
        let k_m = self.sectional_m(x, &phi_x)?;
        let k_n = self.sectional_n(x, &phi_x)?;
        let h_xx = self.h(x, x);
        let h_bar = cr.phi_d_perp.project(s, &h_xx);
        let h_tilde = cr.nu.project(s, &h_xx);
        let h_bar_sq = self.inner(&h_bar, &h_bar);
        let h_tilde_sq = self.inner(&h_tilde, &h_tilde);
        let a = self.a(x, &phi_x);
        let oneill = k_n - k_p + 3.0 * self.inner(&a, &a);
        Ok(FinalIdentity {
            k_p,
            k_m,
            h_bar_sq,
            h_tilde_sq,
            residual: (k_p - k_m - 4.0 * h_bar_sq + 2.0 * h_tilde_sq).abs(),
            oneill_residual: oneill.abs(),
        })
    }
}

fn bilinear(table: &[Vec<Vec<f64>>], cx: &[f64], cy: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (a, row) in table.iter().enumerate() {
        if cx[a] == 0.0 {
            continue;
        }
        for (b, v) in row.iter().enumerate() {
            axpy(cx[a] * cy[b], v, &mut out);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CRDims {
    pub d: usize,
    pub d_perp: usize,
    pub nu: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CRDecomposition {
    pub dims: CRDims,
    pub singular_values: Vec<f64>,
    pub phi_d_invariance: f64,
    pub phi_perp_normal: f64,
    pub nu_invariance: f64,
    pub d: Frame,
    pub d_perp: Frame,
    pub phi_d_perp: Frame,
    pub nu: Frame,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RelationResiduals {
    pub rel1_a: f64,
    pub rel1_b: f64,
    pub norm1: f64,
    pub norm2_a: f64,
    pub norm2_b: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        [self.rel1_a, self.rel1_b, self.norm1, self.norm2_a, self.norm2_b].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FinalIdentity {
    pub k_p: f64,
    pub k_m: f64,
    pub h_bar_sq: f64,
    pub h_tilde_sq: f64,
    pub residual: f64,
    pub oneill_residual: f64,
}

/// `K^M(X, φX)` of the ambient structure.
pub fn ambient_phi_sectional(s: &SasakianStructure, p: &AmbientPoint, x: &[f64]) -> Result<f64> {
    let phi_x = s.phi(p, x)?;
    let r = curvature_operator(s, p, x, &phi_x, &phi_x)?;
    let q = p.coords();
    let area = s.inner(q, x, x) * s.inner(q, &phi_x, &phi_x) - s.inner(q, x, &phi_x).powi(2);
    Ok(s.inner(q, &r, x) / area)
}

/// Where the Reeb flow lives and how points are returned to it.
pub enum FlowContext<'a> {
    Sphere(&'a SasakianStructure),
    LevelSet { structure: &'a SasakianStructure, action: &'a crate::torus::TorusAction, mu: &'a MomentumCovector },
}

impl FlowContext<'_> {
    fn structure(&self) -> &SasakianStructure {
        match self {
            FlowContext::Sphere(s) => s,
            FlowContext::LevelSet { structure, .. } => structure,
        }
    }

    fn reproject(&self, z: &[f64]) -> Result<Vec<f64>> {
        match self {
            FlowContext::Sphere(_) => Ok(linalg::normalize(z)),
            FlowContext::LevelSet { action, mu, .. } => Ok(crate::reduction::newton_project(action, mu, z)?.point),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

/// Classical RK4 for the Reeb field with reprojection after every step.
pub fn reeb_flow(context: &FlowContext<'_>, z0: &[f64], t_max: f64, steps: usize) -> Result<Trajectory> {
    if steps == 0 {
        return Err(GeometryError::InvalidInput("steps must be positive".into()));
    }
    let s = context.structure();
    let f = |z: &[f64]| s.reeb(z);
    let h = t_max / steps as f64;
    let mut z = context.reproject(z0)?;
    let mut times = vec![0.0];
    let mut points = vec![z.clone()];
    for i in 0..steps {
        let k1 = f(&z);
        let k2 = f(&step(&z, &k1, h / 2.0));
        let k3 = f(&step(&z, &k2, h / 2.0));
        let k4 = f(&step(&z, &k3, h));
        let mut next = z.clone();
        for j in 0..z.len() {
            next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        z = context.reproject(&next)?;
        times.push((i + 1) as f64 * h);
        points.push(z.clone());
    }
    Ok(Trajectory { times, points })
}

fn step(z: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    let mut out = z.to_vec();
    axpy(h, k, &mut out);
    out
}

/// Reduced coordinates of the weighted example: `w = z₀^{λ₁} z₁^{λ₀}` with
/// continuously unwrapped phases, followed by `(z₂, z₃)`.
pub fn example4_coordinates(lambda: [f64; 2], trajectory: &Trajectory) -> Vec<([f64; 2], [f64; 4])> {
    let mut out = Vec::with_capacity(trajectory.points.len());
    let mut prev: Option<(f64, f64)> = None;
    for z in &trajectory.points {
        let (mut t0, mut t1) = (z[1].atan2(z[0]), z[3].atan2(z[2]));
        if let Some((p0, p1)) = prev {
            t0 = unwrap(p0, t0);
            t1 = unwrap(p1, t1);
        }
        prev = Some((t0, t1));
        let r = (z[0].hypot(z[1])).powf(lambda[1]) * (z[2].hypot(z[3])).powf(lambda[0]);
        let theta = lambda[1] * t0 + lambda[0] * t1;
        out.push(([r * theta.cos(), r * theta.sin()], [z[4], z[5], z[6], z[7]]));
    }
    out
}

fn unwrap(prev: f64, next: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    next + tau * ((prev - next) / tau).round()
}

/// Closed-form flow `(A e^{i(a+bt)}, R(t)Z)` of the weighted example.
pub fn example4_closed_form(lambda: [f64; 2], z0: &[f64], t: f64) -> ([f64; 2], [f64; 4]) {
    let amp = (z0[0].hypot(z0[1])).powf(lambda[1]) * (z0[2].hypot(z0[3])).powf(lambda[0]);
    let a = lambda[1] * z0[1].atan2(z0[0]) + lambda[0] * z0[3].atan2(z0[2]);
    let b = lambda[1] + lambda[0];
    let w = [amp * (a + b * t).cos(), amp * (a + b * t).sin()];
    let (c, s) = (t.cos(), t.sin());
    let rot = [c * z0[4] - s * z0[5], s * z0[4] + c * z0[5], c * z0[6] - s * z0[7], s * z0[6] + c * z0[7]];
    (w, rot)
}

/// Sup distance between the integrated and closed-form reduced flows.
pub fn example4_flow_deviation(lambda: [f64; 2], trajectory: &Trajectory) -> f64 {
    let z0 = &trajectory.points[0];
    example4_coordinates(lambda, trajectory)
        .iter()
        .zip(&trajectory.times)
        .map(|((w, r), t)| {
            let (we, re) = example4_closed_form(lambda, z0, *t);
            let dw = ((w[0] - we[0]).powi(2) + (w[1] - we[1]).powi(2)).sqrt();
            let dr = norm_f(&sub(r, &re));
            dw.max(dr)
        })
        .fold(0.0, f64::max)
}

/// `max_t ‖z(t) − e^{it}z₀‖` for a trajectory of the round Reeb flow.
pub fn sphere_flow_deviation(trajectory: &Trajectory) -> f64 {
    let z0 = &trajectory.points[0];
    trajectory
        .points
        .iter()
        .zip(&trajectory.times)
        .map(|(z, t)| {
            let (c, s) = (t.cos(), t.sin());
            let iz = linalg::complex_mult(z0);
            let expected: Vec<f64> = z0.iter().zip(&iz).map(|(a, b)| c * a + s * b).collect();
            norm_f(&sub(z, &expected))
        })
        .fold(0.0, f64::max)
}

/// First-Bianchi residual of `R^P` on horizontal vectors.
pub fn bianchi_residual(geo: &QuotientGeometry<'_>, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> Result<f64> {
    Ok((geo.r_p(x, y, z, w)? + geo.r_p(y, z, x, w)? + geo.r_p(z, x, y, w)?).abs())
}
