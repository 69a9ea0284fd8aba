//! The Kähler cone `C(M) = M × ℝ₊` with metric `r²g + dr²`, the lifted
//! momentum map and the stratification of `Φ⁻¹(0)`.
//!
//! The cone is identified with `ℝ^{2n} ∖ 0` through `x = r·p`. The symplectic
//! potential is `λ = r²η`, the symplectic form is `dλ` and the momentum map
//! `J_s(p, r) = r²J(p)` satisfies `ι_{X_M} dλ + d⟨J_s, X⟩ = 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::jet::{lift, Dual, Scalar};
use crate::linalg::{self, axpy, dot};
use crate::reduction::Submersion;
use crate::sasakian::SasakianStructure;
use crate::tensor::{ambient_derivative, exterior_derivative, AmbientPoint, Metric};
use crate::tolerances;
use crate::torus::{kernel_algebra, ray_membership, MomentumCovector, RayClass, TorusAction};

#[derive(Clone, Debug, PartialEq)]
pub struct ConePoint {
    pub base: AmbientPoint,
    pub r: f64,
}

impl ConePoint {
    pub fn new(base: AmbientPoint, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 1e-12) {
            return Err(GeometryError::InvalidInput(format!("cone radius must exceed 1e-12, got {r}")));
        }
        Ok(ConePoint { base, r })
    }

    /// `x = r·p` in `ℝ^{2n}`.
    pub fn ambient(&self) -> Vec<f64> {
        linalg::scale(self.r, self.base.coords())
    }

    /// Inverse of [`ConePoint::ambient`].
    pub fn from_ambient(x: &[f64]) -> Result<Self> {
        let r = linalg::norm(x);
        ConePoint::new(AmbientPoint::normalized(x)?, r)
    }
}

/// `r²·g(X,Y) + ρσ`.
pub fn cone_metric<M: Metric>(metric: &M, cp: &ConePoint, x: (&[f64], f64), y: (&[f64], f64)) -> f64 {
    cp.r * cp.r * metric.inner(cp.base.coords(), x.0, y.0) + x.1 * y.1
}

/// `J_s(p, r) = r²·J(p)`.
pub fn symplectic_momentum(action: &TorusAction, cp: &ConePoint) -> Vec<f64> {
    let r2 = cp.r * cp.r;
    action.momentum(cp.base.coords()).into_iter().map(|j| r2 * j).collect()
}

/// `λ_x = r²·η_p ∘ dp` as an ambient covector.
fn potential<T: Scalar>(s: &SasakianStructure, x: &[T]) -> Vec<T> {
    let r = dot(x, x).sqrt();
    let p = linalg::scale(r.recip(), x);
    let mut cov = s.eta_covector(&p);
    let c = dot(&cov, &p);
    axpy(-c, &p, &mut cov);
    linalg::scale(r, &cov)
}

/// `|dλ(X_M, v) + d⟨J_s, e⟩(v)|` at `x` for the generator `e`.
pub fn symplectic_oracle_residual(s: &SasakianStructure, action: &TorusAction, cp: &ConePoint, e: &[f64], v: &[f64]) -> f64 {
    let x = cp.ambient();
    let xm = action.fundamental_field(e, &x);
    let omega = exterior_derivative(|q: &[Dual<f64>]| potential(s, q), &x, &xm, v);
    let pairing = |q: &[Dual<f64>]| {
        let r2 = dot(q, q);
        let p = linalg::scale(r2.sqrt().recip(), q);
        let j = action.momentum_at(&p);
        vec![dot(&j, &lift::<Dual<f64>>(e)) * r2]
    };
    let dj = ambient_derivative(&x, v, pairing)[0];
    (omega + dj).abs()
}

/// `Φ = ιᵗ∘J_s`: pairing with the kernel basis.
pub fn phi(action: &TorusAction, basis: &[Vec<f64>], cp: &ConePoint) -> Vec<f64> {
    let js = symplectic_momentum(action, cp);
    basis.iter().map(|b| dot(b, &js)).collect()
}

/// Max difference between `ιᵗ∘J_s` and the momentum of the restricted action.
pub fn iota_transpose_check(action: &TorusAction, mu: &MomentumCovector, cp: &ConePoint) -> Result<f64> {
    let kernel = kernel_algebra(&mu.mu)?;
    let a = phi(action, &kernel.basis, cp);
    if kernel.k() == 0 {
        return Ok(0.0);
    }
    let restricted = action.restricted(&kernel.basis)?;
    let b = symplectic_momentum(&restricted, cp);
    Ok(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumLabel {
    PositiveStratum,
    ZeroStratum,
    NegativeStratum,
}

pub fn classify(j: &[f64], mu: &[f64], tol: f64) -> Result<StratumLabel> {
    match ray_membership(j, mu, tol) {
        RayClass::OnPositiveRay { .. } => Ok(StratumLabel::PositiveStratum),
        RayClass::OnZero => Ok(StratumLabel::ZeroStratum),
        RayClass::OnNegativeRay { .. } => Ok(StratumLabel::NegativeStratum),
        RayClass::Outside { residual } => Err(GeometryError::StratificationLeak { residual }),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StratumCensus {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    pub labels: Vec<StratumLabel>,
}

impl StratumCensus {
    pub fn total(&self) -> usize {
        self.positive + self.zero + self.negative
    }

    pub fn all_strata_present(&self) -> bool {
        self.positive > 0 && self.zero > 0 && self.negative > 0
    }
}

/// Labels each `Φ`-zero base point by the ray class of `J`.
pub fn stratify(action: &TorusAction, mu: &MomentumCovector, samples: &[Vec<f64>]) -> Result<StratumCensus> {
    let labels = samples
        .par_iter()
        .map(|p| classify(&action.momentum(p), &mu.mu, tolerances::RAY))
        .collect::<Result<Vec<_>>>()?;
    let count = |l: StratumLabel| labels.iter().filter(|x| **x == l).count();
    Ok(StratumCensus {
        positive: count(StratumLabel::PositiveStratum),
        zero: count(StratumLabel::ZeroStratum),
        negative: count(StratumLabel::NegativeStratum),
        labels,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub contact_dim: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub antisymmetry: f64,
}

/// Kernel dimension of `dη` on the horizontal contact directions of `N`.
pub fn contact_degeneracy(setup: &Submersion, p: &[f64]) -> Result<DegeneracyReport> {
    let frame = setup.frame(p)?;
    let s = &setup.structure;
    let c = &frame.contact.vectors;
    let k = c.len();
    let m = nalgebra::DMatrix::from_fn(k, k, |a, b| s.d_eta(p, &c[a], &c[b]));
    let antisymmetry = (&m + m.transpose()).abs().max();
    let rank = if k == 0 { 0 } else { linalg::rank_of(&linalg::singular_values(&m), tolerances::RANK_REL) };
    Ok(DegeneracyReport { contact_dim: k, rank, kernel_dim: k - rank, antisymmetry })
}

/// [`contact_degeneracy`] on the zero stratum `J⁻¹(0)` modulo `K_μ`.
pub fn zero_stratum_degeneracy(s: &SasakianStructure, action: &TorusAction, mu: &MomentumCovector, p: &[f64]) -> Result<DegeneracyReport> {
    let rows = (0..action.d())
        .map(|i| {
            let mut e = vec![0.0; action.d()];
            e[i] = 1.0;
            e
        })
        .collect();
    let kernel = kernel_algebra(&mu.mu)?;
    let setup = Submersion::for_rows(s, action, rows, kernel.basis)?;
    contact_degeneracy(&setup, p)
}

/// `Φ_s(x) = 0 ⇔ Φ(p) = 0` for a cone point, returned as the pair of tests.
pub fn cone_zero_consistency(action: &TorusAction, basis: &[Vec<f64>], cp: &ConePoint, tol: f64) -> (bool, bool) {
    let upstairs = phi(action, basis, cp).iter().all(|v| v.abs() < tol * cp.r * cp.r);
    let base = ConePoint { base: cp.base.clone(), r: 1.0 };
    let downstairs = phi(action, basis, &base).iter().all(|v| v.abs() < tol);
    (upstairs, downstairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::reduction::{MomentSampler, Target};
    use crate::tensor::EuclideanMetric;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ex1() -> TorusAction {
        TorusAction::new(vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]).unwrap()
    }

    fn ex2() -> TorusAction {
        TorusAction::new(vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]).unwrap()
    }

    fn e0() -> AmbientPoint {
        AmbientPoint::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn apex_is_excluded() {
        assert!(ConePoint::new(e0(), 0.0).is_err());
        assert!(ConePoint::new(e0(), 1e-13).is_err());
    }

    #[test]
    fn cone_metric_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = AmbientPoint::new(random::random_unit(&mut rng, 8)).unwrap();
        let x = random::random_tangent(&mut rng, p.coords());
        let y = random::random_tangent(&mut rng, p.coords());
        let one = ConePoint::new(p.clone(), 1.0).unwrap();
        let two = ConePoint::new(p.clone(), 2.0).unwrap();
        let g = dot(&x, &y);
        assert_eq!(cone_metric(&EuclideanMetric, &one, (&x, 0.0), (&y, 0.0)), g);
        assert_eq!(cone_metric(&EuclideanMetric, &one, (&[0.0; 8], 1.5), (&[0.0; 8], 2.0)), 3.0);
        assert!((cone_metric(&EuclideanMetric, &two, (&x, 0.0), (&y, 0.0)) - 4.0 * g).abs() < 1e-15);
    }

    #[test]
    fn symplectic_momentum_examples() {
        let a = ex1();
        assert_eq!(symplectic_momentum(&a, &ConePoint::new(e0(), 2.0).unwrap()), vec![4.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = AmbientPoint::new(random::random_unit(&mut rng, 8)).unwrap();
        assert_eq!(symplectic_momentum(&a, &ConePoint::new(p.clone(), 1.0).unwrap()), a.momentum(p.coords()));
    }

    #[test]
    fn momentum_convention_matches_symplectic_form() {
        let s = SasakianStructure::round(4).unwrap();
        let a = ex2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = AmbientPoint::new(random::random_unit(&mut rng, 8)).unwrap();
            let cp = ConePoint::new(p, rng.random_range(0.5..3.0)).unwrap();
            let v = random::gaussian_vector(&mut rng, 8);
            let e = random::gaussian_vector(&mut rng, 2);
            assert!(symplectic_oracle_residual(&s, &a, &cp, &e, &v) < 1e-10);
        }
    }

    #[test]
    fn momentum_is_invariant_along_orbits() {
        let a = ex1();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = linalg::scale(1.7, &random::random_unit(&mut rng, 8));
        for k in 0..2 {
            let mut e = vec![0.0; 2];
            e[k] = 1.0;
            let xm = a.fundamental_field(&e, &x);
            for l in 0..2 {
                let d = ambient_derivative(&x, &xm, |q: &[Dual<f64>]| vec![a.momentum_at(q)[l]])[0];
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn iota_transpose_examples() {
        let a = ex1();
        let mu = MomentumCovector::new(vec![1.0, 1.0]).unwrap();
        let cp = ConePoint::new(e0(), 1.0).unwrap();
        let k = kernel_algebra(&mu.mu).unwrap();
        let v = phi(&a, &k.basis, &cp);
        assert!((v[0] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(iota_transpose_check(&a, &mu, &cp).unwrap() < 1e-12);
        let p = crate::reduction::sample_level_set(&a, &mu, 1, 0).unwrap().remove(0).point;
        let on = ConePoint::new(AmbientPoint::new(p).unwrap(), 1.0).unwrap();
        assert!(phi(&a, &k.basis, &on)[0].abs() < 1e-10);
    }

    #[test]
    fn example2_strata() {
        let a = ex2();
        let mu = MomentumCovector::new(vec![1.0, 0.0]).unwrap();
        let pts = vec![
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            linalg::normalize(&[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ];
        let c = stratify(&a, &mu, &pts).unwrap();
        assert_eq!(
            c.labels,
            vec![StratumLabel::PositiveStratum, StratumLabel::NegativeStratum, StratumLabel::ZeroStratum]
        );
        assert!(c.all_strata_present());
        let leak = vec![linalg::normalize(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])];
        assert!(matches!(stratify(&a, &mu, &leak), Err(GeometryError::StratificationLeak { .. })));
    }

    #[test]
    fn stratification_is_invariant_under_momentum_rescaling() {
        let a = ex2();
        let mu = MomentumCovector::new(vec![1.0, 0.0]).unwrap();
        let pts = MomentSampler::new(&a, &mu, Target::KernelZero).unwrap().sample(50, 7).unwrap();
        for p in &pts {
            let j = a.momentum(p);
            let half = linalg::scale(0.5, &j);
            assert_eq!(classify(&j, &mu.mu, 1e-9).unwrap(), classify(&half, &mu.mu, 1e-9).unwrap());
        }
    }

    #[test]
    fn zero_stratum_is_not_contact() {
        let s = SasakianStructure::round(4).unwrap();
        let a = ex2();
        let mu = MomentumCovector::new(vec![1.0, 0.0]).unwrap();
        let p = MomentSampler::new(&a, &mu, Target::ZeroMomentum).unwrap().sample_one(5, 0).unwrap();
        let r = zero_stratum_degeneracy(&s, &a, &mu, &p).unwrap();
        assert!(r.kernel_dim >= 1, "{r:?}");
        assert!(r.antisymmetry < 1e-10);

        let mu1 = MomentumCovector::new(vec![1.0, 1.0]).unwrap();
        let a1 = ex1();
        let setup = Submersion::for_ray(&s, &a1, &mu1).unwrap();
        let q = crate::reduction::sample_level_set(&a1, &mu1, 1, 3).unwrap().remove(0).point;
        let r = contact_degeneracy(&setup, &q).unwrap();
        assert_eq!((r.contact_dim, r.kernel_dim), (4, 0));
    }

    #[test]
    fn cone_zero_set_is_a_cone() {
        let a = ex2();
        let mu = MomentumCovector::new(vec![1.0, 0.0]).unwrap();
        let k = kernel_algebra(&mu.mu).unwrap();
        let pts = MomentSampler::new(&a, &mu, Target::KernelZero).unwrap().sample(20, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in pts {
            let cp = ConePoint::new(AmbientPoint::new(p).unwrap(), rng.random_range(0.1..10.0)).unwrap();
            assert_eq!(cone_zero_consistency(&a, &k.basis, &cp, 1e-9), (true, true));
        }
        let off = ConePoint::new(AmbientPoint::new(random::random_unit(&mut rng, 8)).unwrap(), 3.0).unwrap();
        assert_eq!(cone_zero_consistency(&a, &k.basis, &off, 1e-9), (false, false));
    }
}
