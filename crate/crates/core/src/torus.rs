//! Torus actions on `S^{2n−1}` given by a `d×n` weight matrix `W`:
//! `(t, z) ↦ (e^{i⟨w_1, t⟩} z₁, …, e^{i⟨w_n, t⟩} zₙ)` where `w_j` is column `j`.

use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::jet::Scalar;
use crate::linalg::{self, dot, norm_f};
use crate::tensor::VectorField;
use crate::tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusAction {
    weights: Vec<Vec<f64>>,
}

impl TorusAction {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let n = weights.first().map_or(0, |r| r.len());
        if weights.is_empty() || n == 0 {
            return Err(GeometryError::InvalidInput("weight matrix must be nonempty".into()));
        }
        if weights.iter().any(|r| r.len() != n) {
            return Err(GeometryError::InvalidInput("weight matrix rows differ in length".into()));
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(GeometryError::InvalidInput("weights must be finite".into()));
        }
        Ok(TorusAction { weights })
    }

    /// Torus dimension.
    pub fn d(&self) -> usize {
        self.weights.len()
    }

    /// Complex dimension of the ambient space.
    pub fn n(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// True when every weight is an integer, i.e. the action factors through
    /// a genuine torus.
    pub fn is_integral(&self) -> bool {
        self.weights.iter().flatten().all(|w| w.fract() == 0.0)
    }

    /// Combined weights `Σ_k r_k W_kj`.
    pub fn combined_weights(&self, r: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|j| r.iter().zip(&self.weights).map(|(rk, row)| rk * row[j]).sum()).collect()
    }

    /// Fundamental field of `r ∈ ℝ^d`: component `j` is `i·(Σ_k r_k W_kj)·z_j`.
    pub fn fundamental_at<T: Scalar>(&self, r: &[f64], q: &[T]) -> Vec<T> {
        let c = self.combined_weights(r);
        let mut out = Vec::with_capacity(q.len());
        for (cj, pair) in c.iter().zip(q.chunks_exact(2)) {
            out.push((-pair[1]).scale(*cj));
            out.push(pair[0].scale(*cj));
        }
        out
    }

    pub fn fundamental_field(&self, r: &[f64], p: &[f64]) -> Vec<f64> {
        self.fundamental_at(r, p)
    }

    pub fn field(&self, r: &[f64]) -> FundamentalField<'_> {
        FundamentalField { action: self, r: r.to_vec() }
    }

    /// `J_k = Σ_j W_kj |z_j|²`.
    pub fn momentum_at<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let moduli: Vec<T> = q.chunks_exact(2).map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        self.weights
            .iter()
            .map(|row| {
                let mut s = T::zero();
                for (w, m) in row.iter().zip(&moduli) {
                    s += m.scale(*w);
                }
                s
            })
            .collect()
    }

    pub fn momentum(&self, p: &[f64]) -> Vec<f64> {
        self.momentum_at(p)
    }

    /// Momentum as a linear function of the squared moduli `t_j = |z_j|²`.
    pub fn momentum_of_moduli(&self, t: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|row| dot(row, t)).collect()
    }

    /// Ambient gradients of the components `J_k` (rows `2W_kj(x_j, y_j)`).
    pub fn momentum_differential(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.weights
            .iter()
            .map(|row| {
                let mut g = Vec::with_capacity(p.len());
                for (w, pair) in row.iter().zip(p.chunks_exact(2)) {
                    g.push(2.0 * w * pair[0]);
                    g.push(2.0 * w * pair[1]);
                }
                g
            })
            .collect()
    }

    /// The subtorus action generated by the given Lie-algebra vectors, with
    /// weight matrix `B·W`.
    pub fn restricted(&self, basis: &[Vec<f64>]) -> Result<TorusAction> {
        let rows = basis.iter().map(|b| self.combined_weights(b)).collect();
        TorusAction::new(rows)
    }
}

/// The fundamental field of a fixed Lie-algebra element.
pub struct FundamentalField<'a> {
    pub action: &'a TorusAction,
    pub r: Vec<f64>,
}

impl VectorField for FundamentalField<'_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        self.action.fundamental_at(&self.r, q)
    }
}

/// A nonzero element of `𝔱*` with its normalized copy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentumCovector {
    pub mu: Vec<f64>,
    pub unit: Vec<f64>,
}

impl MomentumCovector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        let r = norm_f(&mu);
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::InvalidInput("mu must be finite".into()));
        }
        if r == 0.0 {
            return Err(GeometryError::ZeroMu);
        }
        let unit = linalg::scale(1.0 / r, &mu);
        Ok(MomentumCovector { mu, unit })
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }
}

/// Orthonormal basis of `𝔨_μ = ker μ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelAlgebra {
    pub basis: Vec<Vec<f64>>,
}

impl KernelAlgebra {
    pub fn k(&self) -> usize {
        self.basis.len()
    }
}

/// Gram–Schmidt of the standard basis with `μ̂` projected out. Each vector is
/// signed so that its last significant component is positive.
pub fn kernel_algebra(mu: &[f64]) -> Result<KernelAlgebra> {
    let m = MomentumCovector::new(mu.to_vec())?;
    let d = m.d();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        linalg::axpy(-m.unit[i], &m.unit, &mut v);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                linalg::axpy(-c, b, &mut v);
            }
        }
        let nv = norm_f(&v);
        if nv > tolerances::GS_DROP {
            let mut v = linalg::scale(1.0 / nv, &v);
            if let Some(last) = v.iter().rev().find(|x| x.abs() > 1e-12) {
                if *last < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            basis.push(v);
        }
    }
    Ok(KernelAlgebra { basis })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceReport {
    pub holds: bool,
    pub rank: usize,
    pub note: String,
}

/// `ker μ + 𝔤_μ = 𝔤`. For a torus `𝔤_μ = 𝔤`; the rank of the stacked bases
/// is still computed.
pub fn slice_condition(mu: &[f64]) -> SliceReport {
    let d = mu.len();
    let mut rows: Vec<Vec<f64>> = match kernel_algebra(mu) {
        Ok(k) => k.basis,
        Err(_) => Vec::new(),
    };
    // 𝔤_μ = 𝔤 for an abelian algebra.
    rows.extend((0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }));
    let sv = linalg::singular_values(&linalg::rows_to_matrix(&rows, d));
    let rank = linalg::rank_of(&sv, tolerances::RANK_REL);
    SliceReport { holds: rank == d, rank, note: "abelian: the isotropy algebra is the whole algebra".into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RayClass {
    OnPositiveRay { s: f64 },
    OnZero,
    OnNegativeRay { s: f64 },
    Outside { residual: f64 },
}

/// Classifies `J` relative to the line `ℝμ` by the least-squares parameter
/// `s = ⟨J, μ⟩/|μ|²`. On the negative ray the reported `s` is `|s|`.
pub fn ray_membership(j: &[f64], mu: &[f64], tol: f64) -> RayClass {
    let mm = dot(mu, mu);
    let s = dot(j, mu) / mm;
    let mut resid = j.to_vec();
    linalg::axpy(-s, mu, &mut resid);
    let residual = norm_f(&resid);
    if !(residual < tol) {
        RayClass::Outside { residual }
    } else if s.abs() * mm.sqrt() < tol {
        RayClass::OnZero
    } else if s > 0.0 {
        RayClass::OnPositiveRay { s }
    } else {
        RayClass::OnNegativeRay { s: -s }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreenessReport {
    pub rank: usize,
    pub expected: usize,
    pub degenerate: bool,
    pub singular_values: Vec<f64>,
}

/// Rank of the `𝔨_μ` fundamental fields at `p`.
pub fn local_freeness(action: &TorusAction, kernel: &KernelAlgebra, p: &[f64]) -> FreenessReport {
    let fields: Vec<Vec<f64>> = kernel.basis.iter().map(|b| action.fundamental_field(b, p)).collect();
    let sv = linalg::singular_values(&linalg::rows_to_matrix(&fields, p.len()));
    let rank = linalg::rank_of(&sv, tolerances::RANK_REL);
    FreenessReport { rank, expected: kernel.k(), degenerate: rank < kernel.k(), singular_values: sv }
}
