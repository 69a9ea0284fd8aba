//! Reduction along `J⁻¹(ℝ₊μ)` by the kernel torus `K_μ`.
//!
//! Points of the level set are sampled moduli-first: the squared moduli
//! `t_j = |z_j|²` range over a polytope cut from the simplex by linear
//! momentum constraints, phases are uniform. Every sample is then polished by
//! Gauss–Newton onto the exact constraint set.
//!
//! The quotient is never given coordinates. A [`Submersion`] describes the
//! submanifold `N` (sphere plus momentum and coordinate constraints) and the
//! vertical generators; at each point it yields frames for the vertical,
//! Reeb, contact-horizontal and normal directions, and the generic
//! projections used to extend vectors to fields.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::jet::{lift, Scalar};
use crate::linalg::{self, axpy, cholesky_solve, dot, norm_f};
use crate::sasakian::SasakianStructure;
use crate::tensor::{self, covariant_derivative, extend_orthonormal, project, raise_index, Frame, Metric, VectorField};
use crate::tolerances;
use crate::torus::{self, kernel_algebra, local_freeness, FreenessReport, MomentumCovector, TorusAction};

/// A point of `J⁻¹(ℝ₊μ)` with `J(point) = s·μ̂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSetSample {
    pub point: Vec<f64>,
    pub s: f64,
}

/// The constraint set a sampler targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    PositiveRay,
    NegativeRay,
    /// `J = 0`.
    ZeroMomentum,
    /// `J ∈ ℝμ`, i.e. the zero set of the kernel momentum.
    KernelZero,
}

/// Moduli-first sampler for sets `{E·J = 0, ±⟨μ̂, J⟩ > 0}`.
#[derive(Clone, Debug)]
pub struct MomentSampler {
    action: TorusAction,
    rows: Vec<Vec<f64>>,
    ray: Option<Vec<f64>>,
    anchors: Vec<Vec<f64>>,
    forced_zero: Vec<bool>,
    max_ray: Option<f64>,
}

fn lp_solve(ew: &[Vec<f64>], objective: &[f64], ray_floor: Option<&[f64]>) -> std::result::Result<(f64, Vec<f64>), minilp::Error> {
    let n = objective.len();
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = objective.iter().map(|&c| pb.add_var(c, (0.0, 1.0))).collect();
    let all: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    pb.add_constraint(&all, ComparisonOp::Eq, 1.0);
    for row in ew {
        let terms: Vec<_> = vars.iter().zip(row).filter(|(_, c)| **c != 0.0).map(|(&v, &c)| (v, c)).collect();
        if !terms.is_empty() {
            pb.add_constraint(&terms, ComparisonOp::Eq, 0.0);
        }
    }
    if let Some(c) = ray_floor {
        let terms: Vec<_> = vars.iter().zip(c).filter(|(_, c)| **c != 0.0).map(|(&v, &c)| (v, c)).collect();
        if !terms.is_empty() {
            pb.add_constraint(&terms, ComparisonOp::Ge, 0.0);
        }
    }
    let sol = pb.solve()?;
    let t = (0..n).map(|j| sol[vars[j]]).collect();
    Ok((sol.objective(), t))
}

impl MomentSampler {
    /// Sampler for one of the standard targets attached to `μ`.
    pub fn new(action: &TorusAction, mu: &MomentumCovector, target: Target) -> Result<Self> {
        let d = action.d();
        if mu.d() != d {
            return Err(GeometryError::InvalidInput(format!("mu has {} entries, torus dimension is {d}", mu.d())));
        }
        let kernel = kernel_algebra(&mu.mu)?;
        let (rows, ray) = match target {
            Target::PositiveRay => (kernel.basis, Some(mu.unit.clone())),
            Target::NegativeRay => (kernel.basis, Some(linalg::scale(-1.0, &mu.unit))),
            Target::KernelZero => (kernel.basis, None),
            Target::ZeroMomentum => (identity(d), None),
        };
        MomentSampler::with_rows(action, rows, ray)
    }

    /// Sampler for `{E·J = 0}` with an optional strict ray condition
    /// `⟨u, J⟩ > 0`.
    pub fn with_rows(action: &TorusAction, rows: Vec<Vec<f64>>, ray: Option<Vec<f64>>) -> Result<Self> {
        let n = action.n();
        let ew: Vec<Vec<f64>> = rows.iter().map(|e| action.combined_weights(e)).collect();
        let c: Option<Vec<f64>> = ray.as_ref().map(|u| action.combined_weights(u));
        let infeasible = |e: minilp::Error| GeometryError::EmptyLevelSet { certificate: format!("moduli polytope: {e}") };
        let mut anchors = Vec::new();
        let mut max_ray = None;
        if let Some(c) = &c {
            let (smax, t) = lp_solve(&ew, c, None).map_err(infeasible)?;
            if smax <= tolerances::MIN_RAY_PARAMETER {
                return Err(GeometryError::EmptyLevelSet {
                    certificate: format!("largest ray parameter on the moduli polytope is {smax:.3e}"),
                });
            }
            max_ray = Some(smax);
            anchors.push(t);
        }
        let mut forced_zero = vec![false; n];
        for j in 0..n {
            let mut obj = vec![0.0; n];
            obj[j] = 1.0;
            let (tmax, t) = lp_solve(&ew, &obj, c.as_deref()).map_err(infeasible)?;
            if tmax <= 1e-12 {
                forced_zero[j] = true;
            } else {
                anchors.push(t);
            }
        }
        Ok(MomentSampler { action: action.clone(), rows, ray, anchors, forced_zero, max_ray })
    }

    pub fn forced_zero(&self) -> &[bool] {
        &self.forced_zero
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Largest ray parameter on the polytope (ray targets only).
    pub fn max_ray(&self) -> Option<f64> {
        self.max_ray
    }

    fn raw_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let gamma = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
        let w: Vec<f64> = self.anchors.iter().map(|_| gamma.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        let n = self.action.n();
        let mut t = vec![0.0; n];
        for (wa, a) in w.iter().zip(&self.anchors) {
            axpy(wa / total, a, &mut t);
        }
        let mut z = Vec::with_capacity(2 * n);
        for j in 0..n {
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let r = if self.forced_zero[j] { 0.0 } else { t[j].max(0.0).sqrt() };
            z.push(r * theta.cos());
            z.push(r * theta.sin());
        }
        linalg::normalize(&z)
    }

    /// The `index`-th sample for `seed`, polished onto the constraint set.
    pub fn sample_one(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let z = self.raw_point(&mut rng);
        match &self.ray {
            Some(u) => newton_onto_ray(&self.action, u, &z).map(|s| s.point),
            None => project_onto_zero(&self.action, &self.rows, &z),
        }
    }

    /// `count` samples, deterministic in `seed` regardless of thread count.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        (0..count as u64).into_par_iter().map(|i| self.sample_one(seed, i)).collect()
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Level-set samples of `J⁻¹(ℝ₊μ)`.
pub fn sample_level_set(action: &TorusAction, mu: &MomentumCovector, count: usize, seed: u64) -> Result<Vec<LevelSetSample>> {
    let sampler = MomentSampler::new(action, mu, Target::PositiveRay)?;
    let points = sampler.sample(count, seed)?;
    Ok(points.into_iter().map(|p| LevelSetSample { s: dot(&action.momentum(&p), &mu.unit), point: p }).collect())
}

/// Minimum-norm Gauss–Newton iteration driving `residual` to zero.
fn gauss_newton<F>(mut x: Vec<f64>, system: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>),
{
    for it in 0..=tolerances::NEWTON_MAX_ITER {
        let (r, jac) = system(&x);
        let rn = norm_f(&r);
        if rn < tolerances::NEWTON {
            return Ok(x);
        }
        if it == tolerances::NEWTON_MAX_ITER || !rn.is_finite() {
            return Err(GeometryError::NoConvergence { iterations: it, residual: rn });
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
        let step = svd
            .solve(&DVector::from_vec(r), 1e-12 * smax.max(f64::MIN_POSITIVE))
            .map_err(|_| GeometryError::NoConvergence { iterations: it, residual: rn })?;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
    }
    unreachable!()
}

/// Newton projection onto `{|z|² = 1, E·J = 0, J = s·u}` with `s` unknown.
fn newton_onto_ray(action: &TorusAction, u: &[f64], q: &[f64]) -> Result<LevelSetSample> {
    let m = q.len();
    let d = action.d();
    let mut x = q.to_vec();
    x.push(dot(&action.momentum(q), u));
    let x = gauss_newton(x, |x| {
        let (z, s) = (&x[..m], x[m]);
        let j = action.momentum(z);
        let dj = action.momentum_differential(z);
        let mut r = vec![dot(z, z) - 1.0];
        r.extend((0..d).map(|k| j[k] - s * u[k]));
        let jac = DMatrix::from_fn(d + 1, m + 1, |row, col| match (row, col) {
            (0, c) if c < m => 2.0 * z[c],
            (0, _) => 0.0,
            (k, c) if c < m => dj[k - 1][c],
            (k, _) => -u[k - 1],
        });
        (r, jac)
    })?;
    let z = linalg::normalize(&x[..m]);
    let s = dot(&action.momentum(&z), u);
    if s <= tolerances::MIN_RAY_PARAMETER {
        return Err(GeometryError::WrongRay { s });
    }
    let mut resid = action.momentum(&z);
    axpy(-s, u, &mut resid);
    let rn = norm_f(&resid);
    if rn >= tolerances::LEVEL_SET {
        return Err(GeometryError::NoConvergence { iterations: tolerances::NEWTON_MAX_ITER, residual: rn });
    }
    Ok(LevelSetSample { point: z, s })
}

/// Newton projection onto `{|z|² = 1, E·J = 0}`.
fn project_onto_zero(action: &TorusAction, rows: &[Vec<f64>], q: &[f64]) -> Result<Vec<f64>> {
    let m = q.len();
    let x = gauss_newton(q.to_vec(), |z| {
        let j = action.momentum(z);
        let dj = action.momentum_differential(z);
        let mut r = vec![dot(z, z) - 1.0];
        r.extend(rows.iter().map(|e| dot(e, &j)));
        let jac = DMatrix::from_fn(rows.len() + 1, m, |row, col| {
            if row == 0 {
                2.0 * z[col]
            } else {
                rows[row - 1].iter().zip(&dj).map(|(e, g)| e * g[col]).sum()
            }
        });
        (r, jac)
    })?;
    Ok(linalg::normalize(&x))
}

/// Projects `q` onto `J⁻¹(ℝ₊μ)` with the ray parameter as an unknown.
pub fn newton_project(action: &TorusAction, mu: &MomentumCovector, q: &[f64]) -> Result<LevelSetSample> {
    if mu.d() != action.d() {
        return Err(GeometryError::InvalidInput("mu does not match the torus dimension".into()));
    }
    newton_onto_ray(action, &mu.unit, &linalg::normalize(q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub transverse: bool,
    pub singular_values: Vec<f64>,
}

/// Rank of `[dJ|_{T_pS} | μ̂]`; transverse when it equals `d`.
pub fn transversality_check(action: &TorusAction, mu: &MomentumCovector, p: &[f64]) -> TransversalityReport {
    let basis = linalg::sphere_tangent_basis(p);
    let dj = action.momentum_differential(p);
    let d = action.d();
    let cols = basis.len() + 1;
    let m = DMatrix::from_fn(d, cols, |k, a| if a < basis.len() { dot(&dj[k], &basis[a]) } else { mu.unit[k] });
    let sv = linalg::singular_values(&m);
    let transverse = sv.len() == d && sv.last().is_some_and(|s| *s > tolerances::RANK_REL);
    TransversalityReport { transverse, singular_values: sv }
}

/// `dim M − (d − 1) − k`.
pub fn quotient_dimension(dim_m: usize, d: usize, k: usize) -> usize {
    (dim_m + 1).saturating_sub(d + k)
}

/// The alternative count `2n − d − m − k + 1` for `dim M = 2n − 1`.
pub fn printed_dimension_formula(dim_m: usize, d: usize, m: usize, k: usize) -> i64 {
    (dim_m as i64 + 1) - d as i64 - m as i64 - k as i64 + 1
}

/// A normal covector of the constraint set.
#[derive(Clone, Debug, PartialEq)]
enum Row {
    /// `d⟨e, J⟩` for `e ∈ ℝ^d`, stored through its combined weights.
    Momentum(Vec<f64>),
    /// A constant ambient covector.
    Linear(Vec<f64>),
}

impl Row {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        match self {
            Row::Momentum(c) => {
                let mut out = Vec::with_capacity(q.len());
                for (cj, pair) in c.iter().zip(q.chunks_exact(2)) {
                    out.push(pair[0].scale(2.0 * cj));
                    out.push(pair[1].scale(2.0 * cj));
                }
                out
            }
            Row::Linear(v) => lift(v),
        }
    }
}

/// A submanifold `N ⊂ S^{2n−1}` cut out by momentum and coordinate
/// constraints, together with torus generators acting on it.
#[derive(Clone, Debug)]
pub struct Submersion {
    pub structure: SasakianStructure,
    pub action: TorusAction,
    /// `E`: constraints `E·J = 0`.
    pub momentum_rows: Vec<Vec<f64>>,
    /// Coordinates `j` with `z_j = 0` on `N`.
    pub forced_zero: Vec<bool>,
    /// Lie-algebra generators of the vertical distribution.
    pub generators: Vec<Vec<f64>>,
    /// The ray of `J⁻¹(ℝ₊μ)` when `N` is such a level set.
    pub mu: Option<MomentumCovector>,
}

impl Submersion {
    /// `J⁻¹(ℝ₊μ)` with vertical generators `𝔨_μ`.
    pub fn for_ray(structure: &SasakianStructure, action: &TorusAction, mu: &MomentumCovector) -> Result<Self> {
        check_dims(structure, action)?;
        let sampler = MomentSampler::new(action, mu, Target::PositiveRay)?;
        let kernel = kernel_algebra(&mu.mu)?;
        Ok(Submersion {
            structure: structure.clone(),
            action: action.clone(),
            momentum_rows: kernel.basis.clone(),
            forced_zero: sampler.forced_zero().to_vec(),
            generators: kernel.basis,
            mu: Some(mu.clone()),
        })
    }

    /// `{E·J = 0}` with arbitrary vertical generators; the forced-zero
    /// coordinates are read off the moduli polytope.
    pub fn for_rows(
        structure: &SasakianStructure,
        action: &TorusAction,
        rows: Vec<Vec<f64>>,
        generators: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_dims(structure, action)?;
        let sampler = MomentSampler::with_rows(action, rows.clone(), None)?;
        Ok(Submersion {
            structure: structure.clone(),
            action: action.clone(),
            momentum_rows: rows,
            forced_zero: sampler.forced_zero().to_vec(),
            generators,
            mu: None,
        })
    }

    pub fn dim_m(&self) -> usize {
        self.structure.dim()
    }

    /// Selects independent normal rows and the effective vertical
    /// generators at `p`.
    pub fn local(&self, p: &[f64]) -> Result<LocalSubmersion<'_>> {
        if p.len() != 2 * self.action.n() {
            return Err(GeometryError::InvalidInput("point dimension does not match the action".into()));
        }
        let mut candidates = Vec::new();
        for (j, z) in self.forced_zero.iter().enumerate() {
            if *z {
                for c in 0..2 {
                    let mut e = vec![0.0; p.len()];
                    e[2 * j + c] = 1.0;
                    candidates.push(Row::Linear(e));
                }
            }
        }
        for e in &self.momentum_rows {
            candidates.push(Row::Momentum(self.action.combined_weights(e)));
        }
        let mut kept: Vec<Vec<f64>> = vec![p.to_vec()];
        let mut rows = Vec::new();
        for row in candidates {
            let mut w = row.eval::<f64>(p);
            for _ in 0..2 {
                for k in &kept {
                    let c = dot(&w, k);
                    axpy(-c, k, &mut w);
                }
            }
            let nw = norm_f(&w);
            if nw > tolerances::RANK_REL {
                kept.push(linalg::scale(1.0 / nw, &w));
                rows.push(row);
            }
        }
        let fields: Vec<Vec<f64>> = self.generators.iter().map(|g| self.action.fundamental_field(g, p)).collect();
        let vertical_generators = effective_generators(&self.generators, &fields);
        Ok(LocalSubmersion { setup: self, point: p.to_vec(), rows, vertical_generators })
    }

    /// Frames at `p` without freeness or transversality requirements.
    pub fn frame(&self, p: &[f64]) -> Result<ReductionFrame> {
        self.local(p)?.frame()
    }

    /// Frames at a level-set sample, requiring transversality and a free
    /// kernel action.
    pub fn strict_frame(&self, sample: &LevelSetSample) -> Result<ReductionFrame> {
        let mu = self.mu.as_ref().ok_or_else(|| GeometryError::InvalidInput("strict frames need a ray".into()))?;
        let kernel = kernel_algebra(&mu.mu)?;
        let free = local_freeness(&self.action, &kernel, &sample.point);
        if free.degenerate {
            return Err(GeometryError::DegenerateAction { rank: free.rank, expected: free.expected });
        }
        let tr = transversality_check(&self.action, mu, &sample.point);
        if !tr.transverse {
            let smin = tr.singular_values.last().copied().unwrap_or(0.0);
            return Err(GeometryError::FrameInconsistent { what: "transversality (smallest singular value)".into(), value: smin });
        }
        let mut frame = self.frame(&sample.point)?;
        frame.s = Some(sample.s);
        check_frame(&self.structure, &frame)?;
        Ok(frame)
    }
}

fn check_dims(structure: &SasakianStructure, action: &TorusAction) -> Result<()> {
    if structure.n() != action.n() {
        return Err(GeometryError::InvalidInput(format!(
            "structure has n = {}, action has n = {}",
            structure.n(),
            action.n()
        )));
    }
    Ok(())
}

/// Generators whose fields span the orbit directions at the base point:
/// the originals when they are independent there, otherwise the combinations
/// along the nonzero singular directions.
fn effective_generators(generators: &[Vec<f64>], fields: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if generators.is_empty() {
        return Vec::new();
    }
    let dim = fields[0].len();
    let m = linalg::rows_to_matrix(fields, dim);
    let sv = linalg::singular_values(&m);
    let rank = linalg::rank_of(&sv, tolerances::RANK_REL);
    if rank == generators.len() {
        return generators.to_vec();
    }
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b)).max(1.0);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].partial_cmp(&svd.singular_values[*a]).unwrap());
    let g = generators[0].len();
    order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > tolerances::RANK_REL * smax)
        .map(|i| {
            let mut c = vec![0.0; g];
            for (l, gen) in generators.iter().enumerate() {
                axpy(u[(l, i)], gen, &mut c);
            }
            c
        })
        .collect()
}

/// Constraint and vertical data fixed at one base point; all methods are
/// generic so they can be differentiated.
pub struct LocalSubmersion<'a> {
    pub setup: &'a Submersion,
    pub point: Vec<f64>,
    rows: Vec<Row>,
    pub vertical_generators: Vec<Vec<f64>>,
}

impl LocalSubmersion<'_> {
    pub fn structure(&self) -> &SasakianStructure {
        &self.setup.structure
    }

    /// Codimension of `N` in the sphere.
    pub fn codim(&self) -> usize {
        self.rows.len()
    }

    pub fn tangent_dim(&self) -> usize {
        self.setup.dim_m() - self.codim()
    }

    pub fn rows_at<T: Scalar>(&self, q: &[T]) -> Vec<Vec<T>> {
        self.rows.iter().map(|r| r.eval(q)).collect()
    }

    /// Euclidean projection onto `T_qS ∩ ker(rows)`.
    pub fn tangent_n<T: Scalar>(&self, q: &[T], v: &[T]) -> Vec<T> {
        let u = project(q, v);
        if self.rows.is_empty() {
            return u;
        }
        let r: Vec<Vec<T>> = self.rows_at(q).iter().map(|row| project(q, row)).collect();
        let c = solve_gram(&r, |a, b| dot(a, b), &r.iter().map(|ri| dot(ri, &u)).collect::<Vec<_>>());
        let mut out = u;
        for (ci, ri) in c.iter().zip(&r) {
            axpy(-*ci, ri, &mut out);
        }
        out
    }

    pub fn vertical_at<T: Scalar>(&self, q: &[T]) -> Vec<Vec<T>> {
        self.vertical_generators.iter().map(|g| self.setup.action.fundamental_at(g, q)).collect()
    }

    /// Removes the vertical component `g`-orthogonally.
    pub fn horizontal<T: Scalar>(&self, q: &[T], v: &[T]) -> Vec<T> {
        if self.vertical_generators.is_empty() {
            return v.to_vec();
        }
        let g = self.structure();
        let x = self.vertical_at(q);
        let c = solve_gram(&x, |a, b| g.inner(q, a, b), &x.iter().map(|xi| g.inner(q, xi, v)).collect::<Vec<_>>());
        let mut out = v.to_vec();
        for (ci, xi) in c.iter().zip(&x) {
            axpy(-*ci, xi, &mut out);
        }
        out
    }

    /// `g`-normal vectors of `N` dual to the constraint rows.
    pub fn normal_fields<T: Scalar>(&self, q: &[T]) -> Vec<Vec<T>> {
        let g = self.structure();
        self.rows_at(q).iter().map(|r| raise_index(g, q, &project(q, r))).collect()
    }

    /// `g`-orthogonal projection of a tangent vector onto `T_qN`.
    pub fn project_n<T: Scalar>(&self, q: &[T], v: &[T]) -> Vec<T> {
        if self.rows.is_empty() {
            return v.to_vec();
        }
        let g = self.structure();
        let nf = self.normal_fields(q);
        let c = solve_gram(&nf, |a, b| g.inner(q, a, b), &nf.iter().map(|ni| g.inner(q, ni, v)).collect::<Vec<_>>());
        let mut out = v.to_vec();
        for (ci, ni) in c.iter().zip(&nf) {
            axpy(-*ci, ni, &mut out);
        }
        out
    }

    /// Levi-Civita derivative of `N` for tangent `x` and a field tangent to `N`.
    pub fn covariant_n<T: Scalar, F: VectorField>(&self, q: &[T], x: &[T], field: &F) -> Vec<T> {
        let d = covariant_derivative(self.structure(), q, x, field);
        self.project_n(q, &d)
    }

    /// Field extending a tangent vector of `N` tangentially to the level
    /// sets of the constraints.
    pub fn n_extension(&self, v: &[f64]) -> NExtension<'_, '_> {
        NExtension { local: self, v: v.to_vec() }
    }

    /// Field extending a horizontal vector horizontally.
    pub fn h_extension(&self, v: &[f64]) -> HExtension<'_, '_> {
        HExtension { local: self, v: v.to_vec() }
    }

    /// Euclidean orthonormal basis of `T_pN`.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        let p = &self.point;
        let mut stacked = vec![p.clone()];
        stacked.extend(self.rows_at::<f64>(p));
        linalg::null_space(&stacked, p.len(), tolerances::RANK_REL)
    }

    pub fn frame(&self) -> Result<ReductionFrame> {
        let p = &self.point;
        let s = self.structure();
        let tangent = self.tangent_basis();
        let fields = self.vertical_at::<f64>(p);
        let labels = |prefix: &str, k: usize| (0..k).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let vertical = extend_orthonormal(s, &Frame::empty(p), &fields, &labels("X", fields.len()));
        let xi = s.reeb(p);
        let reeb_frame = extend_orthonormal(s, &vertical, std::slice::from_ref(&xi), &["xi".to_string()]);
        let reeb = (!reeb_frame.is_empty()).then_some(xi);
        let mut upstairs = vertical.clone();
        upstairs.vectors.extend(reeb_frame.vectors.iter().cloned());
        let contact = extend_orthonormal(s, &upstairs, &tangent, &labels("D", tangent.len()));
        let phi_candidates: Vec<Vec<f64>> = vertical
            .vectors
            .iter()
            .map(|x| s.phi_at(p, x))
            .filter(|v| {
                let n = s.inner(p, v, v).sqrt();
                n > tolerances::GS_DROP && tangent.iter().all(|t| s.inner(p, v, t).abs() < tolerances::FRAME_BLOCKS * n.max(1.0))
            })
            .collect();
        let mut normal_candidates = phi_candidates.clone();
        normal_candidates.extend(self.normal_fields::<f64>(p));
        let mut normal_labels = labels("phiX", phi_candidates.len());
        normal_labels.extend(labels("n", self.rows.len()));
        let normal = extend_orthonormal(s, &Frame::empty(p), &normal_candidates, &normal_labels);
        Ok(ReductionFrame { point: p.clone(), s: None, tangent, vertical, reeb, contact, normal })
    }
}

/// Solves `G c = b` with `G_ij = inner(v_i, v_j)`.
fn solve_gram<T: Scalar>(vs: &[Vec<T>], inner: impl Fn(&[T], &[T]) -> T, b: &[T]) -> Vec<T> {
    let k = vs.len();
    let mut g = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in i..k {
            let v = inner(&vs[i], &vs[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    cholesky_solve(&g, b).unwrap_or_else(|| vec![T::cst(f64::NAN); k])
}

pub struct NExtension<'a, 'b> {
    local: &'a LocalSubmersion<'b>,
    v: Vec<f64>,
}

impl VectorField for NExtension<'_, '_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        self.local.tangent_n(q, &lift(&self.v))
    }
}

pub struct HExtension<'a, 'b> {
    local: &'a LocalSubmersion<'b>,
    v: Vec<f64>,
}

impl VectorField for HExtension<'_, '_> {
    fn eval<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let t = self.local.tangent_n(q, &lift(&self.v));
        self.local.horizontal(q, &t)
    }
}

/// Orthonormal frames adapted to `N` and its vertical distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionFrame {
    pub point: Vec<f64>,
    pub s: Option<f64>,
    /// Euclidean orthonormal basis of `T_pN`.
    pub tangent: Vec<Vec<f64>>,
    pub vertical: Frame,
    pub reeb: Option<Vec<f64>>,
    /// Horizontal directions in `Ker η`.
    pub contact: Frame,
    pub normal: Frame,
}

impl ReductionFrame {
    pub fn level_set_dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn quotient_dim(&self) -> usize {
        self.contact.len() + usize::from(self.reeb.is_some())
    }

    /// Contact frame followed by the Reeb vector.
    pub fn horizontal_basis(&self) -> Vec<Vec<f64>> {
        let mut out = self.contact.vectors.clone();
        if let Some(r) = &self.reeb {
            out.push(r.clone());
        }
        out
    }
}

/// Worst violation of each frame invariant.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FrameDiagnostics {
    pub orthonormality: f64,
    pub block_orthogonality: f64,
    pub normal_orthogonality: f64,
    pub eta_on_horizontal: f64,
    pub reeb_eta: f64,
    pub span_defect: usize,
}

pub fn frame_diagnostics(s: &SasakianStructure, frame: &ReductionFrame) -> FrameDiagnostics {
    let p = &frame.point;
    let mut all: Vec<Vec<f64>> = frame.vertical.vectors.clone();
    if let Some(r) = &frame.reeb {
        all.push(r.clone());
    }
    all.extend(frame.contact.vectors.iter().cloned());
    let mut diag = FrameDiagnostics::default();
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate().skip(i) {
            let g = s.inner(p, a, b);
            let target = if i == j { 1.0 } else { 0.0 };
            if i == j {
                diag.orthonormality = diag.orthonormality.max((g - target).abs());
            } else {
                diag.block_orthogonality = diag.block_orthogonality.max(g.abs());
            }
        }
    }
    diag.orthonormality = diag.orthonormality.max(frame.normal.orthonormality_defect(s));
    for nv in &frame.normal.vectors {
        for t in &frame.tangent {
            diag.normal_orthogonality = diag.normal_orthogonality.max(s.inner(p, nv, t).abs());
        }
    }
    let vertical: &[Vec<f64>] = if frame.reeb.is_some() { &frame.vertical.vectors } else { &[] };
    for v in vertical.iter().chain(&frame.contact.vectors) {
        diag.eta_on_horizontal = diag.eta_on_horizontal.max(s.eta(p, v).abs());
    }
    diag.reeb_eta = frame.reeb.as_ref().map_or(0.0, |r| (s.eta(p, r) - 1.0).abs());
    diag.span_defect = frame.tangent.len().abs_diff(all.len());
    diag
}

/// Fails with `FrameInconsistent` when an invariant is violated.
pub fn check_frame(s: &SasakianStructure, frame: &ReductionFrame) -> Result<FrameDiagnostics> {
    let d = frame_diagnostics(s, frame);
    let checks = [
        ("orthonormality", d.orthonormality, tolerances::FRAME_ORTHONORMAL),
        ("block orthogonality", d.block_orthogonality, tolerances::FRAME_BLOCKS),
        ("normal orthogonality", d.normal_orthogonality, tolerances::FRAME_BLOCKS),
        ("eta on vertical and contact blocks", d.eta_on_horizontal, tolerances::FRAME_BLOCKS),
        ("eta(reeb) - 1", d.reeb_eta, tolerances::FRAME_BLOCKS),
        ("span defect", d.span_defect as f64, 0.5),
    ];
    for (what, value, tol) in checks {
        if !(value < tol) {
            return Err(GeometryError::FrameInconsistent { what: what.into(), value });
        }
    }
    Ok(d)
}

/// Strict frame at a sample of `J⁻¹(ℝ₊μ)`.
pub fn build_frame(
    structure: &SasakianStructure,
    action: &TorusAction,
    mu: &MomentumCovector,
    sample: &LevelSetSample,
) -> Result<ReductionFrame> {
    Submersion::for_ray(structure, action, mu)?.strict_frame(sample)
}

/// Reduced tensors in the horizontal frame `{contact, reeb}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedPointData {
    pub metric_gram: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    pub d_eta: Vec<Vec<f64>>,
    pub d_eta_det: f64,
    pub eta_defect: f64,
    pub gram_defect: f64,
    pub antisymmetry: f64,
}

impl ReducedPointData {
    pub fn is_contact(&self) -> bool {
        self.d_eta_det > tolerances::REDUCED_CONTACT_DET
    }
}

pub fn reduced_tensors(s: &SasakianStructure, frame: &ReductionFrame) -> Result<ReducedPointData> {
    let p = &frame.point;
    let h = frame.horizontal_basis();
    let metric_gram: Vec<Vec<f64>> = h.iter().map(|a| h.iter().map(|b| s.inner(p, a, b)).collect()).collect();
    let eta: Vec<f64> = h.iter().map(|a| s.eta(p, a)).collect();
    let c = &frame.contact.vectors;
    let d_eta: Vec<Vec<f64>> = c.iter().map(|a| c.iter().map(|b| s.d_eta(p, a, b)).collect()).collect();
    let k = c.len();
    let det = DMatrix::from_fn(k, k, |i, j| d_eta[i][j]).determinant().abs();
    let mut eta_defect = 0.0f64;
    for (i, e) in eta.iter().enumerate() {
        let target = if frame.reeb.is_some() && i == h.len() - 1 { 1.0 } else { 0.0 };
        eta_defect = eta_defect.max((e - target).abs());
    }
    let mut gram_defect = 0.0f64;
    for (i, row) in metric_gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            gram_defect = gram_defect.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let mut antisymmetry = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            antisymmetry = antisymmetry.max((d_eta[i][j] + d_eta[j][i]).abs());
        }
    }
    for (what, value) in [("reduced eta", eta_defect), ("reduced metric", gram_defect)] {
        if !(value < tolerances::FRAME_BLOCKS) {
            return Err(GeometryError::FrameInconsistent { what: what.into(), value });
        }
    }
    Ok(ReducedPointData { metric_gram, eta, d_eta, d_eta_det: det, eta_defect, gram_defect, antisymmetry })
}

/// `max |dη(X_i, Z)|` over vertical `X_i` and tangent `Z`.
pub fn basic_residual(s: &SasakianStructure, frame: &ReductionFrame) -> f64 {
    let p = &frame.point;
    let mut worst = 0.0f64;
    for x in &frame.vertical.vectors {
        for z in &frame.tangent {
            worst = worst.max(s.d_eta(p, x, z).abs());
        }
    }
    worst
}

/// `max ‖[X_i, ξ]‖` over the vertical generators.
pub fn projectable_reeb_residual(setup: &Submersion, generators: &[Vec<f64>], p: &[f64]) -> f64 {
    let xi = crate::sasakian::ReebField(&setup.structure);
    generators
        .iter()
        .map(|g| norm_f(&tensor::bracket(&setup.action.field(g), &xi, p)))
        .fold(0.0, f64::max)
}

/// `max |dJ_k(X_i)|` over vertical vectors.
pub fn orbit_invariance_residual(action: &TorusAction, frame: &ReductionFrame) -> f64 {
    let dj = action.momentum_differential(&frame.point);
    let mut worst = 0.0f64;
    for x in &frame.vertical.vectors {
        for row in &dj {
            worst = worst.max(dot(row, x).abs());
        }
    }
    worst
}

/// Freeness of the kernel action at a sample.
pub fn freeness(action: &TorusAction, mu: &MomentumCovector, p: &[f64]) -> Result<FreenessReport> {
    Ok(local_freeness(action, &torus::kernel_algebra(&mu.mu)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{ray_membership, RayClass};

    fn ex1() -> TorusAction {
        TorusAction::new(vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]).unwrap()
    }

    fn ex2() -> TorusAction {
        TorusAction::new(vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]).unwrap()
    }

    fn ex3() -> TorusAction {
        TorusAction::new(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 1.0]]).unwrap()
    }

    fn mu(v: &[f64]) -> MomentumCovector {
        MomentumCovector::new(v.to_vec()).unwrap()
    }

    fn modulus2(p: &[f64], j: usize) -> f64 {
        p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1]
    }

    #[test]
    fn example1_level_set_is_product_of_spheres() {
        let samples = sample_level_set(&ex1(), &mu(&[1.0, 1.0]), 20, 1).unwrap();
        for s in &samples {
            assert!((modulus2(&s.point, 0) + modulus2(&s.point, 1) - 0.5).abs() < 1e-10);
            assert!((norm_f(&s.point) - 1.0).abs() < 1e-12);
            assert!(matches!(ray_membership(&ex1().momentum(&s.point), &[1.0, 1.0], 1e-9), RayClass::OnPositiveRay { .. }));
        }
    }

    #[test]
    fn example3_level_set_is_a_circle() {
        for s in sample_level_set(&ex3(), &mu(&[1.0, 0.0]), 10, 2).unwrap() {
            assert!((modulus2(&s.point, 0) - 1.0).abs() < 1e-10);
            assert!(s.point[2..].iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn example2_level_set_is_open_half_sphere() {
        for s in sample_level_set(&ex2(), &mu(&[1.0, 0.0]), 20, 3).unwrap() {
            assert!(s.point[4..].iter().all(|x| x.abs() < 1e-12));
            assert!(modulus2(&s.point, 1) > modulus2(&s.point, 0));
        }
    }

    #[test]
    fn empty_level_set_is_reported() {
        let a = TorusAction::new(vec![vec![1.0, 1.0]]).unwrap();
        assert!(matches!(sample_level_set(&a, &mu(&[-1.0]), 3, 0), Err(GeometryError::EmptyLevelSet { .. })));
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let a = sample_level_set(&ex1(), &mu(&[1.0, 2.0]), 16, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_level_set(&ex1(), &mu(&[1.0, 2.0]), 16, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn newton_fixed_point_and_convergence() {
        let m = mu(&[1.0, 1.0]);
        let s = sample_level_set(&ex1(), &m, 1, 4).unwrap().remove(0);
        let again = newton_project(&ex1(), &m, &s.point).unwrap();
        assert!(norm_f(&linalg::sub(&again.point, &s.point)) < 1e-12);
        let q = [0.9, 0.0, 0.0, 0.0, 0.45, 0.0, 0.0, 0.0];
        let r = newton_project(&ex1(), &m, &q).unwrap();
        let j = ex1().momentum(&r.point);
        assert!((j[0] - 0.5).abs() < 1e-10 && (j[1] - 0.5).abs() < 1e-10);
        match newton_project(&ex1(), &m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]) {
            Ok(r) => assert!(r.s > 0.0),
            Err(e) => assert!(matches!(e, GeometryError::WrongRay { .. } | GeometryError::NoConvergence { .. })),
        }
    }

    #[test]
    fn transversality_examples() {
        let m = mu(&[1.0, 1.0]);
        let s = sample_level_set(&ex1(), &m, 1, 5).unwrap().remove(0);
        assert!(transversality_check(&ex1(), &m, &s.point).transverse);
        let slice = [0.6, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0];
        let r = transversality_check(&ex1(), &mu(&[1.0, 0.0]), &slice);
        assert!(!r.transverse);
        let one = TorusAction::new(vec![vec![1.0, 1.0]]).unwrap();
        assert!(transversality_check(&one, &mu(&[2.0]), &[1.0, 0.0, 0.0, 0.0]).transverse);
    }

    #[test]
    fn quotient_dimensions() {
        assert_eq!(quotient_dimension(7, 2, 1), 5);
        assert_eq!(quotient_dimension(11, 2, 1), 9);
        assert_eq!(printed_dimension_formula(7, 2, 0, 1), 6);
    }

    #[test]
    fn example1_frame_dimensions_and_invariants() {
        let st = SasakianStructure::round(4).unwrap();
        let m = mu(&[1.0, 1.0]);
        let s = sample_level_set(&ex1(), &m, 1, 6).unwrap().remove(0);
        let f = build_frame(&st, &ex1(), &m, &s).unwrap();
        assert_eq!((f.vertical.len(), f.contact.len(), f.normal.len()), (1, 4, 1));
        assert_eq!(f.level_set_dim(), 6);
        assert!(f.reeb.is_some());
        let data = reduced_tensors(&st, &f).unwrap();
        assert!(data.d_eta_det > 1e-6);
        assert!(data.antisymmetry < 1e-12);
        assert!(basic_residual(&st, &f) < 1e-9);
        let setup = Submersion::for_ray(&st, &ex1(), &m).unwrap();
        assert!(projectable_reeb_residual(&setup, &setup.generators, &s.point) < 1e-8);
        assert!(orbit_invariance_residual(&ex1(), &f) < 1e-10);
    }

    #[test]
    fn degenerate_cases_have_honest_frames() {
        let st = SasakianStructure::round(4).unwrap();
        let m = mu(&[1.0, 0.0]);
        let s = sample_level_set(&ex1(), &m, 1, 7).unwrap().remove(0);
        assert!(matches!(build_frame(&st, &ex1(), &m, &s), Err(GeometryError::DegenerateAction { .. })));
        let setup = Submersion::for_ray(&st, &ex1(), &m).unwrap();
        let f = setup.frame(&s.point).unwrap();
        assert_eq!((f.level_set_dim(), f.vertical.len(), f.quotient_dim()), (3, 0, 3));
        let m3 = mu(&[0.0, 1.0]);
        let setup = Submersion::for_ray(&st, &ex3(), &m3).unwrap();
        let s = sample_level_set(&ex3(), &m3, 1, 8).unwrap().remove(0);
        let f = setup.frame(&s.point).unwrap();
        assert_eq!((f.level_set_dim(), f.vertical.len(), f.quotient_dim()), (5, 0, 5));
        check_frame(&st, &f).unwrap();
    }
}
