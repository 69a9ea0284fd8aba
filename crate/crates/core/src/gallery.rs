//! Command dispatch over the library operations.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cone::{self, ConePoint, StratumLabel};
use crate::config::RunConfig;
use crate::curvature_lab::{self, FlowContext, QuotientGeometry};
use crate::error::{GeometryError, Result};
use crate::linalg::{self, dot, norm_f, sub};
use crate::random;
use crate::reduction::{self, MomentSampler, Submersion, Target};
use crate::report::{Bound, Census, DimensionTable, ExitStatus, ResidualStat, RunReport, SampleRow, SampleTable, Statistic, StrataSummary};
use crate::sasakian::SasakianStructure;
use crate::tensor::{AmbientPoint, Metric};
use crate::torus::{kernel_algebra, local_freeness, slice_condition, MomentumCovector, TorusAction};

/// Offset separating direction streams from sampler streams.
const DIRECTION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn direction_rng(seed: u64, index: usize) -> ChaCha8Rng {
    sample_rng(seed ^ DIRECTION_STREAM, index)
}

fn per_sample<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Exit status for a module error.
pub fn status_of(err: &GeometryError) -> ExitStatus {
    match err {
        GeometryError::EmptyLevelSet { .. } => ExitStatus::InfeasibleLevelSet,
        GeometryError::NoConvergence { .. } => ExitStatus::NonConvergence,
        GeometryError::DegenerateAction { .. } | GeometryError::WrongRay { .. } => ExitStatus::HypothesisFailure,
        GeometryError::InvalidInput(_) | GeometryError::ZeroMu | GeometryError::DegenerateContact { .. } => ExitStatus::Validation,
        _ => ExitStatus::ResidualBreach,
    }
}

/// Runs `command` on `cfg`. Errors are folded into the report.
pub fn run_command(command: &str, cfg: &RunConfig) -> (RunReport, SampleTable) {
    let mut report = RunReport::new(command, cfg);
    let mut table = SampleTable::default();
    let violations = cfg.violations(command);
    if !violations.is_empty() {
        report.violations = violations;
        report.set_status(ExitStatus::Validation);
        return (report, table);
    }
    let result = match command {
        "verify-structure" => verify_structure(cfg, &mut report, &mut table),
        "check-hypotheses" => check_hypotheses(cfg, &mut report, &mut table),
        "reduce" => reduce(cfg, &mut report, &mut table),
        "curvature-scan" => curvature_scan(cfg, &mut report, &mut table),
        "reeb-flow" => reeb_flow(cfg, &mut report, &mut table),
        "cone-check" => cone_check(cfg, &mut report, &mut table),
        _ => unreachable!("validated command"),
    };
    if let Err(e) = result {
        report.error = Some(e.to_string());
        report.set_status(status_of(&e));
        if let GeometryError::EmptyLevelSet { certificate } = &e {
            report.verdicts.notes.push(format!("the level set is empty: {certificate}"));
        }
    }
    report.finalize();
    (report, table)
}

fn stat(report: &mut RunReport, cfg: &RunConfig, table: &SampleTable, name: &str, invariant: &str, bound: Bound) {
    let tol = cfg.tolerance(name);
    let threshold = if name == "positivity" { 1.0 - tol } else { tol };
    report.residuals.push(ResidualStat::from_values(name, invariant, bound, threshold, &table.column(name)));
}

fn unit<M: Metric>(m: &M, p: &[f64], v: Vec<f64>) -> Vec<f64> {
    let n = m.inner(p, &v, &v).sqrt();
    if n > 0.0 {
        linalg::scale(1.0 / n, &v)
    } else {
        v
    }
}

/// `‖J − ⟨J, μ̂⟩μ̂‖` together with the distance from the unit sphere.
fn ray_residual(action: &TorusAction, mu: &MomentumCovector, p: &[f64]) -> f64 {
    let j = action.momentum(p);
    let s = dot(&j, &mu.unit);
    norm_f(&sub(&j, &linalg::scale(s, &mu.unit))).max((norm_f(p) - 1.0).abs())
}

fn verify_structure(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let names: [&str; 4] =
        if s.is_round() { ["sasakian", "structure", "killing", "reeb"] } else { ["weighted_sasakian", "weighted_structure", "weighted_killing", "reeb"] };
    *table = SampleTable::new(&names);
    table.rows = per_sample(cfg.samples, |i| {
        let mut rng = sample_rng(cfg.seed, i);
        let p = AmbientPoint::new(random::random_unit(&mut rng, s.dim() + 1))?;
        let x = linalg::normalize(&random::random_tangent(&mut rng, p.coords()));
        let y = linalg::normalize(&random::random_tangent(&mut rng, p.coords()));
        let sas = s.sasakian_residual(&p, &x, &y)?;
        let st = s.structure_residuals(&p, &x, &y)?.max();
        let k = s.killing_residual(&p, &x, &y);
        let (a, b) = s.reeb_residuals(&p, &x);
        Ok(SampleRow { index: i, point: p.coords().to_vec(), s: None, values: vec![sas, st, k, a.max(b)] })
    })?;
    stat(report, cfg, table, names[0], "R(X,xi)Y = eta(Y)X - g(X,Y)xi", Bound::Max);
    stat(report, cfg, table, names[1], "phi xi = 0, phi^2 = -I + eta xi, eta phi = 0, metric compatibility", Bound::Max);
    stat(report, cfg, table, names[2], "xi is Killing", Bound::Max);
    stat(report, cfg, table, names[3], "eta(xi) = 1 and d eta(xi, .) = 0", Bound::Max);
    if !s.is_round() {
        report.verdicts.notes.push(format!("weighted structure with weights {:?}", s.weights()));
    }
    Ok(())
}

fn dimension_table(s: &SasakianStructure, action: &TorusAction, mu: &MomentumCovector, p: &[f64]) -> Result<DimensionTable> {
    let setup = Submersion::for_ray(s, action, mu)?;
    let frame = setup.frame(p)?;
    let k = kernel_algebra(&mu.mu)?.k();
    let expected = reduction::quotient_dimension(s.dim(), action.d(), k);
    let printed = reduction::printed_dimension_formula(s.dim(), action.d(), 0, k);
    Ok(DimensionTable {
        ambient: s.dim(),
        level_set: frame.level_set_dim(),
        quotient: frame.quotient_dim(),
        expected_quotient: expected,
        printed_formula: printed,
        printed_formula_matches: printed == frame.quotient_dim() as i64,
    })
}

fn check_hypotheses(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let action = cfg.action()?;
    let mu = cfg.momentum_covector()?;
    let kernel = kernel_algebra(&mu.mu)?;
    let slice = slice_condition(&mu.mu);
    report.verdicts.slice = Some(slice.clone());
    let samples = reduction::sample_level_set(&action, &mu, cfg.samples, cfg.seed)?;
    *table = SampleTable::new(&["level_set", "freeness_rank", "degenerate", "transversality_sigma_min", "transverse"]);
    table.rows = per_sample(samples.len(), |i| {
        let p = &samples[i].point;
        let free = local_freeness(&action, &kernel, p);
        let tr = reduction::transversality_check(&action, &mu, p);
        let smin = tr.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(SampleRow {
            index: i,
            point: p.clone(),
            s: Some(samples[i].s),
            values: vec![
                ray_residual(&action, &mu, p),
                free.rank as f64,
                f64::from(u8::from(free.degenerate)),
                if smin.is_finite() { smin } else { 0.0 },
                f64::from(u8::from(tr.transverse)),
            ],
        })
    })?;
    let degenerate: Vec<bool> = table.column("degenerate").iter().map(|v| *v > 0.5).collect();
    let not_transverse: Vec<bool> = table.column("transverse").iter().map(|v| *v < 0.5).collect();
    let freeness = Census::from_flags(&degenerate);
    let transversality = Census::from_flags(&not_transverse);
    let holds = slice.holds && freeness.failing == 0 && transversality.failing == 0;
    if freeness.failing > 0 {
        report.verdicts.notes.push(format!(
            "the kernel action is not locally free at {:.0}% of samples",
            100.0 * freeness.fraction_failing()
        ));
    }
    if transversality.failing > 0 {
        report.verdicts.notes.push(format!("dJ is not transverse to the ray at {} samples", transversality.failing));
    }
    report.verdicts.freeness = Some(freeness);
    report.verdicts.transversality = Some(transversality);
    report.verdicts.hypotheses_hold = Some(holds);
    report.dimensions = Some(dimension_table(&s, &action, &mu, &samples[0].point)?);
    stat(report, cfg, table, "level_set", "J lies on the ray through mu", Bound::Max);
    report.statistics.push(Statistic::from_values("ray_parameter", &samples.iter().map(|x| x.s).collect::<Vec<_>>()));
    if !holds {
        report.set_status(ExitStatus::HypothesisFailure);
    }
    Ok(())
}

fn reduce(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let action = cfg.action()?;
    let mu = cfg.momentum_covector()?;
    let kernel = kernel_algebra(&mu.mu)?;
    let setup = Submersion::for_ray(&s, &action, &mu)?;
    let samples = reduction::sample_level_set(&action, &mu, cfg.samples, cfg.seed)?;
    *table = SampleTable::new(&[
        "level_set",
        "reduced_contact_det",
        "quotient_sasakian",
        "projected_killing",
        "oneill_bracket",
        "vertical_dim",
        "degenerate",
    ]);
    table.rows = per_sample(samples.len(), |i| {
        let p = &samples[i].point;
        let geo = QuotientGeometry::new(&setup, p)?;
        let red = reduction::reduced_tensors(&s, &geo.frame)?;
        let mut rng = direction_rng(cfg.seed, i);
        let c = &geo.frame.contact.vectors;
        let x = unit(&s, p, random::random_combination(&mut rng, c));
        let y = unit(&s, p, random::random_combination(&mut rng, c));
        let qs = geo.quotient_sasakian_residual(&x, &y)?.unwrap_or(f64::NAN);
        let pk = geo.projected_killing_residual(&x, &y);
        let ob = geo.norm(&sub(&geo.a(&x, &y), &geo.a_bracket(&x, &y)));
        let free = local_freeness(&action, &kernel, p);
        Ok(SampleRow {
            index: i,
            point: p.clone(),
            s: Some(samples[i].s),
            values: vec![
                ray_residual(&action, &mu, p),
                red.d_eta_det,
                qs,
                pk,
                ob,
                geo.frame.vertical.len() as f64,
                f64::from(u8::from(free.degenerate)),
            ],
        })
    })?;
    stat(report, cfg, table, "level_set", "J lies on the ray through mu", Bound::Max);
    stat(report, cfg, table, "reduced_contact_det", "reduced d eta is nondegenerate on the horizontal contact space", Bound::Min);
    stat(report, cfg, table, "quotient_sasakian", "R(X,zeta)Y = eta(Y)X - g(X,Y)zeta on the quotient", Bound::Max);
    stat(report, cfg, table, "projected_killing", "the projected Reeb field is Killing", Bound::Max);
    stat(report, cfg, table, "oneill_bracket", "A(X,Y) = vertical [X,Y] / 2", Bound::Max);
    let degenerate: Vec<bool> = table.column("degenerate").iter().map(|v| *v > 0.5).collect();
    let freeness = Census::from_flags(&degenerate);
    if freeness.failing == freeness.total {
        report.verdicts.notes.push("the kernel action is trivial on the level set; the quotient is the level set itself".into());
    }
    report.verdicts.freeness = Some(freeness);
    report.verdicts.slice = Some(slice_condition(&mu.mu));
    report.dimensions = Some(dimension_table(&s, &action, &mu, &samples[0].point)?);
    if let Some(d) = &report.dimensions {
        if !d.printed_formula_matches {
            report.verdicts.notes.push(format!(
                "the alternative count dim M - d - m - k = {} differs from the observed quotient dimension {}",
                d.printed_formula, d.quotient
            ));
        }
    }
    Ok(())
}

fn curvature_scan(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let action = cfg.action()?;
    let mu = cfg.momentum_covector()?;
    let (setup, points, zero_level) = match &cfg.options.zero_level_generators {
        Some(gens) => {
            let setup = Submersion::for_rows(&s, &action, gens.clone(), gens.clone())?;
            let pts = MomentSampler::with_rows(&action, gens.clone(), None)?.sample(cfg.samples, cfg.seed)?;
            (setup, pts, true)
        }
        None => {
            let setup = Submersion::for_ray(&s, &action, &mu)?;
            let pts = reduction::sample_level_set(&action, &mu, cfg.samples, cfg.seed)?.into_iter().map(|x| x.point).collect();
            (setup, pts, false)
        }
    };
    let directions = cfg.options.directions.unwrap_or(2).max(1);
    let columns = [
        "direction",
        "k_phi",
        "k_phi_ambient",
        "h_bar_sq",
        "h_tilde_sq",
        "final_identity",
        "onil",
        "relations",
        "two_path",
        "gauss_consistency",
        "bianchi",
        "nu_dim",
        "positivity",
    ];
    *table = SampleTable::new(&columns);
    let nested = per_sample(points.len(), |i| {
        let p = &points[i];
        let geo = QuotientGeometry::new(&setup, p)?;
        let cr = geo.cr_decomposition()?;
        let mut rng = direction_rng(cfg.seed, i);
        let t = geo.tangent_basis().to_vec();
        let h = geo.horizontal_basis().to_vec();
        let mut rows = Vec::with_capacity(directions);
        for dir in 0..directions {
            let x = unit(&s, p, random::random_combination(&mut rng, &cr.d.vectors));
            let y = unit(&s, p, random::random_combination(&mut rng, &cr.d.vectors));
            let z = unit(&s, p, random::random_combination(&mut rng, &h));
            let w = unit(&s, p, random::random_combination(&mut rng, &h));
            let (k_phi, k_m, hb, ht, fin, onil, rel) = if cr.d.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let f = geo.final_identity(&cr, &x)?;
                (f.k_p, f.k_m, f.h_bar_sq, f.h_tilde_sq, f.residual, f.oneill_residual, geo.relations(&cr, &x, &y).max())
            };
            let two_path = match geo.reeb() {
                Some(zeta) => {
                    let zeta = zeta.to_vec();
                    let direct = geo.inner(&geo.r_n_direct(&x, &zeta, &y), &z);
                    (geo.r_p(&x, &zeta, &y, &z)? - direct).abs()
                }
                None => f64::NAN,
            };
            let a = unit(&s, p, random::random_combination(&mut rng, &t));
            let b = unit(&s, p, random::random_combination(&mut rng, &t));
            let c = unit(&s, p, random::random_combination(&mut rng, &t));
            let d = unit(&s, p, random::random_combination(&mut rng, &t));
            let gauss = (geo.r_n_gauss(&a, &b, &c, &d)? - geo.inner(&geo.r_n_direct(&a, &b, &c), &d)).abs();
            let bianchi = curvature_lab::bianchi_residual(&geo, &x, &z, &w, &y)?;
            rows.push(SampleRow {
                index: i,
                point: p.clone(),
                s: None,
                values: vec![
                    dir as f64,
                    k_phi,
                    k_m,
                    hb,
                    ht,
                    fin,
                    onil,
                    rel,
                    two_path,
                    gauss,
                    bianchi,
                    cr.dims.nu as f64,
                    if zero_level { k_phi } else { f64::NAN },
                ],
            });
        }
        Ok(rows)
    })?;
    table.rows = nested.into_iter().flatten().collect();
    stat(report, cfg, table, "final_identity", "K_phi^P = K_phi^M + 4|h_bar|^2 - 2|h_tilde|^2", Bound::Max);
    stat(report, cfg, table, "onil", "K^N - K^P + 3|A(X,phi X)|^2 = 0", Bound::Max);
    stat(report, cfg, table, "relations", "rel1, norm1 and norm2 on horizontal contact vectors", Bound::Max);
    stat(report, cfg, table, "two_path", "R^P(X,zeta)Y equals R^N(X,xi)Y on horizontal lifts", Bound::Max);
    stat(report, cfg, table, "gauss_consistency", "Gauss equation agrees with the direct connection of the level set", Bound::Max);
    stat(report, cfg, table, "bianchi", "first Bianchi identity of R^P", Bound::Max);
    report.residuals.push(ResidualStat::from_values(
        "nu_term",
        "|h_tilde(X,X)|^2 vanishes when the normal complement nu is trivial",
        Bound::Max,
        cfg.tolerance("nu_term"),
        &table.rows.iter().filter(|r| r.values[11] == 0.0).map(|r| r.values[4]).filter(|v| !v.is_nan()).collect::<Vec<_>>(),
    ));
    if zero_level {
        stat(report, cfg, table, "positivity", "phi-sectional curvature of a zero-level quotient is at least 1", Bound::Min);
        report.verdicts.notes.push("zero-level reduction".into());
    }
    for name in ["k_phi", "k_phi_ambient", "h_bar_sq", "h_tilde_sq", "nu_dim"] {
        report.statistics.push(Statistic::from_values(name, &table.column(name)));
    }
    Ok(())
}

fn reeb_flow(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let action = cfg.action()?;
    let mu = cfg.momentum_covector()?;
    let t_max = cfg.options.t_max.unwrap_or(std::f64::consts::TAU);
    let steps = cfg.options.steps.unwrap_or(512);
    let samples = reduction::sample_level_set(&action, &mu, cfg.samples, cfg.seed)?;
    let ctx = FlowContext::LevelSet { structure: &s, action: &action, mu: &mu };
    let lambda = cfg.options.lambda;
    *table = SampleTable::new(&["level_set", "reeb_phase", "reeb_flow"]);
    table.rows = per_sample(samples.len(), |i| {
        let p = &samples[i].point;
        let tr = curvature_lab::reeb_flow(&ctx, p, t_max, steps)?;
        let drift = tr.points.iter().map(|z| ray_residual(&action, &mu, z)).fold(0.0, f64::max);
        let phase = curvature_lab::sphere_flow_deviation(&tr);
        let closed = lambda.map_or(f64::NAN, |l| curvature_lab::example4_flow_deviation(l, &tr));
        Ok(SampleRow { index: i, point: p.clone(), s: Some(samples[i].s), values: vec![drift, phase, closed] })
    })?;
    stat(report, cfg, table, "level_set", "the flow stays on the level set", Bound::Max);
    stat(report, cfg, table, "reeb_phase", "the Reeb flow upstairs is z -> exp(it) z", Bound::Max);
    if lambda.is_some() {
        stat(report, cfg, table, "reeb_flow", "reduced flow equals (A exp(i(a+bt)), R(t)Z)", Bound::Max);
    } else {
        report.verdicts.notes.push("no closed-form reduced flow is available for this action".into());
    }
    Ok(())
}

fn cone_check(cfg: &RunConfig, report: &mut RunReport, table: &mut SampleTable) -> Result<()> {
    let s = cfg.structure()?;
    let action = cfg.action()?;
    let mu = cfg.momentum_covector()?;
    let kernel = kernel_algebra(&mu.mu)?;
    let dim = 2 * action.n();
    *table = SampleTable::new(&["r", "iota_transpose", "symplectic_convention", "cone_commutation"]);
    table.rows = per_sample(cfg.samples, |i| {
        let mut rng = sample_rng(cfg.seed, i);
        let p = AmbientPoint::new(random::random_unit(&mut rng, dim))?;
        let r = 10f64.powf(rng.random_range(-1.0..1.0));
        let cp = ConePoint::new(p, r)?;
        let iota = cone::iota_transpose_check(&action, &mu, &cp)?;
        let v = random::gaussian_vector(&mut rng, dim);
        let conv = (0..action.d())
            .map(|k| {
                let mut e = vec![0.0; action.d()];
                e[k] = 1.0;
                cone::symplectic_oracle_residual(&s, &action, &cp, &e, &v)
            })
            .fold(0.0, f64::max);
        let (up, down) = cone::cone_zero_consistency(&action, &kernel.basis, &cp, crate::tolerances::RAY);
        Ok(SampleRow { index: i, point: cp.base.coords().to_vec(), s: None, values: vec![r, iota, conv, f64::from(u8::from(up != down))] })
    })?;
    stat(report, cfg, table, "iota_transpose", "Phi = iota^t J_s equals the momentum of the restricted action", Bound::Max);
    stat(report, cfg, table, "symplectic_convention", "i_X d(r^2 eta) + d<J_s, X> = 0", Bound::Max);

    let zero_points = MomentSampler::new(&action, &mu, Target::KernelZero)?.sample(cfg.samples, cfg.seed)?;
    let mut points: Vec<(Vec<f64>, bool)> = zero_points.into_iter().map(|p| (p, true)).collect();
    let per_stratum = cfg.samples.min(20);
    let mut zero_stratum_point = None;
    for (target, label) in [(Target::PositiveRay, "positive"), (Target::ZeroMomentum, "zero"), (Target::NegativeRay, "negative")] {
        match MomentSampler::new(&action, &mu, target).and_then(|m| m.sample(per_stratum, cfg.seed)) {
            Ok(pts) => {
                if target == Target::ZeroMomentum {
                    zero_stratum_point = pts.first().cloned();
                }
                points.extend(pts.into_iter().map(|p| (p, false)));
            }
            Err(GeometryError::EmptyLevelSet { .. }) => report.verdicts.notes.push(format!("the {label} stratum is empty")),
            Err(e) => return Err(e),
        }
    }
    let classified: Vec<(f64, Option<StratumLabel>, bool, f64, f64)> = points
        .par_iter()
        .map(|(p, generic)| {
            let j = action.momentum(p);
            let label = cone::classify(&j, &mu.mu, cfg.tolerance("stratification_leak"));
            let leak = match &label {
                Err(GeometryError::StratificationLeak { residual }) => *residual,
                _ => 0.0,
            };
            let half = cone::classify(&linalg::scale(0.5, &j), &mu.mu, cfg.tolerance("stratification_leak")).ok();
            let label = label.ok();
            let phi_abs = kernel.basis.iter().map(|b| dot(b, &j).abs()).fold(0.0, f64::max);
            (leak, label, *generic, f64::from(u8::from(half != label)), phi_abs)
        })
        .collect();
    let leaks: Vec<f64> = classified.iter().map(|c| c.0).collect();
    let mismatches: Vec<f64> = classified.iter().map(|c| c.3).collect();
    let phi_zero: Vec<f64> = classified.iter().map(|c| c.4).collect();
    let count = |l: StratumLabel| classified.iter().filter(|c| c.1 == Some(l)).count();
    let summary = StrataSummary {
        positive: count(StratumLabel::PositiveStratum),
        zero: count(StratumLabel::ZeroStratum),
        negative: count(StratumLabel::NegativeStratum),
        leaks: leaks.iter().filter(|v| **v > 0.0).count(),
        all_strata_present: false,
    };
    let generic_total = classified.iter().filter(|c| c.2).count();
    report.strata = Some(StrataSummary { all_strata_present: summary.positive > 0 && summary.zero > 0 && summary.negative > 0, ..summary });
    report.verdicts.notes.push(format!(
        "stratified {} samples of Phi^-1(0) plus up to {} per stratum",
        generic_total, per_stratum
    ));
    report.residuals.push(ResidualStat::from_values(
        "stratification_leak",
        "every Phi-zero sample has J on the line through mu",
        Bound::Max,
        cfg.tolerance("stratification_leak"),
        &leaks,
    ));
    report.residuals.push(ResidualStat::from_values(
        "phi_zero",
        "stratified samples satisfy Phi = 0",
        Bound::Max,
        cfg.tolerance("phi_zero"),
        &phi_zero,
    ));
    report.residuals.push(ResidualStat::from_values(
        "rescaling_invariance",
        "strata do not change when the momentum is halved",
        Bound::Max,
        cfg.tolerance("rescaling_invariance"),
        &mismatches,
    ));
    stat(report, cfg, table, "cone_commutation", "Phi_s(p, r) = 0 exactly when Phi(p) = 0", Bound::Max);
    if let Some(p) = zero_stratum_point {
        let d = cone::zero_stratum_degeneracy(&s, &action, &mu, &p)?;
        report.statistics.push(Statistic::from_values("zero_stratum_kernel_dim", &[d.kernel_dim as f64]));
        if d.kernel_dim > 0 {
            report.verdicts.notes.push(format!(
                "d eta has a {}-dimensional kernel on the zero stratum: its quotient is not contact",
                d.kernel_dim
            ));
        }
    }
    Ok(())
}
