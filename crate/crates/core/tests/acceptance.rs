mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sasaki_core::config::{preset, RunConfig};
use sasaki_core::curvature_lab::QuotientGeometry;
use sasaki_core::gallery::run_command;
use sasaki_core::random;
use sasaki_core::reduction::Submersion;
use sasaki_core::report::{RunReport, SampleTable};
use sasaki_core::sasakian::SasakianStructure;
use sasaki_core::tensor::{curvature_operator, AmbientPoint};
use sasaki_core::torus::TorusAction;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        println!("criterion {id:>2} {:<4} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(format!("{id} {name}"));
        }
    }
}

fn cfg(name: &str, samples: usize) -> RunConfig {
    let mut c = preset(name, None).unwrap();
    c.samples = samples;
    c
}

fn max_of(report: &RunReport, name: &str) -> f64 {
    report.residual(name).map_or(f64::NAN, |r| r.max)
}

fn passes(report: &RunReport, name: &str) -> bool {
    report.residual(name).is_some_and(|r| r.pass && r.count > 0)
}

fn round_structure(g: &mut Gate) {
    let (r, t) = run_command("verify-structure", &cfg("ex1", 100));
    let sas = max_of(&r, "sasakian");
    let st = max_of(&r, "structure");
    let pass = t.rows.len() == 100 && sas < 1e-7 && st < 1e-8 && r.exit.code == 0;
    g.check(1, "round S^7 structure", pass, format!("sasakian {sas:.2e}, structure {st:.2e}, {} samples", t.rows.len()));
}

fn fd_agreement() -> f64 {
    let a = vec![1.0, 2.0, 3.0];
    let s = SasakianStructure::weighted(a.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = random::random_unit(&mut rng, 6);
        let chart = common::Chart::new(a.clone(), p.clone(), common::tangent_basis(&p));
        let curv = chart.curvature();
        let x = random::random_tangent(&mut rng, &p);
        let y = random::random_tangent(&mut rng, &p);
        let z = random::random_tangent(&mut rng, &p);
        let fd = chart.curvature_ambient(&curv, &x, &y, &z);
        let jet = curvature_operator(&s, &AmbientPoint::new(p).unwrap(), &x, &y, &z).unwrap();
        worst = fd.iter().zip(&jet).map(|(u, v)| (u - v).abs()).fold(worst, f64::max);
    }
    worst
}

fn weighted_structure(g: &mut Gate) {
    let (r, _) = run_command("verify-structure", &cfg("weighted", 100));
    let k = max_of(&r, "weighted_killing");
    let sas = max_of(&r, "weighted_sasakian");
    let fd = fd_agreement();
    let pass = k < 1e-5 && sas < 1e-4 && fd < 1e-3;
    g.check(2, "weighted S^5 structure", pass, format!("killing {k:.2e}, sasakian {sas:.2e}, finite-difference agreement {fd:.2e}"));
}

fn reduce_ex1(g: &mut Gate) {
    let (r, t) = run_command("reduce", &cfg("ex1", 100));
    let slice = t.rows.iter().map(|row| (row.point[..4].iter().map(|v| v * v).sum::<f64>() - 0.5).abs()).fold(0.0, f64::max);
    let dim = r.dimensions.as_ref().map_or(0, |d| d.quotient);
    let det = r.residual("reduced_contact_det").map_or(f64::NAN, |x| x.min);
    let qs = max_of(&r, "quotient_sasakian");
    let pass = t.rows.len() == 100 && slice < 1e-10 && dim == 5 && det > 1e-6 && qs < 1e-5;
    g.check(3, "reduction of S^7 at mu = (1,1)", pass, format!("|z0|^2+|z1|^2 deviation {slice:.2e}, quotient dim {dim}, min det {det:.3}, quotient sasakian {qs:.2e}"));
}

fn two_path(g: &mut Gate) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for name in ["ex1", "ex3"] {
        let (r, _) = run_command("curvature-scan", &cfg(name, 25));
        let stat = r.residual("two_path").unwrap();
        worst = worst.max(stat.max);
        count += stat.count;
    }
    g.check(4, "two-path curvature", count == 100 && worst < 1e-6, format!("max {worst:.2e} over {count} directions"));
}

fn relations(g: &mut Gate) {
    let (r, _) = run_command("curvature-scan", &cfg("ex1", 25));
    let rel = max_of(&r, "relations");
    let fin = max_of(&r, "final_identity");
    let nu = max_of(&r, "nu_term");
    let pass = passes(&r, "relations") && passes(&r, "final_identity") && passes(&r, "nu_term") && rel < 1e-6 && fin < 1e-5 && nu < 1e-8;
    g.check(5, "second fundamental form relations", pass, format!("relations {rel:.2e}, final identity {fin:.2e}, nu term {nu:.2e}"));
}

fn zero_level(g: &mut Gate) {
    let mut c = cfg("ex2", 100);
    c.options.directions = Some(2);
    let (r, t) = run_command("curvature-scan", &c);
    let k = r.residual("positivity").unwrap();
    let pass = t.rows.len() == 200 && k.count == 200 && k.min >= 1.0 - 1e-6;
    g.check(6, "zero-level phi-sectional positivity", pass, format!("min K_phi {:.9} over {} directions", k.min, k.count));
}

fn reeb_flow(g: &mut Gate) {
    let mut c = cfg("ex4", 20);
    c.options.steps = Some(512);
    c.options.t_max = Some(std::f64::consts::TAU);
    let (r, _) = run_command("reeb-flow", &c);
    let dev = max_of(&r, "reeb_flow");
    g.check(7, "reduced Reeb flow closed form", passes(&r, "reeb_flow") && dev < 1e-6, format!("max deviation {dev:.2e}"));
}

fn cone(g: &mut Gate) {
    let (r, _) = run_command("cone-check", &cfg("ex2", 1000));
    let iota = max_of(&r, "iota_transpose");
    let s = r.strata.clone().unwrap();
    let pass = iota < 1e-12 && s.leaks == 0 && s.all_strata_present && r.exit.code == 0;
    g.check(8, "cone stratification", pass, format!("iota {iota:.2e}, leaks {}, strata positive {} zero {} negative {}", s.leaks, s.positive, s.zero, s.negative));
}

fn degenerate(g: &mut Gate) {
    let mut c = cfg("ex1", 100);
    c.mu = Some(vec![1.0, 0.0]);
    let (r, _) = run_command("check-hypotheses", &c);
    let f = r.verdicts.freeness.clone().unwrap();
    let pass = f.total > 0 && f.failing == f.total && r.exit.code == 4;
    g.check(9, "degenerate direction detected", pass, format!("{}/{} degenerate, exit {}", f.failing, f.total, r.exit.code));
}

fn hopf(g: &mut Gate) {
    let st = SasakianStructure::round(2).unwrap();
    let a = TorusAction::new(vec![vec![1.0, 1.0]]).unwrap();
    let setup = Submersion::for_rows(&st, &a, vec![], vec![vec![1.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random::random_unit(&mut rng, 4);
        let geo = QuotientGeometry::new(&setup, &p).unwrap();
        let h = geo.horizontal_basis();
        worst = worst.max((geo.sectional_p(&h[0], &h[1]).unwrap() - 4.0).abs());
    }
    g.check(10, "Hopf quotient curvature", worst < 1e-7, format!("max |K - 4| {worst:.2e}"));
}

fn outputs(command: &str, c: &RunConfig) -> (String, String) {
    let (r, t): (RunReport, SampleTable) = run_command(command, c);
    (r.to_json(), t.to_csv())
}

fn determinism(g: &mut Gate) {
    let runs: Vec<(&str, RunConfig)> = vec![
        ("verify-structure", cfg("weighted", 30)),
        ("reduce", cfg("ex1", 30)),
        ("curvature-scan", cfg("ex2", 20)),
        ("reeb-flow", cfg("ex4", 10)),
        ("cone-check", cfg("ex2", 200)),
    ];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let mut identical = 0;
    for (command, c) in &runs {
        let a = single.install(|| outputs(command, c));
        let b = many.install(|| outputs(command, c));
        if a == b {
            identical += 1;
        }
    }
    g.check(11, "thread-count determinism", identical == runs.len(), format!("{identical}/{} runs byte-identical", runs.len()));
}

fn main() {
    let mut g = Gate { failures: Vec::new() };
    round_structure(&mut g);
    weighted_structure(&mut g);
    reduce_ex1(&mut g);
    two_path(&mut g);
    relations(&mut g);
    zero_level(&mut g);
    reeb_flow(&mut g);
    cone(&mut g);
    degenerate(&mut g);
    hopf(&mut g);
    determinism(&mut g);
    if !g.failures.is_empty() {
        eprintln!("failing criteria: {:?}", g.failures);
        std::process::exit(1);
    }
    println!("acceptance: all criteria pass");
}
