mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasaki_core::random;
use sasaki_core::sasakian::SasakianStructure;
use sasaki_core::tensor::{curvature_operator, AmbientPoint, Metric};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn closed_form_metric_matches_library_metric() {
    let a = vec![1.0, 2.0, 3.0];
    let s = SasakianStructure::weighted(a.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let p = random::random_unit(&mut rng, 6);
        let x = random::random_tangent(&mut rng, &p);
        let y = random::random_tangent(&mut rng, &p);
        let lib = s.inner(&p, &x, &y);
        assert!((lib - common::weighted_metric(&a, &p, &x, &y)).abs() < 1e-12);
    }
}

#[test]
fn round_sphere_finite_difference_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = random::random_unit(&mut rng, 6);
    let chart = common::Chart::new(vec![1.0; 3], p.clone(), common::tangent_basis(&p));
    let r = chart.curvature();
    let x = random::random_tangent(&mut rng, &p);
    let y = random::random_tangent(&mut rng, &p);
    let z = random::random_tangent(&mut rng, &p);
    let fd = chart.curvature_ambient(&r, &x, &y, &z);
    let exact: Vec<f64> = (0..6).map(|k| common::dot(&y, &z) * x[k] - common::dot(&x, &z) * y[k]).collect();
    assert!(max_abs_diff(&fd, &exact) < 1e-5);
}

#[test]
fn weighted_curvature_agrees_with_finite_differences() {
    let a = vec![1.0, 2.0, 3.0];
    let s = SasakianStructure::weighted(a.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let p = random::random_unit(&mut rng, 6);
        let ap = AmbientPoint::new(p.clone()).unwrap();
        let chart = common::Chart::new(a.clone(), p.clone(), common::tangent_basis(&p));
        let r = chart.curvature();
        let xi = s.reeb(&p);
        let x = random::random_tangent(&mut rng, &p);
        let y = random::random_tangent(&mut rng, &p);
        let fd = chart.curvature_ambient(&r, &x, &xi, &y);
        let jet = curvature_operator(&s, &ap, &x, &xi, &y).unwrap();
        assert!(max_abs_diff(&fd, &jet) < 1e-3, "{}", max_abs_diff(&fd, &jet));
    }
}
