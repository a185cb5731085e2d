use super::*;
use crate::blackscholes::european_price;

fn put(s: f64, r: f64, q: f64, v: f64, t: f64) -> MarketParams {
    MarketParams::put(s, 100.0, r, q, v, t).unwrap()
}

fn strict(method: KimMethod, m: usize, n: usize, l: usize, p: usize) -> KimConfig {
    KimConfig { fallback: false, ..KimConfig::new(method, m, n, l, p) }
}

#[test]
fn fp_b_single_boundary_prices() {
    for (r, t, want) in [(0.10, 3.0, 1.94358), (0.01, 3.0, 6.73805)] {
        let p = put(100.0, r, 0.01, 0.10, t);
        let got = kim_price(&p, &strict(KimMethod::FpB, 10, 32, 31, 63)).unwrap().price;
        assert!((got - want).abs() < 1e-4, "r={r}: {got}");
    }
}

#[test]
fn fp_a_unstable_when_q_below_r() {
    let p = put(100.0, 0.10, 0.01, 0.10, 3.0);
    let fpa = kim_price(&p, &strict(KimMethod::FpA, 10, 32, 31, 63)).unwrap().price;
    assert!((fpa - 1.94358).abs() > 0.1, "{fpa}");
    let gna = kim_price(&p, &strict(KimMethod::GaussNewtonA, 10, 0, 31, 63)).unwrap().price;
    assert!((gna - 1.94358).abs() < 2e-4, "{gna}");
}

#[test]
fn never_exercised_is_european() {
    let p = put(100.0, -0.01, -0.005, 0.2, 2.0);
    let r = kim_price(&p, &KimConfig::default()).unwrap();
    assert_eq!(r.price, european_price(&p).unwrap());
}

#[test]
fn vanishing_boundary_gives_european() {
    let p = put(100.0, 0.05, 0.0, 0.2, 1.0);
    let b = BoundaryCurve::new(1.0, 100.0, CurveSide::Below, &[100.0, 1e-9, 1e-9, 1e-9, 1e-9, 1e-9]).unwrap();
    // only the tau = 0 node is at the strike; the premium collapses onto it
    let tiny = BoundaryCurve::new(1.0, 1e-9, CurveSide::Below, &[1e-9; 6]).unwrap();
    let e = european_price(&p).unwrap();
    let r = kim_price_single(&p, &tiny, QuadratureSpec::default()).unwrap();
    assert!((r.price - e).abs() < 1e-12, "{} {e}", r.price);
    assert!(kim_price_single(&p, &b, QuadratureSpec::default()).unwrap().price >= e);
}

#[test]
fn coincident_boundaries_give_european() {
    let p = put(100.0, -0.005, -0.01, 0.08, 5.0);
    let u = BoundaryCurve::new(5.0, 70.0, CurveSide::Below, &[70.0; 6]).unwrap();
    let l = BoundaryCurve::new(5.0, 70.0, CurveSide::Above, &[70.0; 6]).unwrap();
    let db = DoubleBoundary { maturity: 5.0, upper: u, lower: Some(l), t_s: None };
    let r = kim_price_double(&p, &db, QuadratureSpec::default()).unwrap();
    assert!((r.price - european_price(&p).unwrap()).abs() < 1e-12);
}

#[test]
fn double_without_lower_matches_single() {
    let p = put(95.0, 0.04, 0.01, 0.25, 2.0);
    let sol = kim_boundary(&p, &KimConfig::new(KimMethod::FpB, 6, 8, 15, 31)).unwrap();
    let a = kim_price_single(&p, &sol.boundary.upper, QuadratureSpec::default()).unwrap().price;
    let b = kim_price_double(&p, &sol.boundary, QuadratureSpec::default()).unwrap().price;
    assert_eq!(a, b);
}

#[test]
fn fixed_points_are_stationary() {
    let q = QuadratureSpec::new(15, 31).unwrap();
    let p = put(100.0, -0.005, -0.01, 0.08, 15.0);
    let guess = qdplus_guess(&p, 5, 0.15).unwrap();
    let fixed = fp_b_prime_iterate(&guess, &p, q, 200).unwrap();
    let again = fp_b_prime_iterate(&fixed, &p, q, 1).unwrap();
    let l0 = fixed.lower.as_ref().unwrap();
    let l1 = again.lower.as_ref().unwrap();
    for i in 0..=5 {
        assert!((again.upper.values[i] / fixed.upper.values[i] - 1.0).abs() < 1e-7);
        assert!((l1.values[i] / l0.values[i] - 1.0).abs() < 1e-7);
    }

    let p = put(100.0, 0.10, 0.01, 0.10, 3.0);
    let sol = kim_boundary(&p, &KimConfig::new(KimMethod::FpB, 10, 64, 31, 63)).unwrap();
    let (up, _) = fp_b_step(&sol.boundary, &p, QuadratureSpec::new(31, 63).unwrap()).unwrap();
    for (a, b) in up.iter().zip(&sol.boundary.upper.values) {
        assert!((a / b - 1.0).abs() < 1e-7);
    }
}

#[test]
fn gauss_newton_from_solution_takes_no_steps() {
    let p = put(100.0, 0.10, 0.01, 0.10, 3.0);
    let q = QuadratureSpec::new(15, 31).unwrap();
    let cfg = KimConfig { quad: q, ..strict(KimMethod::GaussNewtonB, 8, 0, 15, 31) };
    let sol = kim_boundary(&p, &cfg).unwrap();
    assert!(sol.iterations > 0);
    let (_, rep) = gauss_newton_solve(GnSystem::Continuity, &sol.boundary, &p, q, 1e-8).unwrap();
    assert_eq!(rep.steps, 0);
    assert!(rep.residual <= 1e-8);
}

#[test]
fn crossing_time_estimates() {
    let th = |t: f64| 1e-2 * t;
    assert_eq!(estimate_crossing_time(&put(100.0, -0.005, -0.01, 0.04, 5.0), th(5.0)).unwrap(), None);
    let ts = estimate_crossing_time(&put(100.0, -0.005, -0.01, 0.15, 5.0), th(5.0)).unwrap().unwrap();
    assert!((ts - 2.4).abs() < 0.3, "{ts}");
    let ts = estimate_crossing_time(&put(100.0, -0.005, -0.01, 0.08, 20.0), th(20.0)).unwrap().unwrap();
    assert!(ts > 0.0 && ts < 20.0);
    // single-boundary regime
    assert_eq!(estimate_crossing_time(&put(100.0, 0.05, 0.01, 0.2, 5.0), 0.05).unwrap(), None);
}

fn samples(u: &[f64], l: &[f64]) -> BoundarySamples {
    BoundarySamples {
        times: (0..u.len()).map(|i| i as f64).collect(),
        upper: u.iter().map(|&x| Some(x)).collect(),
        lower: l.iter().map(|&x| Some(x)).collect(),
    }
}

#[test]
fn crossed_guess_adjustment() {
    let open = samples(&[80.0, 85.0, 90.0], &[60.0, 55.0, 50.0]);
    assert_eq!(adjust_crossed_guess(&open, 50.0), open);

    let crossed = samples(&[60.0, 64.0, 75.0, 90.0], &[62.0, 65.0, 58.0, 52.0]);
    let adj = adjust_crossed_guess(&crossed, 50.0);
    for i in 0..2 {
        assert_eq!(adj.upper[i], Some(58.0));
        assert_eq!(adj.lower[i], Some(58.0));
    }
    assert_eq!(adj.upper[2], Some(75.0));
    assert!((0..4).all(|i| adj.upper[i] >= adj.lower[i]));

    let all = samples(&[40.0, 45.0], &[50.0, 55.0]);
    let adj = adjust_crossed_guess(&all, 50.0);
    assert!(adj.upper.iter().chain(&adj.lower).all(|v| *v == Some(50.0)));

    let mut missing = samples(&[70.0, 80.0], &[60.0, 55.0]);
    missing.upper[0] = None;
    let adj = adjust_crossed_guess(&missing, 50.0);
    assert_eq!(adj.upper[0], Some(55.0));
}

#[test]
fn crossed_domain_starts_at_crossing_time() {
    let p = put(100.0, -0.005, -0.01, 0.08, 20.0);
    let sol = kim_boundary(&p, &KimConfig::default()).unwrap();
    let ts = sol.boundary.t_s.unwrap();
    assert!((sol.boundary.tau_max() - (20.0 - ts)).abs() < 1e-12);
    let s = sol.boundary.samples(41);
    assert!(s.upper[0].is_none());
    assert!(s.upper[40].is_some());
}

#[test]
fn quadrature_spec_validation() {
    assert!(QuadratureSpec::new(2, 21).is_err());
    assert!(QuadratureSpec::new(11, 2).is_err());
    assert!(QuadratureSpec::new(3, 3).is_ok());
}

#[test]
fn calls_through_symmetry() {
    let call = MarketParams::call(100.0, 90.0, 0.02, 0.06, 0.3, 1.5).unwrap();
    let put = symmetric_put_params(&call).unwrap();
    let cfg = KimConfig::new(KimMethod::FpB, 7, 16, 15, 31);
    assert_eq!(kim_price(&call, &cfg).unwrap().price, kim_price(&put, &cfg).unwrap().price);
}

#[test]
fn batch_matches_individual() {
    let p = put(100.0, -0.005, -0.01, 0.08, 10.0);
    let cfg = KimConfig::default();
    let spots = [80.0, 100.0, 120.0];
    let batch = kim_price_batch(&p, &spots, &cfg).unwrap();
    for (s, b) in spots.iter().zip(&batch) {
        assert_eq!(kim_price(&p.with_spot(*s), &cfg).unwrap().price, b.price);
    }
}
