use parashear::skew::*;

fn golden_setup() -> (SkewShift, RoofFunction) {
    (SkewShift::golden(), RoofFunction::default_roof())
}

#[test]
fn r1prime_variation_tightens_with_kappa() {
    let (ss, f) = golden_setup();
    for &(x, y) in &[(0.3, 0.6), (0.77, 0.21)] {
        let mut cfg = HeisConfig::new(0.3).unwrap();
        cfg.delta = 2e-2;
        cfg.kappa = 0.3f64.powi(6);
        let r1 = heis_r1prime(&ss, &f, PointPair::new((x, y), (x, y - 5e-4)), &cfg).unwrap();
        assert!(r1.report.pass, "{:?}", r1.report.failure);
        let var = r1.report.residuals["max_window_variation"];
        assert!(var < 0.09, "variation {var}");
        assert!(r1.m_prime as f64 >= cfg.kappa.powi(-2));
    }
}

#[test]
fn lift_passes_without_halving() {
    let (ss, f) = golden_setup();
    let mut cfg = HeisConfig::new(0.3).unwrap();
    cfg.delta = 2e-3;
    let p = SpecialFlowPoint::new(0.3, 0.6, 0.4);
    let q = SpecialFlowPoint::new(0.3, 0.6 - 1e-3, 0.4);
    let r1 = heis_r1prime(&ss, &f, PointPair::new(p.base(), q.base()), &cfg).unwrap();
    let rep = lift_strong_r(&ss, &f, p, q, &r1, &cfg).unwrap();
    assert!(rep.pass);
    assert!(rep.residuals["p_M"].abs() >= 0.5);
    assert!(rep.min_fraction() >= 1.0 - cfg.epsilon);
}

#[test]
fn halved_m_misses_the_shift() {
    let (ss, f) = golden_setup();
    let mut cfg = HeisConfig::new(0.3).unwrap();
    cfg.delta = 2e-3;
    cfg.halve_m = true;
    let p = SpecialFlowPoint::new(0.3, 0.6, 0.4);
    let q = SpecialFlowPoint::new(0.3, 0.6 - 1e-3, 0.4);
    let r1 = heis_r1prime(&ss, &f, PointPair::new(p.base(), q.base()), &cfg).unwrap();
    let rep = lift_strong_r_report(&ss, &f, p, q, &r1, &cfg).unwrap();
    assert!(rep.residuals["p_M"].abs() < 0.5);
    assert!(!rep.pass);
}

#[test]
fn witness_reports_are_reproducible() {
    let (ss, f) = golden_setup();
    let mut cfg = HeisConfig::new(0.3).unwrap();
    cfg.delta = 2e-3;
    cfg.decimation = 5000;
    let pair = PointPair::new((0.3, 0.6), (0.3, 0.6 - 1e-3));
    let a = heis_r1prime(&ss, &f, pair, &cfg).unwrap().report.to_json();
    let b = heis_r1prime(&ss, &f, pair, &cfg).unwrap().report.to_json();
    assert_eq!(a, b);
}

#[test]
fn tiny_offsets_exhaust_the_budget() {
    let (ss, f) = golden_setup();
    let mut cfg = HeisConfig::new(0.3).unwrap();
    cfg.step_budget = 2_000_000;
    let pair = PointPair::new((0.3, 0.6), (0.3, 0.6 - 1e-8));
    match first_shear_time(&ss, &f, pair, &cfg) {
        Err(parashear::Error::NotFound { searched, .. }) => assert!(searched <= 2_000_000),
        other => panic!("{other:?}"),
    }
}
