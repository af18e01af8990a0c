use frontlab::certificates::*;
use frontlab::models::{preset, LvParams, ModelSpec};
use frontlab::spectral::linear_speed;
use frontlab::waves::{self, default_grid, solve_semiwave, Grid};

fn certified(name: &str, factor: f64) -> Certificate {
    let spec = preset(name).unwrap();
    // every certified preset is pulled, so c* is the linear speed
    let c = factor * linear_speed(&spec).unwrap();
    let base = base_wave(&spec, c).unwrap();
    let cert = certify(Recipe::for_spec(&spec), &spec, &base).unwrap_or_else(|e| panic!("{name} at {factor}: {e}"));
    assert!(cert.params.ledger_passed());
    assert!(cert.report.passed && cert.report.strict, "{name}:\n{}", cert.report.summary());
    assert!(cert.report.continuity < CONTINUITY_TOL);
    cert
}

fn strict_signs(cert: &Certificate) {
    for r in cert.report.regions.iter().filter(|r| !r.clamped && !r.roundoff) {
        match r.operator {
            Operator::N1 | Operator::N2 => assert!(r.worst < 0.0, "{r:?}"),
            Operator::N3 => assert!(r.worst > 0.0, "{r:?}"),
        }
    }
    for c in &cert.report.corners {
        assert!(c.margin > 0.0 && !c.tangential, "{c:?}");
    }
}

#[test]
fn nonlocal_noncritical_waves_certify() {
    for f in [1.1, 1.2, 1.3] {
        let cert = certified("nonlocal-kpp-uniform", f);
        strict_signs(&cert);
        // four pieces before clamping: three junctions
        assert_eq!(cert.profile.u.junctions.len(), 3);
        assert!(cert.profile.v.is_none());
    }
}

#[test]
fn lv_strong_competition_certifies() {
    for f in [1.1, 1.3] {
        let cert = certified("lv-strongweak", f);
        strict_signs(&cert);
        assert_eq!(cert.profile.u.junctions.len(), 4);
    }
}

#[test]
fn lv_weak_competition_certifies() {
    for f in [1.1, 1.3] {
        strict_signs(&certified("lv-weak", f));
    }
}

#[test]
fn lv_critical_competition_certifies() {
    for f in [1.1, 1.3] {
        let cert = certified("lv-critical", f);
        strict_signs(&cert);
        let p = &cert.params;
        assert!(p.theta.unwrap() > 0.0 && p.theta.unwrap() < 1.0);
        assert_eq!(p.eps5, p.eta2);
        // U1 = 1, V1 = 0 left of -M1
        let m1 = p.m1.unwrap();
        assert_eq!(cert.profile.u.value(-m1 * 1.01), 1.0);
        assert_eq!(cert.profile.v.as_ref().unwrap().value(-m1 * 1.01), 0.0);
    }
}

#[test]
fn local_analog_certifies_kpp() {
    strict_signs(&certified("kpp", 1.2));
}

#[test]
fn ledger_example_at_five_percent() {
    let spec = preset("nonlocal-kpp-uniform").unwrap();
    let c = 1.2 * linear_speed(&spec).unwrap();
    let base = base_wave(&spec, c).unwrap();
    let p = solve_params(Recipe::Scalar, &spec, &base, 0.05 * c).unwrap();
    assert!(p.ledger_passed());
    // the independent re-check agrees with the stored ledger
    assert_eq!(ledger(&spec, &base, &p).unwrap(), p.ledger);
    let text = ledger_table(&p.ledger);
    assert!(text.lines().count() > 20 && !text.contains("FAIL"));
}

#[test]
fn large_decrement_is_infeasible() {
    let spec = preset("nonlocal-kpp-uniform").unwrap();
    let c = 1.2 * linear_speed(&spec).unwrap();
    let base = base_wave(&spec, c).unwrap();
    assert!(matches!(solve_params(Recipe::Scalar, &spec, &base, 0.9 * c), Err(CertError::LedgerInfeasible(_))));
}

#[test]
fn pushed_minimal_waves_fail_the_hypothesis() {
    let hr = preset("hr-nu4").unwrap();
    let ms = waves::min_speed(&hr, 1e-6).unwrap();
    match solve_params(Recipe::ScalarLocalAnalog, &hr, &ms.wave, 1e-3) {
        Err(CertError::HypothesisUnmet { fitted, expected }) => {
            assert!((fitted - 2f64.sqrt()).abs() < 0.1, "fitted {fitted}");
            assert!((expected - 0.5f64.sqrt()).abs() < 0.05);
        }
        other => panic!("expected HypothesisUnmet, got {other:?}"),
    }
    let lv = ModelSpec::LotkaVolterra { lv: LvParams { d: 1.0, r: 5.0, a: 0.5, b: 5.0 } };
    let ms = waves::min_speed(&lv, 1e-6).unwrap();
    assert!(!ms.pulled);
    assert!(matches!(certify(Recipe::LvBgt1, &lv, &ms.wave), Err(CertError::HypothesisUnmet { .. })));
}

#[test]
fn recipe_must_match_the_model() {
    let spec = preset("lv-weak").unwrap();
    let base = base_wave(&spec, 1.2 * linear_speed(&spec).unwrap()).unwrap();
    assert!(matches!(solve_params(Recipe::LvBgt1, &spec, &base, 1e-3), Err(CertError::WrongRecipe { .. })));
    assert_eq!(Recipe::parse("scalar-local-analog"), Some(Recipe::ScalarLocalAnalog));
}

#[test]
fn critical_delta4_brackets_and_rejects() {
    let spec = preset("lv-critical").unwrap();
    let base = base_wave(&spec, 1.1 * linear_speed(&spec).unwrap()).unwrap();
    let cert = certify(Recipe::LvBeq1, &spec, &base).unwrap();
    let p = &cert.params;
    let d4 = critical_delta4(&base, p.xi2, p.delta2, p.delta3, p.eps4, p.eta2.unwrap()).unwrap();
    assert!(d4 > 0.0 && d4 < p.delta2);
    let f = |z: f64| {
        p.eps4 * (p.delta3 * (z - p.xi2)).sin() + p.eta2.unwrap() * (-z).sqrt() * (1.0 - base.interp_u(z))
    };
    assert!(f(p.xi2 - d4).abs() < 1e-10);
    // sandwich on 1000 interior points
    for j in 1..1000 {
        assert!(f(p.xi2 - d4 + d4 * j as f64 / 1000.0) > 0.0);
    }
    let err = critical_delta4(&base, p.xi2, p.delta2, p.delta3, p.eps4, 1e3 * p.eps4);
    assert!(matches!(err, Err(CertError::SignConditionFailed(_))));
}

#[test]
fn subsolution_at_half_the_minimal_speed() {
    let spec = preset("nonlocal-kpp-uniform").unwrap();
    let c = 0.5 * linear_speed(&spec).unwrap();
    let grid = Grid::with_spacing(-40.0, 0.0, 0.02).unwrap();
    let (f, k) = (spec.nonlinearity().unwrap(), spec.kernel().unwrap());
    let semi = solve_semiwave(k, f, c, &grid, 1e-11).unwrap();
    let (sub, report) = verify_subsolution(&spec, &semi, 0.0).unwrap();
    assert!(report.passed, "{}", report.summary());
    assert!(report.corners.iter().all(|c| c.margin > 0.0 && !c.tangential));
    assert!(report.continuity < 1e-12);
    // zero on [xi1, inf), nonincreasing before
    let xs: Vec<f64> = (0..3000).map(|i| -40.0 + i as f64 * 0.02).collect();
    let v = sub.sample(&xs);
    assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-13));
    assert!(xs.iter().zip(&v).filter(|(x, _)| **x >= 0.0).all(|(_, w)| *w == 0.0));
    // translation
    let moved = build_subsolution(&semi, 10.0);
    for x in [-5.0, -1.3, 0.0, 2.0] {
        assert_eq!(moved.value(x + 10.0), sub.value(x));
    }
}

#[test]
fn constant_one_is_an_equilibrium() {
    let spec = preset("nonlocal-kpp-uniform").unwrap();
    let grid = default_grid(&spec, 1.0).unwrap();
    let one = PiecewiseProfile {
        base: BaseSamples { left: grid.left, h: grid.spacing(), values: vec![1.0; grid.nodes], left_value: 1.0, right_value: 1.0, speed: 1.0 },
        junctions: vec![],
        pieces: vec![Piece::base(Modifier::Zero)],
        clamp: Clamp::Min(1.0),
    };
    for c in [0.3, 1.0, 5.0] {
        let regions = verify_operator(Operator::N1, &one, None, &spec, c, Sign::NonPositive).unwrap();
        assert!(regions.iter().all(|r| r.passed));
    }
}

#[test]
fn reports_serialize() {
    let cert = certified("nonlocal-kpp-uniform", 1.2);
    let js = serde_json::to_string(&cert.params).unwrap();
    let back: CertificateParams = serde_json::from_str(&js).unwrap();
    assert_eq!(back, cert.params);
    let js = serde_json::to_string(&cert.report).unwrap();
    let back: CertificateReport = serde_json::from_str(&js).unwrap();
    assert_eq!(back, cert.report);
    assert!(cert.profile.to_csv().lines().count() > 100);
}

mod properties {
    use super::*;
    use frontlab::waves::WaveProfile;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn nonlocal_base() -> &'static (ModelSpec, WaveProfile) {
        static BASE: OnceLock<(ModelSpec, WaveProfile)> = OnceLock::new();
        BASE.get_or_init(|| {
            let spec = preset("nonlocal-kpp-uniform").unwrap();
            let base = base_wave(&spec, 1.2 * linear_speed(&spec).unwrap()).unwrap();
            (spec, base)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // Whenever the ledger closes, the glued profile is continuous, its
        // junctions are unaffected by delta0 and the ledger re-check agrees.
        #[test]
        fn feasible_ledgers_glue_continuously(frac in 1e-5f64..0.1) {
            let (spec, base) = nonlocal_base();
            if let Ok(p) = solve_params(Recipe::Scalar, spec, base, frac * base.c) {
                let s = build_supersolution(spec, base, &p).unwrap();
                prop_assert!(s.u.continuity_residual() < CONTINUITY_TOL);
                prop_assert_eq!(ledger(spec, base, &p).unwrap(), p.ledger.clone());
                prop_assert!(s.u.junctions.windows(2).all(|w| w[0] < w[1]));
                // the profile never exceeds 1 and stays positive
                let v = s.u.sample(&base.xs());
                prop_assert!(v.iter().all(|w| *w <= 1.0 && *w > 0.0));
            }
        }

        #[test]
        fn corner_verdicts_are_antisymmetric(frac in 1e-4f64..0.02) {
            let (spec, base) = nonlocal_base();
            if let Ok(p) = solve_params(Recipe::Scalar, spec, base, frac * base.c) {
                let s = build_supersolution(spec, base, &p).unwrap();
                let sup = corner_check(&s.u, CornerKind::Super);
                let sub = corner_check(&s.u, CornerKind::Sub);
                for (a, b) in sup.iter().zip(&sub) {
                    prop_assert_eq!(a.margin, -b.margin);
                }
            }
        }
    }
}
