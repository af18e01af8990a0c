// Acceptance run: one line per criterion, nonzero exit if any fails.
use frontlab::certificates::{self, CertError, Operator, Recipe};
use frontlab::dynamics::{self, InitialData, SimConfig};
use frontlab::models::{preset, Kernel, LvParams, ModelSpec, Nonlinearity};
use frontlab::spectral::{self, linear_speed, root_residuals, root_set};
use frontlab::tails::{self, Component, Side, Verdict};
use frontlab::waves::{self, default_grid, solve_wave, Grid, DEFAULT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{what}: {e}")
}

fn random_spec(rng: &mut ChaCha8Rng) -> ModelSpec {
    match rng.gen_range(0..3) {
        0 => {
            let nonlinearity = if rng.gen_bool(0.5) { Nonlinearity::Kpp } else { Nonlinearity::HadelerRothe { nu: rng.gen_range(0.0..6.0) } };
            ModelSpec::LocalScalar { nonlinearity }
        }
        1 => {
            let w = rng.gen_range(0.3..3.0);
            let kernel = if rng.gen_bool(0.5) { Kernel::uniform(w) } else { Kernel::triangular(w) };
            ModelSpec::NonlocalScalar { nonlinearity: Nonlinearity::Kpp, kernel }
        }
        _ => {
            let b = match rng.gen_range(0..3) {
                0 => rng.gen_range(0.1..0.95),
                1 => 1.0,
                _ => rng.gen_range(1.05..4.0),
            };
            ModelSpec::LotkaVolterra {
                lv: LvParams { d: rng.gen_range(0.3..3.0), r: rng.gen_range(0.3..3.0), a: rng.gen_range(0.05..0.95), b },
            }
        }
    }
}

fn roots() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let spec = random_spec(&mut rng);
        let lin = linear_speed(&spec).map_err(fail("linear speed"))?;
        let c = lin * rng.gen_range(1.0..3.0);
        let rs = root_set(&spec, c).map_err(fail("root set"))?;
        for (name, r) in root_residuals(&spec, &rs) {
            if !(r.abs() < 1e-10) {
                return Err(format!("{name} residual {r:e} for {spec:?} at c = {c}"));
            }
            worst = worst.max(r.abs());
        }
        let at = root_set(&spec, lin).map_err(fail("root set"))?;
        let near = root_set(&spec, lin * (1.0 + 5e-9)).map_err(fail("root set"))?;
        let off = root_set(&spec, lin * (1.0 + 1e-6)).map_err(fail("root set"))?;
        if !(at.double_root && near.double_root && !off.double_root) {
            return Err(format!("double-root detection wrong for {spec:?}"));
        }
    }
    Ok(format!("worst residual {worst:.1e}"))
}

fn hadeler_rothe() -> Outcome {
    let spec = preset("hr-nu4").unwrap();
    let exact = 2f64.sqrt() + 0.5f64.sqrt();
    let ms = waves::min_speed(&spec, 1e-4).map_err(fail("min speed"))?;
    let w = &ms.wave;
    let shift = w.phase();
    let sup = w
        .xs()
        .iter()
        .zip(&w.u)
        .filter(|(x, _)| (*x - shift).abs() <= 30.0)
        .map(|(x, u)| (u - 1.0 / (1.0 + (2f64.sqrt() * (x - shift)).exp())).abs())
        .fold(0.0, f64::max);
    let fit = tails::fit_tail(&ms.wave, Side::Right, Component::U, None).map_err(fail("tail fit"))?;
    check(
        (ms.c_star - exact).abs() < 1e-2 && sup < 1e-4 && (1.37..=1.46).contains(&fit.rate),
        format!("c* = {:.6}, sup error {sup:.1e}, rate {:.4}", ms.c_star, fit.rate),
    )
}

fn kpp() -> Outcome {
    let spec = preset("kpp").unwrap();
    let ms = waves::min_speed(&spec, 1e-4).map_err(fail("min speed"))?;
    let fit = tails::fit_tail(&ms.wave, Side::Right, Component::U, None).map_err(fail("tail fit"))?;
    let rs = root_set(&spec, ms.c_star).map_err(fail("root set"))?;
    let cl = tails::classify(&spec, ms.c_star, ms.c_star, &rs, &fit);
    let cfg = SimConfig::for_spec(&spec, -60.0, 100.0, 100.0);
    let init = InitialData::Bump { center: 0.0, half_width: 5.0, height: 1.0 };
    let sim = dynamics::simulate(&spec, &init, &cfg).map_err(fail("simulation"))?;
    let s = dynamics::spreading_speed(&sim, 0.5).map_err(fail("speed"))?.speed;
    check(
        (ms.c_star - 2.0).abs() <= 0.01 && cl.verdict == Verdict::Pulled && (fit.rate - 1.0).abs() < 0.05 && (s / 2.0 - 1.0).abs() < 0.05,
        format!("c* = {:.5}, {:?} with rate {:.4}, spreading speed {s:.4}", ms.c_star, cl.verdict, fit.rate),
    )
}

fn nonlocal_speed() -> Outcome {
    // independent oracle: bisection on tanh(l) = l/2
    let g = |l: f64| l.tanh() - 0.5 * l;
    let (mut lo, mut hi) = (1.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l0 = 0.5 * (lo + hi);
    let oracle = l0.sinh() / (l0 * l0);
    let (c0, _) = spectral::linear_speed_nonlocal(&Kernel::uniform(1.0), 1.0).map_err(fail("linear speed"))?;
    let ms = waves::min_speed(&preset("nonlocal-kpp-uniform").unwrap(), 1e-4).map_err(fail("min speed"))?;
    check(
        (c0 - oracle).abs() < 1e-6 && (ms.c_star - c0).abs() < 1e-2,
        format!("c0* = {c0:.10} (oracle {oracle:.10}), min speed {:.5}", ms.c_star),
    )
}

fn noncritical_rates() -> Outcome {
    let mut lines = Vec::new();
    for name in ["kpp", "hr-nu4", "nonlocal-kpp-uniform", "lv-strongweak", "lv-weak", "lv-critical"] {
        let spec = preset(name).unwrap();
        let cs = waves::min_speed(&spec, 1e-6).map_err(fail("min speed"))?.c_star;
        let mut rates = Vec::new();
        for f in [1.1, 1.3] {
            let c = f * cs;
            let w = solve_wave(&spec, c, &default_grid(&spec, c).unwrap(), DEFAULT_TOL).map_err(fail(name))?;
            let fit = tails::fit_tail(&w, Side::Right, Component::U, None).map_err(fail(name))?;
            let lm = root_set(&spec, c).map_err(fail(name))?.lambda_minus.unwrap();
            let err = (fit.rate - lm).abs() / lm;
            if err > 0.03 {
                return Err(format!("{name} at {f}c*: rate {:.4} vs {lm:.4}", fit.rate));
            }
            rates.push(fit.rate);
        }
        if rates[1] >= rates[0] {
            return Err(format!("{name}: rates not decreasing {rates:?}"));
        }
        lines.push(format!("{name} {:.3}>{:.3}", rates[0], rates[1]));
    }
    Ok(lines.join(", "))
}

fn lv_left_tails() -> Outcome {
    let mut lines = Vec::new();
    for name in ["lv-strongweak", "lv-weak", "lv-critical"] {
        let spec = preset(name).unwrap();
        let lv = spec.lv().unwrap();
        let c = 1.2 * linear_speed(&spec).unwrap();
        let w = solve_wave(&spec, c, &default_grid(&spec, c).unwrap(), DEFAULT_TOL).map_err(fail(name))?;
        let rep = tails::left_tail_report(&w, lv, c).map_err(fail(name))?;
        if !rep.passed() {
            return Err(format!("{name}: {:?}", rep.checks));
        }
        let worst = rep.checks.iter().filter(|k| k.expected != 0.0).map(|k| k.rel_error).fold(0.0, f64::max);
        lines.push(format!("{name} {worst:.1e}"));
    }
    Ok(format!("worst relative errors: {}", lines.join(", ")))
}

fn certificates() -> Outcome {
    let mut lines = Vec::new();
    for (name, f) in [("nonlocal-kpp-uniform", 1.2), ("lv-strongweak", 1.3), ("lv-weak", 1.3), ("lv-critical", 1.3)] {
        let spec = preset(name).unwrap();
        let c = f * linear_speed(&spec).unwrap();
        let base = certificates::base_wave(&spec, c).map_err(fail(name))?;
        let cert = certificates::certify(Recipe::for_spec(&spec), &spec, &base).map_err(fail(name))?;
        let signs = cert.report.regions.iter().filter(|r| !r.clamped && !r.roundoff).all(|r| match r.operator {
            Operator::N1 | Operator::N2 => r.worst < 0.0,
            Operator::N3 => r.worst > 0.0,
        });
        if !(cert.params.ledger_passed() && cert.report.passed && cert.report.strict && signs) {
            return Err(format!("{name}:\n{}", cert.report.summary()));
        }
        lines.push(format!("{name} ok"));
    }
    let hr = preset("hr-nu4").unwrap();
    let ms = waves::min_speed(&hr, 1e-6).map_err(fail("min speed"))?;
    match certificates::solve_params(Recipe::ScalarLocalAnalog, &hr, &ms.wave, 1e-3) {
        Err(CertError::HypothesisUnmet { .. }) => lines.push("hr-nu4 HypothesisUnmet".into()),
        other => return Err(format!("hr-nu4: expected HypothesisUnmet, got {other:?}")),
    }
    Ok(lines.join(", "))
}

fn subsolution() -> Outcome {
    let spec = preset("nonlocal-kpp-uniform").unwrap();
    let c = 0.5 * linear_speed(&spec).unwrap();
    let grid = Grid::with_spacing(-40.0, 0.0, 0.02).unwrap();
    let semi = waves::solve_semiwave(spec.kernel().unwrap(), spec.nonlinearity().unwrap(), c, &grid, 1e-11).map_err(fail("semi-wave"))?;
    let (_, rep) = certificates::verify_subsolution(&spec, &semi, 0.0).map_err(fail("verification"))?;
    let convex = rep.corners.iter().all(|k| k.margin > 0.0 && !k.tangential);
    check(rep.passed && convex && !rep.corners.is_empty(), format!("{} regions, kink margin {:.3e}", rep.regions.len(), rep.corners.first().map_or(f64::NAN, |k| k.margin)))
}

fn random_pair(lv: bool, rng: &mut ChaCha8Rng) -> (InitialData, InitialData) {
    let x: Vec<f64> = (0..=20).map(|i| -10.0 + i as f64).collect();
    let mut lo_u: Vec<f64> = x.iter().map(|_| rng.gen::<f64>()).collect();
    let mut up_u: Vec<f64> = lo_u.iter().map(|&a| a + rng.gen::<f64>() * (1.0 - a)).collect();
    for w in [&mut up_u, &mut lo_u] {
        w[0] = 0.0;
        w[20] = 0.0;
    }
    // the competitor is ordered the other way
    let (up_v, lo_v) = if lv {
        let mut up: Vec<f64> = x.iter().map(|_| rng.gen::<f64>()).collect();
        let mut lo: Vec<f64> = up.iter().map(|&a| a + rng.gen::<f64>() * (1.0 - a)).collect();
        for v in [&mut up, &mut lo] {
            v[0] = 1.0;
            v[20] = 1.0;
        }
        (Some(up), Some(lo))
    } else {
        (None, None)
    };
    (InitialData::Table { x: x.clone(), u: up_u, v: up_v }, InitialData::Table { x, u: lo_u, v: lo_v })
}

fn comparison() -> Outcome {
    let mut worst = f64::INFINITY;
    for (k, name) in ["hr-nu4", "nonlocal-kpp-uniform", "lv-strongweak"].iter().enumerate() {
        let spec = preset(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let pairs: Vec<_> = (0..50).map(|_| random_pair(spec.lv().is_some(), &mut rng)).collect();
        let mut cfg = SimConfig::for_spec(&spec, -30.0, 30.0, 5.0);
        cfg.grow_margin = 0.0;
        for (i, r) in dynamics::comparison_batch(&spec, &pairs, &cfg).into_iter().enumerate() {
            let r = r.map_err(fail(name))?;
            if !(r.preserved && r.min_difference >= -1e-6) {
                return Err(format!("{name} pair {i}: min difference {:e}", r.min_difference));
            }
            worst = worst.min(r.min_difference);
        }
    }
    let rep = dynamics::lv_two_wave_experiment(&preset("lv-strongweak").unwrap(), 1.3, 100.0).map_err(fail("two waves"))?;
    check(
        rep.ordering.preserved && rep.separation_error < 0.1,
        format!("min difference {worst:.1e}, separation {:.4} vs {:.4}", rep.separation, rep.c_hat - rep.c_star),
    )
}

fn discretization_order() -> Outcome {
    let spec = preset("kpp").unwrap();
    let solve = |h: f64| solve_wave(&spec, 2.5, &Grid::with_spacing(-40.0, 80.0, h).unwrap(), DEFAULT_TOL);
    let (a, b, c) = (solve(0.04).map_err(fail("h"))?, solve(0.02).map_err(fail("h/2"))?, solve(0.01).map_err(fail("h/4"))?);
    let diff = |p: &waves::WaveProfile, q: &waves::WaveProfile| {
        p.xs().iter().zip(&p.u).filter(|(x, _)| x.abs() <= 20.0).map(|(x, u)| (u - q.interp_u(*x)).abs()).fold(0.0, f64::max)
    };
    let order = (diff(&a, &b) / diff(&b, &c)).log2();
    check(order >= 1.8, format!("observed order {order:.3}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("root correctness", roots),
        ("pushed-wave oracle", hadeler_rothe),
        ("pulled oracle", kpp),
        ("nonlocal linear speed", nonlocal_speed),
        ("noncritical slow decay", noncritical_rates),
        ("LV left tails", lv_left_tails),
        ("certificate soundness", certificates),
        ("sub-solution", subsolution),
        ("comparison principle", comparison),
        ("discretization order", discretization_order),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("criterion {:>2} PASS {name} ({secs:.1} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1} s): {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
