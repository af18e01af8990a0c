use crate::numerics::Banded;

/// A square nonlinear system with a banded Jacobian.
pub(crate) trait System {
    fn residual(&self, z: &[f64]) -> Vec<f64>;
    fn jacobian(&self, z: &[f64]) -> Banded;
}

pub(crate) struct Outcome {
    pub z: Vec<f64>,
    pub iterations: usize,
}

/// Maximum step fraction of each restart rung.
const LADDER: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton with a restart ladder. Each rung restarts from `z0` with a
/// smaller initial step cap that is allowed to grow back after successful steps.
pub(crate) fn solve<S: System>(sys: &S, z0: &[f64], tol: f64) -> Result<Outcome, String> {
    let mut total = 0;
    let mut last_err = String::new();
    for (rung, &cap) in LADDER.iter().enumerate() {
        let max_iter = 60 + 40 * rung;
        match run_rung(sys, z0, tol, cap, max_iter) {
            Ok(mut out) => {
                out.iterations += total;
                return Ok(out);
            }
            Err((iters, msg)) => {
                total += iters;
                last_err = format!("rung {rung}: {msg}");
            }
        }
    }
    Err(format!("damped restart ladder exhausted ({last_err})"))
}

fn run_rung<S: System>(sys: &S, z0: &[f64], tol: f64, cap: f64, max_iter: usize) -> Result<Outcome, (usize, String)> {
    let mut z = z0.to_vec();
    let mut f = sys.residual(&z);
    let mut r = inf_norm(&f);
    let mut r2 = two_norm(&f);
    let mut alpha = cap;
    for it in 0..max_iter {
        if r <= 1e-3 * tol {
            return Ok(Outcome { z, iterations: it });
        }
        let mut dz: Vec<f64> = f.iter().map(|x| -x).collect();
        if let Err(e) = sys.jacobian(&z).solve(&mut dz) {
            return Err((it, e.to_string()));
        }
        let mut accepted = false;
        while alpha >= 1e-4 {
            let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + alpha * b).collect();
            let ft = sys.residual(&trial);
            let rt2 = two_norm(&ft);
            if rt2.is_finite() && rt2 < r2 {
                let step = alpha * inf_norm(&dz);
                z = trial;
                f = ft;
                r = inf_norm(&f);
                r2 = rt2;
                accepted = true;
                alpha = (2.0 * alpha).min(1.0);
                if r <= tol && step <= 1e-10 * (1.0 + inf_norm(&z)) {
                    return Ok(Outcome { z, iterations: it + 1 });
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if r <= tol {
                return Ok(Outcome { z, iterations: it + 1 });
            }
            return Err((it + 1, format!("step rejected at residual {r:.3e}")));
        }
    }
    if r <= tol {
        return Ok(Outcome { z, iterations: max_iter });
    }
    Err((max_iter, format!("iteration limit at residual {r:.3e}")))
}
