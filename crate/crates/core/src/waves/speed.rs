use serde::{Deserialize, Serialize};

use super::{default_grid, solve_wave_from, Grid, WaveError, WaveProfile, DEFAULT_TOL};
use crate::models::ModelSpec;
use crate::spectral;

/// Number of doublings of the bracket width tried before giving up.
const BRACKET_TRIES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinSpeed {
    pub c_star: f64,
    pub linear_speed: f64,
    /// c* equals the linear speed (within the speed tolerance).
    pub pulled: bool,
    pub wave: WaveProfile,
    /// Number of wave solves spent.
    pub evaluations: usize,
}

/// Minimal wave speed by bisection on the existence predicate (converged,
/// monotone, residual below tolerance). When the wave at the linear speed
/// exists the answer is exactly the linear speed.
pub fn min_speed(spec: &ModelSpec, tol: f64) -> Result<MinSpeed, WaveError> {
    let linear = spectral::linear_speed(spec)?;
    let grid = default_grid(spec, linear)?;
    let mut evaluations = 1;
    if let Ok(wave) = solve_wave_from(spec, linear, &grid, DEFAULT_TOL, None) {
        return Ok(MinSpeed { c_star: linear, linear_speed: linear, pulled: true, wave, evaluations });
    }
    let mut lo = linear;
    let mut found = None;
    for k in 0..BRACKET_TRIES {
        let c = linear * (1.0 + 0.1 * 2f64.powi(k as i32));
        evaluations += 1;
        match solve_wave_from(spec, c, &grid, DEFAULT_TOL, None) {
            Ok(w) => {
                found = Some((c, w));
                break;
            }
            Err(_) => lo = c,
        }
    }
    let Some((mut hi, mut wave)) = found else {
        return Err(WaveError::BracketFailure { c: linear * (1.0 + 0.1 * 2f64.powi(BRACKET_TRIES as i32 - 1)) });
    };
    // Refine well past `tol`: above c* a pushed wave carries a slow mode with
    // amplitude proportional to c - c*, which would spoil its tail.
    let target = tol.min(1e-10 * linear);
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        match solve_wave_from(spec, mid, &grid, DEFAULT_TOL, Some(&wave)) {
            Ok(w) => {
                hi = mid;
                wave = w;
            }
            Err(_) => lo = mid,
        }
    }
    Ok(MinSpeed { c_star: hi, linear_speed: linear, pulled: false, wave, evaluations })
}

/// Warm-started sweep over the given speeds on one common grid.
pub fn continuation_family(spec: &ModelSpec, cs: &[f64]) -> Vec<Result<WaveProfile, WaveError>> {
    if cs.is_empty() {
        return Vec::new();
    }
    let grid = match common_grid(spec, cs) {
        Ok(g) => g,
        Err(e) => return cs.iter().map(|_| Err(e.clone())).collect(),
    };
    let mut out = Vec::with_capacity(cs.len());
    let mut prev: Option<WaveProfile> = None;
    for &c in cs {
        let r = solve_wave_from(spec, c, &grid, DEFAULT_TOL, prev.as_ref());
        if let Ok(w) = &r {
            prev = Some(w.clone());
        }
        out.push(r);
    }
    out
}

fn common_grid(spec: &ModelSpec, cs: &[f64]) -> Result<Grid, WaveError> {
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let a = default_grid(spec, lo)?;
    let b = default_grid(spec, hi)?;
    Grid::with_spacing(a.left.min(b.left), a.right.max(b.right), a.spacing().min(b.spacing()))
}
