//! Traveling-wave and semi-wave boundary-value solvers, minimal speeds and
//! warm-started continuation in c.

mod lv;
pub(crate) mod newton;
pub mod operator;
mod scalar;
mod semi;
mod speed;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{Family, ModelError, ModelSpec};
use crate::spectral::{self, SpectralError};

pub use semi::{solve_semiwave, SemiWave};
pub use speed::{continuation_family, min_speed, MinSpeed};

/// Default residual bound for accepted profiles.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack on the monotonicity check of accepted profiles. Deep in the far
/// field the centered stencil leaves roundoff-level odd-even noise.
pub const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no convergence at c = {c}: {reason}")]
    NoConvergence { c: f64, reason: String },
    #[error("profile at c = {c} is not monotone at node {node} (xi = {xi})")]
    MonotonicityLost { c: f64, node: usize, xi: f64 },
    #[error("no wave at the upper bracket c = {c}")]
    BracketFailure { c: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub left: f64,
    pub right: f64,
    pub nodes: usize,
}

impl Grid {
    pub fn new(left: f64, right: f64, nodes: usize) -> Result<Self, WaveError> {
        let g = Grid { left, right, nodes };
        g.check()?;
        Ok(g)
    }

    /// Uniform grid with spacing h whose node set contains xi = 0 (when 0 lies
    /// inside). The left end is moved outward to a multiple of h.
    pub fn with_spacing(left: f64, right: f64, h: f64) -> Result<Self, WaveError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(WaveError::InvalidGrid(format!("spacing {h}")));
        }
        let k = (-left / h).ceil();
        let left = -k * h;
        let cells = ((right - left) / h).round() as usize;
        Self::new(left, left + cells as f64 * h, cells + 1)
    }

    fn check(&self) -> Result<(), WaveError> {
        if !(self.left.is_finite() && self.right.is_finite()) {
            return Err(WaveError::InvalidGrid("endpoints must be finite".into()));
        }
        if self.nodes < 3 {
            return Err(WaveError::InvalidGrid(format!("need at least 3 nodes, got {}", self.nodes)));
        }
        if !(self.right > self.left) {
            return Err(WaveError::InvalidGrid(format!("empty interval [{}, {}]", self.left, self.right)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.right - self.left) / (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.left + i as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    /// Node closest to xi.
    pub fn nearest(&self, xi: f64) -> usize {
        let k = ((xi - self.left) / self.spacing()).round();
        k.clamp(0.0, (self.nodes - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub grid: Grid,
    pub c: f64,
    pub family: Family,
    /// W for scalar models, U for Lotka-Volterra.
    pub u: Vec<f64>,
    /// V for Lotka-Volterra.
    pub v: Option<Vec<f64>>,
    pub left_state: (f64, f64),
    pub right_state: (f64, f64),
    /// Max discrete residual over interior nodes, re-evaluated after the solve.
    pub residual: f64,
    pub iterations: usize,
}

impl WaveProfile {
    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs()
    }

    /// Linear interpolation of the first component, extended by the far-field states.
    pub fn interp_u(&self, xi: f64) -> f64 {
        interp(&self.grid, &self.u, self.left_state.0, self.right_state.0, xi)
    }

    pub fn interp_v(&self, xi: f64) -> Option<f64> {
        self.v.as_ref().map(|v| interp(&self.grid, v, self.left_state.1, self.right_state.1, xi))
    }

    /// Position where the first component crosses half of its left state.
    pub fn phase(&self) -> f64 {
        let level = 0.5 * self.left_state.0;
        let xs = self.xs();
        for i in 0..self.u.len() - 1 {
            let (a, b) = (self.u[i], self.u[i + 1]);
            if a >= level && b < level {
                return xs[i] + (a - level) / (a - b) * (xs[i + 1] - xs[i]);
            }
        }
        f64::NAN
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# c = {:.16e}\n", self.c));
        s.push_str(&format!("# family = {}\n", family_name(self.family)));
        s.push_str(&format!("# residual = {:.6e}\n", self.residual));
        let xs = self.xs();
        match &self.v {
            None => {
                s.push_str("xi,W\n");
                for (x, w) in xs.iter().zip(&self.u) {
                    s.push_str(&format!("{x:.16e},{w:.16e}\n"));
                }
            }
            Some(v) => {
                s.push_str("xi,U,V\n");
                for ((x, u), v) in xs.iter().zip(&self.u).zip(v) {
                    s.push_str(&format!("{x:.16e},{u:.16e},{v:.16e}\n"));
                }
            }
        }
        s
    }
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::LocalScalar => "local-scalar",
        Family::NonlocalScalar => "nonlocal-scalar",
        Family::LotkaVolterra => "lotka-volterra",
    }
}

pub(crate) fn interp(grid: &Grid, w: &[f64], left: f64, right: f64, xi: f64) -> f64 {
    if xi <= grid.left {
        return left;
    }
    if xi >= grid.right {
        return right;
    }
    let h = grid.spacing();
    let t = (xi - grid.left) / h;
    let i = (t.floor() as usize).min(grid.nodes - 2);
    let s = t - i as f64;
    w[i] * (1.0 - s) + w[i + 1] * s
}

/// Grid heuristic: wide enough that both boundary layers decay far below the
/// residual tolerance, with spacing suited to the family.
pub fn default_grid(spec: &ModelSpec, c: f64) -> Result<Grid, WaveError> {
    let linear = spectral::linear_speed(spec)?;
    let c_eff = c.max(linear);
    let slow = match spec.lv() {
        Some(lv) => {
            let r = spectral::lv_roots(lv, c_eff)?;
            r.lambda_u.minus().min(r.lambda_v_plus)
        }
        None => spectral::right_roots(spec, c_eff)?.minus(),
    };
    let right = (30.0 / slow).clamp(60.0, 600.0);
    let left = match spec.lv() {
        Some(lv) => match spectral::lv_left_roots(lv, c_eff)? {
            spectral::LeftRoots::Exponential { mu_u_plus, mu_v_plus, .. } => {
                (30.0 / mu_u_plus.min(mu_v_plus)).max(40.0)
            }
            spectral::LeftRoots::Coexistence { nu } => (30.0 / nu).max(40.0),
            spectral::LeftRoots::Polynomial { .. } => 400.0,
        },
        None => (30.0 / spectral::scalar_left_root(spec, c_eff)?).max(40.0),
    };
    let h = match spec {
        ModelSpec::LocalScalar { .. } => 0.01,
        ModelSpec::NonlocalScalar { kernel, .. } => kernel.half_width / 50.0,
        ModelSpec::LotkaVolterra { .. } => 0.02,
    };
    Grid::with_spacing(-left, right, h)
}

/// Solve the traveling-wave problem at speed c on the given grid.
pub fn solve_wave(spec: &ModelSpec, c: f64, grid: &Grid, tol: f64) -> Result<WaveProfile, WaveError> {
    solve_wave_from(spec, c, grid, tol, None)
}

/// As `solve_wave`, but tries the given profile (interpolated onto the grid)
/// as the first initial guess.
pub fn solve_wave_from(
    spec: &ModelSpec,
    c: f64,
    grid: &Grid,
    tol: f64,
    warm: Option<&WaveProfile>,
) -> Result<WaveProfile, WaveError> {
    grid.check()?;
    let report = crate::models::validate(spec);
    if !report.passed() {
        let msg: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(ModelError::Invalid(msg.join("; ")).into());
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(WaveError::NoConvergence { c, reason: "speed must be positive".into() });
    }
    let k0 = grid.nearest(0.0);
    if k0 < 2 || k0 + 3 > grid.nodes {
        return Err(WaveError::InvalidGrid("xi = 0 must lie well inside the grid".into()));
    }
    let linear = spectral::linear_speed(spec)?;
    if c < linear * (1.0 - 1e-9) {
        return Err(WaveError::NoConvergence {
            c,
            reason: format!("below the linear speed {linear}: the right tail would oscillate"),
        });
    }
    match spec {
        ModelSpec::LotkaVolterra { lv } => lv::solve(lv, c, grid, tol, warm),
        _ => scalar::solve(spec, c, grid, tol, warm),
    }
}

/// Monotonicity and range checks shared by the solvers. Monotonicity is
/// checked against the running extremum so that slow drifts spread over many
/// nodes are caught too.
pub(crate) fn check_shape(c: f64, grid: &Grid, w: &[f64], increasing: bool, scale: f64) -> Result<(), WaveError> {
    let sign = if increasing { 1.0 } else { -1.0 };
    let mut ext = sign * w[0];
    for (i, &x) in w.iter().enumerate().skip(1) {
        if sign * x < ext - MONOTONE_TOL {
            return Err(WaveError::MonotonicityLost { c, node: i, xi: grid.x(i) });
        }
        ext = ext.max(sign * x);
    }
    for (i, &x) in w.iter().enumerate() {
        let s = x / scale;
        if !(-0.01..=1.01).contains(&s) {
            return Err(WaveError::MonotonicityLost { c, node: i, xi: grid.x(i) });
        }
    }
    Ok(())
}
