//! Cauchy-problem simulation, front tracking, spreading speeds and ordering
//! experiments. All steppers are monotone under the step bound of
//! `SimConfig::stable_dt`, so the discrete comparison principle holds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{ModelSpec, Nonlinearity};
use crate::numerics::lsq::line_fit;
use crate::numerics::tridiag::TridiagFactor;
use crate::waves::operator::ConvolutionWeights;
use crate::waves::{self, WaveError, WaveProfile};

/// Allowed excursion outside the invariant region before a run is aborted.
pub const BLOWUP_TOL: f64 = 1e-3;
/// Samples used for the Lipschitz bound of f.
const LIP_SAMPLES: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("solution left the invariant region by {excess:.3e} at t = {t}")]
    BlowUp { t: f64, excess: f64 },
    #[error("no crossing of level {level}")]
    NoCrossing { level: f64 },
    #[error("need at least {need} front samples in the window, have {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("initial data not ordered: min difference {min:.3e}")]
    Unordered { min: f64 },
    #[error(transparent)]
    Wave(#[from] WaveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    /// Crank-Nicolson diffusion with explicit reaction (local and Lotka-Volterra).
    CrankNicolson,
    /// Two-stage strong-stability-preserving Runge-Kutta (nonlocal).
    SspRk2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub left: f64,
    pub right: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Interval between recorded front positions.
    pub record_every: f64,
    /// Front level as a fraction of the state behind the front.
    pub level: f64,
    pub stepper: Stepper,
    /// Extend the domain when the front comes closer than this to the right end
    /// (0 disables growth).
    pub grow_margin: f64,
}

impl SimConfig {
    /// Default configuration for the family on [left, right].
    pub fn for_spec(spec: &ModelSpec, left: f64, right: f64, t_final: f64) -> Self {
        let dx = match spec.kernel() {
            Some(k) => k.half_width / 10.0,
            None => 0.1,
        };
        let stepper = if spec.kernel().is_some() { Stepper::SspRk2 } else { Stepper::CrankNicolson };
        let mut cfg = SimConfig {
            left,
            right,
            dx,
            dt: 0.0,
            t_final,
            record_every: 0.5,
            level: 0.5,
            stepper,
            grow_margin: 50.0,
        };
        cfg.dt = 0.9 * Self::stable_dt(spec, dx);
        cfg
    }

    /// Largest step for which the scheme is monotone: the explicit part of each
    /// update must be nondecreasing in every unknown.
    pub fn stable_dt(spec: &ModelSpec, dx: f64) -> f64 {
        match spec {
            ModelSpec::LocalScalar { nonlinearity } => 1.0 / (1.0 / (dx * dx) + decay_bound(nonlinearity)),
            ModelSpec::NonlocalScalar { nonlinearity, .. } => (1.0 / (1.0 + decay_bound(nonlinearity))).min(0.2),
            ModelSpec::LotkaVolterra { lv } => {
                let du = 1.0 / (1.0 / (dx * dx) + 1.0 + lv.a);
                let dv = 1.0 / (lv.d / (dx * dx) + lv.r * (1.0 + lv.b));
                du.min(dv)
            }
        }
    }

    fn validate(&self, spec: &ModelSpec) -> Result<(), DynError> {
        let bad = |m: String| Err(DynError::InvalidConfig(m));
        if !(self.dx > 0.0 && self.dt > 0.0 && self.t_final > 0.0 && self.record_every > 0.0) {
            return bad("dx, dt, t_final and record_every must be positive".into());
        }
        if !(self.left.is_finite() && self.right.is_finite() && self.right - self.left >= 3.0 * self.dx) {
            return bad(format!("bad domain [{}, {}]", self.left, self.right));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("front level {} outside (0,1)", self.level));
        }
        let want = if spec.kernel().is_some() { Stepper::SspRk2 } else { Stepper::CrankNicolson };
        if self.stepper != want {
            return bad(format!("stepper {:?} does not fit this family", self.stepper));
        }
        let bound = Self::stable_dt(spec, self.dx);
        if self.dt > bound * (1.0 + 1e-12) {
            return bad(format!("dt = {} exceeds the monotonicity bound {bound}", self.dt));
        }
        Ok(())
    }
}

/// max(0, -min f') on [0, 1].
fn decay_bound(f: &Nonlinearity) -> f64 {
    (0..=LIP_SAMPLES).map(|i| -f.df(i as f64 / LIP_SAMPLES as f64)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// Spatially constant state (v only for Lotka-Volterra).
    Constant { u: f64, v: Option<f64> },
    /// Indicator of [center - half_width, center + half_width] times height; v = 1.
    Bump { center: f64, half_width: f64, height: f64 },
    /// Left state for x < position, right state beyond.
    Step { position: f64 },
    /// Wave profile translated by `shift`, with exponential tails beyond its grid.
    Profile { profile: Box<WaveProfile>, shift: f64 },
    /// Compactly supported tent in u of given height and half-width; v = 1.
    LvCompact { height: f64, half_width: f64 },
    /// Piecewise-linear data through the given points, constant outside.
    Table { x: Vec<f64>, u: Vec<f64>, v: Option<Vec<f64>> },
}

impl InitialData {
    /// (u, v) at x; v is ignored for scalar models.
    pub fn eval(&self, spec: &ModelSpec, x: f64) -> (f64, f64) {
        let (l, r) = (spec.left_state(), spec.right_state());
        let v_rest = if spec.lv().is_some() { 1.0 } else { 0.0 };
        match self {
            InitialData::Constant { u, v } => (*u, v.unwrap_or(v_rest)),
            InitialData::Bump { center, half_width, height } => {
                let u = if (x - center).abs() <= *half_width { *height } else { 0.0 };
                (u, v_rest)
            }
            InitialData::Step { position } => {
                if x < *position {
                    l
                } else {
                    r
                }
            }
            InitialData::Profile { profile, shift } => profile_value(profile, x - shift),
            InitialData::LvCompact { height, half_width } => (height * (1.0 - x.abs() / half_width).max(0.0), v_rest),
            InitialData::Table { x: xs, u, v } => {
                let u = table(xs, u, x);
                let v = v.as_ref().map_or(v_rest, |v| table(xs, v, x));
                (u, v)
            }
        }
    }
}

fn table(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let k = xs.partition_point(|&t| t <= x) - 1;
    let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] * (1.0 - s) + ys[k + 1] * s
}

/// Profile value with exponential extrapolation of the deviations beyond the grid.
fn profile_value(p: &WaveProfile, xi: f64) -> (f64, f64) {
    let g = &p.grid;
    let inside = |xi: f64| (p.interp_u(xi), p.interp_v(xi).unwrap_or(0.0));
    if xi >= g.left && xi <= g.right {
        return inside(xi);
    }
    let n = g.nodes;
    let k = 10.min(n / 4).max(1);
    let (i0, i1, limit, dist) = if xi > g.right {
        (n - 1 - k, n - 1, p.right_state, xi - g.right)
    } else {
        (k, 0, p.left_state, g.left - xi)
    };
    let span = (g.x(i1) - g.x(i0)).abs();
    let ext = |a: f64, b: f64, lim: f64| {
        let (da, db) = (a - lim, b - lim);
        if da == 0.0 || db == 0.0 || da.signum() != db.signum() || db.abs() >= da.abs() {
            return lim;
        }
        let rate = (da / db).ln() / span;
        lim + db * (-rate * dist).exp()
    };
    let u = ext(p.u[i0], p.u[i1], limit.0);
    let v = match &p.v {
        Some(v) => ext(v[i0], v[i1], limit.1),
        None => 0.0,
    };
    (u, v)
}

/// Far-field ghost values (left, right) for (u, v).
fn ghosts(spec: &ModelSpec, init: &InitialData, left: f64, right: f64) -> ((f64, f64), (f64, f64)) {
    match init {
        InitialData::Step { .. } => (spec.left_state(), spec.right_state()),
        InitialData::Profile { profile, .. } => (profile.left_state, profile.right_state),
        _ => (init.eval(spec, left - 1e9), init.eval(spec, right + 1e9)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub left: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    pub v: Option<Vec<f64>>,
}

impl Snapshot {
    pub fn xs(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.left + i as f64 * self.dx).collect()
    }
}

/// Rightmost downward crossing of `level`, linearly interpolated.
pub fn front_position(xs: &[f64], w: &[f64], level: f64) -> Result<f64, DynError> {
    for i in (0..w.len().saturating_sub(1)).rev() {
        let (a, b) = (w[i], w[i + 1]);
        if a >= level && b < level {
            return Ok(xs[i] + (a - level) / (a - b) * (xs[i + 1] - xs[i]));
        }
    }
    Err(DynError::NoCrossing { level })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub fronts: Vec<f64>,
    /// Slope over the trailing half of the run, when enough fronts were recorded.
    pub speed: Option<SpeedEstimate>,
    pub final_state: Snapshot,
    /// Largest excursion outside the invariant region seen during the run.
    pub max_violation: f64,
    pub steps: usize,
}

impl SimResult {
    pub fn fronts_csv(&self) -> String {
        let mut s = String::from("t,x_f\n");
        for (t, x) in self.times.iter().zip(&self.fronts) {
            s.push_str(&format!("{t:.16e},{x:.16e}\n"));
        }
        s
    }
}

pub const MIN_SPEED_SAMPLES: usize = 10;

/// Least-squares slope of x_f(t) over the trailing `window` fraction of the run.
pub fn spreading_speed(result: &SimResult, window: f64) -> Result<SpeedEstimate, DynError> {
    speed_from(&result.times, &result.fronts, window)
}

pub fn speed_from(times: &[f64], fronts: &[f64], window: f64) -> Result<SpeedEstimate, DynError> {
    let t_end = times.last().copied().unwrap_or(0.0);
    let t0 = t_end * (1.0 - window.clamp(0.0, 1.0));
    let (ts, xs): (Vec<f64>, Vec<f64>) = times.iter().zip(fronts).filter(|(t, _)| **t >= t0).map(|(t, x)| (*t, *x)).unzip();
    if ts.len() < MIN_SPEED_SAMPLES {
        return Err(DynError::InsufficientData { have: ts.len(), need: MIN_SPEED_SAMPLES });
    }
    let fit = line_fit(&ts, &xs).ok_or(DynError::InsufficientData { have: ts.len(), need: MIN_SPEED_SAMPLES })?;
    Ok(SpeedEstimate { speed: fit.slope, stderr: fit.slope_stderr, samples: ts.len() })
}

/// Explicit-part diffusion coefficients for CN on a uniform grid.
struct Cn {
    factor: TridiagFactor,
    k: f64,
}

impl Cn {
    fn new(n: usize, d: f64, dx: f64, dt: f64) -> Self {
        let k = 0.5 * dt * d / (dx * dx);
        let a = vec![-k; n];
        let b = vec![1.0 + 2.0 * k; n];
        let c = vec![-k; n];
        Cn { factor: TridiagFactor::new(&a, &b, &c), k }
    }

    /// One step of (I - k D2) w+ = (I + k D2) w + dt r with Dirichlet ghosts.
    fn step(&self, w: &mut [f64], react: &[f64], dt: f64, gl: f64, gr: f64) {
        let n = w.len();
        let k = self.k;
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let wl = if i == 0 { gl } else { w[i - 1] };
            let wr = if i + 1 == n { gr } else { w[i + 1] };
            rhs[i] = w[i] + k * (wl - 2.0 * w[i] + wr) + dt * react[i];
        }
        rhs[0] += k * gl;
        rhs[n - 1] += k * gr;
        self.factor.solve(&mut rhs);
        w.copy_from_slice(&rhs);
    }
}

/// Nonlocal dispersal J * w - w with ghost extension.
pub fn dispersal(conv: &ConvolutionWeights, w: &[f64], gl: f64, gr: f64) -> Vec<f64> {
    conv.apply(w, gl, gr).iter().zip(w).map(|(a, b)| a - b).collect()
}

struct Sim<'a> {
    spec: &'a ModelSpec,
    cfg: &'a SimConfig,
    left: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    gl: (f64, f64),
    gr: (f64, f64),
    t: f64,
    conv: Option<ConvolutionWeights>,
    cn: Option<(Cn, Option<Cn>)>,
    max_violation: f64,
    steps: usize,
}

impl<'a> Sim<'a> {
    fn new(spec: &'a ModelSpec, init: &InitialData, cfg: &'a SimConfig) -> Self {
        let n = ((cfg.right - cfg.left) / cfg.dx).round() as usize + 1;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = init.eval(spec, cfg.left + i as f64 * cfg.dx);
            u.push(a);
            v.push(b);
        }
        let (gl, gr) = ghosts(spec, init, cfg.left, cfg.right);
        let conv = spec.kernel().map(|k| ConvolutionWeights::new(k, cfg.dx));
        let mut sim = Sim { spec, cfg, left: cfg.left, u, v, gl, gr, t: 0.0, conv, cn: None, max_violation: 0.0, steps: 0 };
        sim.refactor();
        sim.max_violation = sim.violation();
        sim
    }

    fn refactor(&mut self) {
        let n = self.u.len();
        let (dx, dt) = (self.cfg.dx, self.cfg.dt);
        self.cn = match self.spec {
            ModelSpec::LocalScalar { .. } => Some((Cn::new(n, 1.0, dx, dt), None)),
            ModelSpec::LotkaVolterra { lv } => Some((Cn::new(n, 1.0, dx, dt), Some(Cn::new(n, lv.d, dx, dt)))),
            ModelSpec::NonlocalScalar { .. } => None,
        };
    }

    fn xs(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.left + i as f64 * self.cfg.dx).collect()
    }

    fn right(&self) -> f64 {
        self.left + (self.u.len() - 1) as f64 * self.cfg.dx
    }

    fn level(&self) -> f64 {
        self.cfg.level * self.spec.left_state().0
    }

    fn front(&self) -> Option<f64> {
        front_position(&self.xs(), &self.u, self.level()).ok()
    }

    fn violation(&self) -> f64 {
        let out = |x: f64| (-x).max(x - 1.0).max(0.0);
        let mut m = self.u.iter().fold(0.0f64, |m, &x| m.max(out(x)));
        if self.spec.lv().is_some() {
            m = self.v.iter().fold(m, |m, &x| m.max(out(x)));
        }
        m
    }

    /// Extend the right end by `extra` length, continuing the current tails
    /// exponentially toward the right ghost values.
    fn grow(&mut self, extra: f64) {
        let dx = self.cfg.dx;
        let add = (extra / dx).ceil() as usize;
        let n = self.u.len();
        let k = 10.min(n / 4).max(1);
        let cont = |w: &[f64], lim: f64, j: usize| {
            let (a, b) = (w[n - 1 - k] - lim, w[n - 1] - lim);
            if a == 0.0 || b == 0.0 || a.signum() != b.signum() || b.abs() >= a.abs() {
                return lim;
            }
            let rate = (a / b).ln() / (k as f64 * dx);
            lim + b * (-rate * j as f64 * dx).exp()
        };
        let (u0, v0) = (self.u.clone(), self.v.clone());
        for j in 1..=add {
            self.u.push(cont(&u0, self.gr.0, j));
            self.v.push(cont(&v0, self.gr.1, j));
        }
        self.refactor();
    }

    fn step(&mut self) -> Result<(), DynError> {
        let dt = self.cfg.dt;
        match self.spec {
            ModelSpec::LocalScalar { nonlinearity } => {
                let r: Vec<f64> = self.u.iter().map(|&w| nonlinearity.f(w)).collect();
                let (cn, _) = self.cn.as_ref().unwrap();
                cn.step(&mut self.u, &r, dt, self.gl.0, self.gr.0);
            }
            ModelSpec::LotkaVolterra { lv } => {
                let (ru, rv): (Vec<f64>, Vec<f64>) = self.u.iter().zip(&self.v).map(|(&a, &b)| lv.reaction(a, b)).unzip();
                let (cu, cv) = self.cn.as_ref().unwrap();
                cu.step(&mut self.u, &ru, dt, self.gl.0, self.gr.0);
                cv.as_ref().unwrap().step(&mut self.v, &rv, dt, self.gl.1, self.gr.1);
            }
            ModelSpec::NonlocalScalar { nonlinearity, .. } => {
                let conv = self.conv.as_ref().unwrap();
                let rhs = |w: &[f64]| -> Vec<f64> {
                    dispersal(conv, w, self.gl.0, self.gr.0).iter().zip(w).map(|(d, &x)| d + nonlinearity.f(x)).collect()
                };
                let k1 = rhs(&self.u);
                let w1: Vec<f64> = self.u.iter().zip(&k1).map(|(w, k)| w + dt * k).collect();
                let k2 = rhs(&w1);
                for i in 0..self.u.len() {
                    self.u[i] = 0.5 * self.u[i] + 0.5 * (w1[i] + dt * k2[i]);
                }
            }
        }
        self.t += dt;
        self.steps += 1;
        let viol = self.violation();
        self.max_violation = self.max_violation.max(viol);
        if !(viol <= BLOWUP_TOL) {
            return Err(DynError::BlowUp { t: self.t, excess: viol });
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            left: self.left,
            dx: self.cfg.dx,
            u: self.u.clone(),
            v: self.spec.lv().map(|_| self.v.clone()),
        }
    }

    fn needs_growth(&self) -> bool {
        self.cfg.grow_margin > 0.0 && self.front().is_some_and(|x| x > self.right() - self.cfg.grow_margin)
    }

    fn result(self, times: Vec<f64>, fronts: Vec<f64>) -> SimResult {
        let speed = speed_from(&times, &fronts, 0.5).ok();
        SimResult { speed, final_state: self.snapshot(), max_violation: self.max_violation, steps: self.steps, times, fronts }
    }
}

fn step_count(cfg: &SimConfig) -> (usize, usize) {
    let total = (cfg.t_final / cfg.dt).ceil() as usize;
    let every = ((cfg.record_every / cfg.dt).round() as usize).max(1);
    (total, every)
}

/// Simulate the Cauchy problem from the given initial data.
pub fn simulate(spec: &ModelSpec, init: &InitialData, cfg: &SimConfig) -> Result<SimResult, DynError> {
    cfg.validate(spec)?;
    let mut sim = Sim::new(spec, init, cfg);
    let (total, every) = step_count(cfg);
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    for k in 1..=total {
        sim.step()?;
        if k % every == 0 || k == total {
            if let Some(x) = sim.front() {
                times.push(sim.t);
                fronts.push(x);
            }
            if sim.needs_growth() {
                sim.grow(2.0 * cfg.grow_margin);
            }
        }
    }
    Ok(sim.result(times, fronts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    /// min over recorded (t, x) of u_upper - u_lower (and v_lower - v_upper).
    pub min_difference: f64,
    pub at_time: f64,
    pub at_x: f64,
    pub preserved: bool,
    pub upper_speed: Option<SpeedEstimate>,
    pub lower_speed: Option<SpeedEstimate>,
    pub upper: SimResult,
    pub lower: SimResult,
}

/// Tolerance for ordered initial data and for the ordering verdict.
pub const ORDER_TOL: f64 = 1e-6;

fn min_order(a: &Sim, b: &Sim) -> (f64, usize) {
    let lv = a.spec.lv().is_some();
    let mut best = (f64::INFINITY, 0);
    for i in 0..a.u.len() {
        let mut d = a.u[i] - b.u[i];
        if lv {
            d = d.min(b.v[i] - a.v[i]);
        }
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// Run two ordered initial data side by side on the same grid and report the
/// smallest ordered difference seen at any step.
pub fn comparison_experiment(
    spec: &ModelSpec,
    upper: &InitialData,
    lower: &InitialData,
    cfg: &SimConfig,
) -> Result<OrderingReport, DynError> {
    cfg.validate(spec)?;
    let mut a = Sim::new(spec, upper, cfg);
    let mut b = Sim::new(spec, lower, cfg);
    let (m0, i0) = min_order(&a, &b);
    if m0 < -ORDER_TOL {
        return Err(DynError::Unordered { min: m0 });
    }
    let mut worst = (m0, 0.0, a.left + i0 as f64 * cfg.dx);
    let (total, every) = step_count(cfg);
    let (mut ta, mut fa, mut tb, mut fb) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 1..=total {
        a.step()?;
        b.step()?;
        let (m, i) = min_order(&a, &b);
        if m < worst.0 {
            worst = (m, a.t, a.left + i as f64 * cfg.dx);
        }
        if k % every == 0 || k == total {
            if let Some(x) = a.front() {
                ta.push(a.t);
                fa.push(x);
            }
            if let Some(x) = b.front() {
                tb.push(b.t);
                fb.push(x);
            }
            if a.needs_growth() || b.needs_growth() {
                a.grow(2.0 * cfg.grow_margin);
                b.grow(2.0 * cfg.grow_margin);
            }
        }
    }
    let upper = a.result(ta, fa);
    let lower = b.result(tb, fb);
    Ok(OrderingReport {
        min_difference: worst.0,
        at_time: worst.1,
        at_x: worst.2,
        preserved: worst.0 >= -ORDER_TOL,
        upper_speed: upper.speed,
        lower_speed: lower.speed,
        upper,
        lower,
    })
}

/// Run many independent experiments in parallel.
pub fn comparison_batch(
    spec: &ModelSpec,
    pairs: &[(InitialData, InitialData)],
    cfg: &SimConfig,
) -> Vec<Result<OrderingReport, DynError>> {
    pairs.par_iter().map(|(u, l)| comparison_experiment(spec, u, l, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoWaveReport {
    pub c_star: f64,
    pub c_hat: f64,
    /// Shift h of the minimal wave in the lower datum (U*, V*)(x - h).
    pub shift: f64,
    pub initial_margin: f64,
    pub ordering: OrderingReport,
    /// Measured speed difference of the two runs.
    pub separation: f64,
    /// |separation - (c_hat - c_star)| / (c_hat - c_star)
    pub separation_error: f64,
}

/// Two-wave Lotka-Volterra experiment: the faster wave (U^, V^) at c_hat above
/// the minimal wave (U*, V*)(x - h), with h the smallest backward shift that
/// orders the data. Both runs keep their own speed.
pub fn lv_two_wave_experiment(spec: &ModelSpec, c_hat_factor: f64, t_final: f64) -> Result<TwoWaveReport, DynError> {
    if spec.lv().is_none() {
        return Err(DynError::InvalidConfig("two-wave experiment needs a Lotka-Volterra model".into()));
    }
    let ms = waves::min_speed(spec, 1e-6)?;
    let c_star = ms.c_star;
    let c_hat = c_hat_factor * c_star;
    let fast = waves::solve_wave(spec, c_hat, &waves::default_grid(spec, c_hat)?, waves::DEFAULT_TOL)?;
    let slow = ms.wave;
    let left = -100.0;
    let right = 60.0 + c_hat * t_final + 50.0;
    let mut cfg = SimConfig::for_spec(spec, left, right, t_final);
    cfg.grow_margin = 0.0;
    let upper = InitialData::Profile { profile: Box::new(fast), shift: 0.0 };
    let n = ((right - left) / cfg.dx).round() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| left + i as f64 * cfg.dx).collect();
    let up: Vec<(f64, f64)> = xs.iter().map(|&x| upper.eval(spec, x)).collect();
    let margin = |h: f64| {
        let lower = InitialData::Profile { profile: Box::new(slow.clone()), shift: h };
        xs.iter()
            .zip(&up)
            .map(|(&x, &(u1, v1))| {
                let (u2, v2) = lower.eval(spec, x);
                (u1 - u2).min(v2 - v1)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut shift = None;
    for k in 0..=80 {
        let h = -(k as f64) * 0.5;
        let m = margin(h);
        if m >= -1e-12 {
            shift = Some((h, m));
            break;
        }
    }
    let (h, m) = shift.ok_or(DynError::Unordered { min: margin(-40.0) })?;
    let lower = InitialData::Profile { profile: Box::new(slow), shift: h };
    let ordering = comparison_experiment(spec, &upper, &lower, &cfg)?;
    let (su, sl) = match (ordering.upper_speed, ordering.lower_speed) {
        (Some(a), Some(b)) => (a.speed, b.speed),
        _ => return Err(DynError::InsufficientData { have: 0, need: MIN_SPEED_SAMPLES }),
    };
    let separation = su - sl;
    let expect = c_hat - c_star;
    Ok(TwoWaveReport {
        c_star,
        c_hat,
        shift: h,
        initial_margin: m,
        separation,
        separation_error: (separation - expect).abs() / expect,
        ordering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::preset;

    #[test]
    fn crossing_of_step() {
        let xs = [-1.0, 0.0, 1.0];
        let w = [1.0, 1.0, 0.0];
        assert!((front_position(&xs, &w, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(front_position(&xs, &[1.0, 1.0, 1.0], 0.5), Err(DynError::NoCrossing { .. })));
    }

    #[test]
    fn linear_fronts_give_exact_speed() {
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let x: Vec<f64> = t.iter().map(|t| 2.0 * t + 3.0).collect();
        let s = speed_from(&t, &x, 1.0).unwrap();
        assert!((s.speed - 2.0).abs() < 1e-12);
        assert!(matches!(speed_from(&t[..5], &x[..5], 1.0), Err(DynError::InsufficientData { .. })));
    }

    #[test]
    fn unstable_step_rejected() {
        let spec = preset("kpp").unwrap();
        let mut cfg = SimConfig::for_spec(&spec, -10.0, 10.0, 1.0);
        cfg.dt = 1.0;
        assert!(matches!(cfg.validate(&spec), Err(DynError::InvalidConfig(_))));
    }

    #[test]
    fn profile_extrapolation_is_exponential() {
        let spec = preset("kpp").unwrap();
        let g = waves::Grid::with_spacing(-10.0, 10.0, 0.1).unwrap();
        let p = WaveProfile {
            grid: g,
            c: 2.5,
            family: spec.family(),
            u: g.xs().iter().map(|x| 1.0 / (1.0 + (2.0 * x).exp())).collect(),
            v: None,
            left_state: (1.0, 0.0),
            right_state: (0.0, 0.0),
            residual: 0.0,
            iterations: 0,
        };
        let (a, _) = profile_value(&p, 12.0);
        let exact = 1.0 / (1.0 + 24f64.exp());
        assert!((a / exact - 1.0).abs() < 1e-6);
        let (b, _) = profile_value(&p, -12.0);
        assert!((1.0 - b) / (1.0 - 1.0 / (1.0 + (-24f64).exp())) - 1.0 < 1e-6);
    }
}
