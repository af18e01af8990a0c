//! Tail fits of wave profiles and the pulled / pushed / noncritical verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{LvParams, LvRegime, ModelSpec};
use crate::numerics::lsq::lstsq;
use crate::spectral::{self, RootSet, SpectralError};
use crate::waves::WaveProfile;

/// Nodes dropped next to each truncation boundary.
pub const BOUNDARY_NODES: usize = 10;
pub const MIN_WINDOW_NODES: usize = 30;
/// Deviation band of the automatic window.
pub const WINDOW_BAND: (f64, f64) = (1e-10, 1e-2);
/// Relative residual improvement needed to accept an extra power of |xi|.
const P_IMPROVEMENT: f64 = 0.95;
/// Below this rms the p = 0 fit is already at roundoff and p is not raised.
const NOISE_FLOOR: f64 = 1e-10;
/// rms of the log fit above which the window is rejected.
const NOISY_RMS: f64 = 0.05;
/// Relative tolerance for comparing speeds in the decision table.
const SPEED_RTOL: f64 = 1e-6;
/// Fitted rates farther than this from the expected root are inconsistent.
const RATE_RTOL: f64 = 0.05;
/// Tolerance of the left-tail checks.
const LEFT_RTOL: f64 = 0.03;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("tail window too noisy: rms {rms:.3e} of the log fit")]
    WindowTooNoisy { rms: f64 },
    #[error("tail window has {nodes} usable nodes, need {MIN_WINDOW_NODES}")]
    ShortWindow { nodes: usize },
    #[error("profile has no second component")]
    MissingComponent,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// xi -> +infinity
    Right,
    /// xi -> -infinity
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// W for scalar models, U for Lotka-Volterra.
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailLaw {
    /// A s^p e^{-rate s} with s = |xi|
    Exponential,
    /// A s^{-rate}
    Algebraic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub side: Side,
    pub component: Component,
    pub law: TailLaw,
    /// Decay rate (exponential) or power (algebraic), positive.
    pub rate: f64,
    /// Power of |xi| in front of the exponential; -1 for the algebraic law.
    pub p: i32,
    pub amplitude: f64,
    /// B in (A s + B) e^{-rate s} when p = 1 (absent if the log fit was better).
    pub secondary: Option<f64>,
    /// rms of the log-space fit.
    pub residual: f64,
    /// Window in xi.
    pub window: (f64, f64),
    pub nodes: usize,
}

/// Distance from the boundary of the tail, and the deviation from the limit.
fn tail_samples(profile: &WaveProfile, side: Side, component: Component) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), TailError> {
    let vals = match component {
        Component::U => &profile.u,
        Component::V => profile.v.as_ref().ok_or(TailError::MissingComponent)?,
    };
    let limit = match (side, component) {
        (Side::Right, Component::U) => profile.right_state.0,
        (Side::Right, Component::V) => profile.right_state.1,
        (Side::Left, Component::U) => profile.left_state.0,
        (Side::Left, Component::V) => profile.left_state.1,
    };
    let xs = profile.xs();
    let n = xs.len();
    let lo = BOUNDARY_NODES.min(n);
    let hi = n.saturating_sub(BOUNDARY_NODES);
    let mut x = Vec::new();
    let mut s = Vec::new();
    let mut d = Vec::new();
    for i in lo..hi {
        x.push(xs[i]);
        s.push(match side {
            Side::Right => xs[i],
            Side::Left => -xs[i],
        });
        d.push((vals[i] - limit).abs());
    }
    Ok((x, s, d))
}

fn select(
    x: &[f64],
    s: &[f64],
    d: &[f64],
    window: Option<(f64, f64)>,
    band: (f64, f64),
    side: Side,
) -> (Vec<f64>, Vec<f64>, (f64, f64)) {
    let mut ss = Vec::new();
    let mut dd = Vec::new();
    let (mut wlo, mut whi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..x.len() {
        let inside = match window {
            Some((a, b)) => x[i] >= a && x[i] <= b,
            None => {
                // only the tail half of the profile
                let outer = match side {
                    Side::Right => x[i] > 0.0,
                    Side::Left => x[i] < 0.0,
                };
                outer && d[i] >= band.0 && d[i] <= band.1
            }
        };
        if inside && d[i] > 0.0 {
            ss.push(s[i]);
            dd.push(d[i]);
            wlo = wlo.min(x[i]);
            whi = whi.max(x[i]);
        }
    }
    (ss, dd, (wlo, whi))
}

/// Least-squares fit of log d = log A + p log s - rate s for fixed p.
fn fit_fixed(s: &[f64], d: &[f64], p: i32) -> Option<(f64, f64, f64)> {
    if p != 0 && s.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let rows: Vec<Vec<f64>> = s.iter().map(|&v| vec![1.0, -v]).collect();
    let y: Vec<f64> = s.iter().zip(d).map(|(&v, &w)| w.ln() - if p == 0 { 0.0 } else { p as f64 * v.ln() }).collect();
    let (coef, rms) = lstsq(&rows, &y)?;
    Some((coef[1], coef[0].exp(), rms))
}

/// Fit (A s + B) e^{-rate s} by variable projection: for each rate the
/// amplitudes solve a relative-error linear problem, and the rate minimizes
/// that relative rms (golden section around `guess`). The returned rms is
/// the log-space one, comparable with the other fits.
fn fit_linear_exp(s: &[f64], d: &[f64], guess: f64) -> Option<(f64, f64, f64, f64)> {
    let amps = |rate: f64| -> Option<(f64, f64, f64)> {
        let rows: Vec<Vec<f64>> = s.iter().zip(d).map(|(&v, &w)| vec![v * (-rate * v).exp() / w, (-rate * v).exp() / w]).collect();
        let ones = vec![1.0; s.len()];
        let (coef, rel) = lstsq(&rows, &ones)?;
        Some((coef[0], coef[1], rel))
    };
    let cost = |rate: f64| amps(rate).map_or(f64::INFINITY, |a| a.2);
    // coarse scan first: the cost is not unimodal far from the optimum
    let scan = 40;
    let step = 0.4 * guess / scan as f64;
    let best = (0..=scan)
        .map(|k| 0.8 * guess + k as f64 * step)
        .min_by(|x, y| cost(*x).total_cmp(&cost(*y)))
        .unwrap_or(guess);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best - step, best + step);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while b - a > 1e-13 * guess {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let rate = 0.5 * (a + b);
    let (amp, sec, _) = amps(rate)?;
    let mut ss = 0.0;
    for (&v, &w) in s.iter().zip(d) {
        let m = amp * v + sec;
        if !(m > 0.0) {
            return None;
        }
        let r = w.ln() - m.ln() + rate * v;
        ss += r * r;
    }
    Some((rate, amp, sec, (ss / s.len() as f64).sqrt()))
}

struct RawFit {
    p: i32,
    rate: f64,
    amplitude: f64,
    secondary: Option<f64>,
    rms: f64,
}

fn fit_power(s: &[f64], d: &[f64], p: i32, refine: bool) -> Option<RawFit> {
    let (rate, amplitude, rms) = fit_fixed(s, d, p)?;
    if p == 1 && refine {
        if let Some((r, a, b, m)) = fit_linear_exp(s, d, rate) {
            if m <= rms + 1e-12 {
                return Some(RawFit { p, rate: r, amplitude: a, secondary: Some(b), rms: m });
            }
        }
    }
    Some(RawFit { p, rate, amplitude, secondary: None, rms })
}

/// Fit A s^p e^{-rate s} (for p = 1 the form (A s + B) e^{-rate s}) to
/// positive samples, choosing p in 0..=max_p by the residual-improvement rule.
/// With `forced` the power is fixed. Returns (p, rate, A, B, rms).
pub fn fit_exponential(
    s: &[f64],
    d: &[f64],
    max_p: i32,
    forced: Option<i32>,
) -> Result<(i32, f64, f64, Option<f64>, f64), TailError> {
    if s.len() < MIN_WINDOW_NODES {
        return Err(TailError::ShortWindow { nodes: s.len() });
    }
    let bad = || TailError::ShortWindow { nodes: 0 };
    let f = match forced {
        Some(p) => fit_power(s, d, p, true).ok_or_else(bad)?,
        None => {
            // choose p on the pure forms, then refine the chosen one
            let mut best = fit_power(s, d, 0, false).ok_or_else(bad)?;
            for p in 1..=max_p {
                if best.p != p - 1 {
                    break;
                }
                if let Some(f) = fit_power(s, d, p, false) {
                    if best.rms > NOISE_FLOOR && f.rms < P_IMPROVEMENT * best.rms {
                        best = f;
                    }
                }
            }
            if best.p == 0 {
                best
            } else {
                fit_power(s, d, best.p, true).ok_or_else(bad)?
            }
        }
    };
    if !(f.rms <= NOISY_RMS) {
        return Err(TailError::WindowTooNoisy { rms: f.rms });
    }
    Ok((f.p, f.rate, f.amplitude, f.secondary, f.rms))
}

fn build(
    side: Side,
    component: Component,
    s: &[f64],
    d: &[f64],
    window: (f64, f64),
    max_p: i32,
    forced: Option<i32>,
) -> Result<TailFit, TailError> {
    let (p, rate, amplitude, secondary, residual) = fit_exponential(s, d, max_p, forced)?;
    Ok(TailFit {
        side,
        component,
        law: TailLaw::Exponential,
        rate,
        p,
        amplitude,
        secondary,
        residual,
        window,
        nodes: s.len(),
    })
}

/// Exponential tail fit. Without an explicit window the fit uses the nodes
/// whose deviation from the limit lies in `WINDOW_BAND`, away from the
/// truncation boundary. p = 2 is admitted only for the Lotka-Volterra V tail
/// on the right.
pub fn fit_tail(profile: &WaveProfile, side: Side, component: Component, window: Option<(f64, f64)>) -> Result<TailFit, TailError> {
    let max_p = if profile.v.is_some() && side == Side::Right && component == Component::V { 2 } else { 1 };
    fit_tail_with(profile, side, component, window, max_p, None)
}

/// As `fit_tail` with explicit control over the power of |xi|.
pub fn fit_tail_with(
    profile: &WaveProfile,
    side: Side,
    component: Component,
    window: Option<(f64, f64)>,
    max_p: i32,
    forced: Option<i32>,
) -> Result<TailFit, TailError> {
    let (x, s, d) = tail_samples(profile, side, component)?;
    let (ss, dd, win) = select(&x, &s, &d, window, WINDOW_BAND, side);
    build(side, component, &ss, &dd, win, max_p, forced)
}

/// Algebraic fit d = A |xi|^{-rate} on the given window (default: the outer
/// three quarters of the left half-line, minus the boundary nodes).
pub fn fit_algebraic(profile: &WaveProfile, side: Side, component: Component, window: Option<(f64, f64)>) -> Result<TailFit, TailError> {
    let (x, s, d) = tail_samples(profile, side, component)?;
    let window = window.unwrap_or(match side {
        Side::Left => (f64::NEG_INFINITY, 0.25 * profile.grid.left),
        Side::Right => (0.25 * profile.grid.right, f64::INFINITY),
    });
    let (ss, dd, win) = select(&x, &s, &d, Some(window), WINDOW_BAND, side);
    if ss.len() < MIN_WINDOW_NODES {
        return Err(TailError::ShortWindow { nodes: ss.len() });
    }
    let rows: Vec<Vec<f64>> = ss.iter().map(|&v| vec![1.0, -v.ln()]).collect();
    let y: Vec<f64> = dd.iter().map(|w| w.ln()).collect();
    let (coef, rms) = lstsq(&rows, &y).ok_or(TailError::ShortWindow { nodes: 0 })?;
    if !(rms <= NOISY_RMS) {
        return Err(TailError::WindowTooNoisy { rms });
    }
    Ok(TailFit {
        side,
        component,
        law: TailLaw::Algebraic,
        rate: coef[1],
        p: -1,
        amplitude: coef[0].exp(),
        secondary: None,
        residual: rms,
        window: win,
        nodes: ss.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pulled,
    Pushed,
    Noncritical,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// What the speeds alone imply.
    pub regime: Verdict,
    /// Root the regime predicts, with its name.
    pub expected: String,
    pub expected_rate: f64,
    pub fitted_rate: f64,
    pub p: i32,
    /// Candidate root closest to the fitted rate.
    pub nearest: String,
    /// Relative distance of the fitted rate to the nearest candidate.
    pub margin: f64,
    /// Relative distance to the expected root.
    pub error: f64,
    pub notes: Vec<String>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SPEED_RTOL * a.abs().max(b.abs())
}

/// Decision table: c = c* = linear speed gives a pulled front decaying at the
/// double root; c = c* above the linear speed a pushed front at the fast root;
/// c > c* a noncritical front at the slow root.
pub fn classify(spec: &ModelSpec, c: f64, c_star: f64, roots: &RootSet, fit: &TailFit) -> Classification {
    let _ = spec;
    let linear = roots.linear_speed;
    let mut notes = Vec::new();
    let double = roots.lambda0.filter(|_| roots.double_root || close(c, linear)).or(roots.lambda_minus);
    let candidates: Vec<(&str, f64)> = [("lambda_minus", roots.lambda_minus), ("lambda_plus", roots.lambda_plus), ("lambda0", double)]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect();
    let (regime, expected, expected_rate) = if close(c, c_star) {
        if close(c_star, linear) {
            (Verdict::Pulled, "lambda0", double.unwrap_or(f64::NAN))
        } else {
            (Verdict::Pushed, "lambda_plus", roots.lambda_plus.unwrap_or(f64::NAN))
        }
    } else if c > c_star {
        (Verdict::Noncritical, "lambda_minus", roots.lambda_minus.unwrap_or(f64::NAN))
    } else {
        notes.push(format!("c = {c} is below c* = {c_star}"));
        (Verdict::Inconsistent, "none", f64::NAN)
    };
    let rel = |r: f64| (fit.rate - r).abs() / r.abs();
    let (nearest, margin) = candidates
        .iter()
        .map(|&(n, r)| (n.to_string(), rel(r)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or(("none".into(), f64::NAN));
    let error = rel(expected_rate);
    if fit.side != Side::Right || fit.component != Component::U {
        notes.push("classification expects a right-side fit of the invading component".into());
    }
    if regime == Verdict::Pulled {
        notes.push(format!("pulled tail fitted with p = {}; the A = 0 case is not decided", fit.p));
    }
    let verdict = if regime != Verdict::Inconsistent && error <= RATE_RTOL && fit.side == Side::Right && fit.component == Component::U
    {
        regime
    } else {
        Verdict::Inconsistent
    };
    Classification {
        verdict,
        regime,
        expected: expected.into(),
        expected_rate,
        fitted_rate: fit.rate,
        p: fit.p,
        nearest,
        margin,
        error,
        notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub passed: bool,
}

impl TailCheck {
    fn rel(name: &str, value: f64, expected: f64, tol: f64) -> Self {
        let rel_error = (value - expected).abs() / expected.abs();
        TailCheck { name: name.into(), value, expected, rel_error, passed: rel_error <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftTailReport {
    pub fits: Vec<TailFit>,
    pub checks: Vec<TailCheck>,
}

impl LeftTailReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Left-tail laws of a Lotka-Volterra wave toward (u*, v*).
pub fn left_tail_report(profile: &WaveProfile, lv: &LvParams, c: f64) -> Result<LeftTailReport, TailError> {
    let v = profile.v.as_ref().ok_or(TailError::MissingComponent)?;
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    match spectral::lv_left_roots(lv, c)? {
        spectral::LeftRoots::Exponential { mu_u_plus, mu_v_plus, .. } => {
            let fv = fit_tail_with(profile, Side::Left, Component::V, None, 0, Some(0))?;
            checks.push(TailCheck::rel("V rate vs mu_v+", fv.rate, mu_v_plus, LEFT_RTOL));
            // 1 - U is driven by V when mu_v+ <= mu_u+; equal rates add a factor |xi|
            let (expect, p) = if (mu_u_plus - mu_v_plus).abs() <= 1e-9 * mu_u_plus {
                (mu_v_plus, 1)
            } else {
                (mu_u_plus.min(mu_v_plus), 0)
            };
            let fu = fit_tail_with(profile, Side::Left, Component::U, None, p, Some(p))?;
            checks.push(TailCheck::rel("1-U rate", fu.rate, expect, LEFT_RTOL));
            fits.push(fv);
            fits.push(fu);
        }
        spectral::LeftRoots::Coexistence { nu } => {
            let fu = fit_tail_with(profile, Side::Left, Component::U, None, 0, Some(0))?;
            let fv = fit_tail_with(profile, Side::Left, Component::V, None, 0, Some(0))?;
            checks.push(TailCheck::rel("u*-U rate vs nu", fu.rate, nu, LEFT_RTOL));
            checks.push(TailCheck::rel("V-v* rate vs nu", fv.rate, nu, LEFT_RTOL));
            fits.push(fu);
            fits.push(fv);
        }
        spectral::LeftRoots::Polynomial { .. } => {
            debug_assert_eq!(lv.regime(), LvRegime::Critical);
            let fv = fit_algebraic(profile, Side::Left, Component::V, None)?;
            fits.push(fv);
            let grid = &profile.grid;
            let inner = 0.5 * grid.left;
            let outer = grid.x(BOUNDARY_NODES) + 0.025 * grid.left.abs();
            let g = |xi: f64| {
                let i = grid.nearest(xi);
                (grid.x(i), (1.0 - profile.u[i]) / v[i], (grid.x(i) * (1.0 - profile.u[i] - lv.a * v[i])).abs())
            };
            let (xa, ga, ha) = g(inner);
            let (xb, gb, hb) = g(outer);
            let richardson = |fa: f64, fb: f64| (xa.abs() * fa - xb.abs() * fb) / (xa.abs() - xb.abs());
            checks.push(TailCheck::rel("(1-U)/V limit vs a", richardson(ga, gb), lv.a, LEFT_RTOL));
            // |xi (1 - U - aV)| must decrease toward the left across the window
            let i0 = grid.nearest(outer);
            let i1 = grid.nearest(inner);
            let h = |i: usize| (grid.x(i) * (1.0 - profile.u[i] - lv.a * v[i])).abs();
            let decreasing = (i0..i1).all(|i| h(i) <= h(i + 1) + 1e-12);
            let limit = richardson(ha, hb);
            checks.push(TailCheck {
                name: "|xi (1-U-aV)| decreasing to 0".into(),
                value: limit,
                expected: 0.0,
                rel_error: limit.abs() / hb,
                passed: decreasing && limit.abs() <= 0.25 * hb,
            });
        }
    }
    Ok(LeftTailReport { fits, checks })
}
