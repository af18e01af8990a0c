//! Lotka-Volterra super-solution pair (U1, V1) for the three competition regimes.

use std::f64::consts::PI;

use super::profile::{BaseSamples, Clamp, Modifier, Piece, PiecewiseProfile};
use super::{local_rate, snap, snap_down, CertError, CertificateParams, LedgerEntry, Recipe, Relation};
use crate::models::{LvParams, ModelSpec};
use crate::numerics::roots::bisect;
use crate::spectral;
use crate::waves::WaveProfile;

/// Power of |xi| used in the critical regime.
pub const THETA: f64 = 0.5;
const RHO_CRITICAL: f64 = 0.2;
/// Relative growth required of (-xi)^theta V left of xi2 + delta2, so the V
/// corner there is a clear convex kink.
const GV_SLOPE: f64 = 0.1;

fn infeasible(msg: impl Into<String>) -> CertError {
    CertError::LedgerInfeasible(msg.into())
}

/// Rates and widths shared by the three regimes.
struct Common {
    lum: f64,
    lup: f64,
    cap_v: f64,
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    lambda4: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    delta1: f64,
    delta2: f64,
    delta3: f64,
}

fn common(lv: &LvParams, ce: f64, h: f64) -> Result<Common, CertError> {
    let a = lv.a;
    let roots = spectral::lv_roots(lv, ce)?;
    let (lum, lup) = (roots.lambda_u.minus(), roots.lambda_u.plus());
    let lambda1 = 0.5 * (lum + lup);
    let lambda2 = 0.5 * roots.cap_lambda_v;
    let lambda3 = 0.5 * lum.min(0.5 * ce);
    let c2 = -(lambda1 * lambda1 - lambda1 * ce + 1.0 - a);
    let c3 = -(lv.d * lambda2 * lambda2 - lambda2 * ce - lv.r);
    let delta3 = PI * (1.0 + 2.0 * a) / (8.0 * ce);
    let d2max = ce / (delta3 * delta3 + 1.0 + 2.0 * a);
    let lambda4 = (1.1 * (-(1.0 - a).sqrt() + (4.0 - a).sqrt())).max(1.15 / d2max);
    let c1 = lambda4 * lambda4 + 2.0 * (1.0 - a).sqrt() * lambda4 - 3.0;
    let delta2 = snap_down(0.5 * (1.0 / lambda4 + d2max), h, 1);
    let delta1 = snap_down(0.5 / (lambda3 + lambda4), h, 1);
    Ok(Common { lum, lup, cap_v: roots.cap_lambda_v, lambda1, lambda2, lambda3, lambda4, c1, c2, c3, delta1, delta2, delta3 })
}

/// Regime-specific thresholds: rho, the region test defining xi2, and delta_v/delta_u.
fn regime(lv: &LvParams, recipe: Recipe) -> (f64, f64) {
    let (a, b) = (lv.a, lv.b);
    match recipe {
        Recipe::LvBgt1 => {
            let rho = 0.4 * (0.5f64).min((b - 1.0) / b);
            (rho, (b * rho / (b - 1.0 - b * rho) * (1.0 - 2.0 * rho) / a).sqrt())
        }
        Recipe::LvBlt1 => {
            let (k, m) = ((1.0 - b) / (1.0 - a * b), (1.0 - a) / (1.0 - a * b));
            (0.4 * (k * (1.0 - a) / (a + b)).min(m * (1.0 - b) / 2.0), b / a)
        }
        _ => (RHO_CRITICAL, f64::NAN),
    }
}

/// Worst margin of the far-left linearization conditions at a node.
fn left_margins(lv: &LvParams, recipe: Recipe, rho: f64, u: f64, v: f64) -> (f64, f64) {
    let (a, b) = (lv.a, lv.b);
    match recipe {
        Recipe::LvBgt1 => ((-1.0 + 2.0 * rho) - (1.0 - 2.0 * u - a * v), ((1.0 - b) + b * rho) - (1.0 - 2.0 * v - b * u)),
        Recipe::LvBlt1 => {
            let det = 1.0 - a * b;
            ((a - 1.0) / det + 2.0 * rho - (1.0 - 2.0 * u - a * v), (b - 1.0) / det + b * rho - (1.0 - 2.0 * v - b * u))
        }
        _ => (-(1.0 - 2.0 * rho) - (1.0 - 2.0 * u - a * v), -(1.0 - u - v)),
    }
}

/// Offset of the critical-regime junction: the zero of
/// eps4 sin(delta3 (z - xi2)) + eta2 (-z)^theta (1 - U(z)) on (xi2 - delta2, xi2).
pub fn critical_delta4(base: &WaveProfile, xi2: f64, delta2: f64, delta3: f64, eps4: f64, eta2: f64) -> Result<f64, CertError> {
    let f = |z: f64| eps4 * (delta3 * (z - xi2)).sin() + eta2 * (-z).powf(THETA) * (1.0 - base.interp_u(z));
    let (lo, hi) = (xi2 - delta2, xi2);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(CertError::SignConditionFailed(format!(
            "F(xi2 - delta2) = {:.3e} and F(xi2) = {:.3e} do not bracket a zero",
            f(lo),
            f(hi)
        )));
    }
    let z = bisect(f, lo, hi, 1e-14).map_err(|e| CertError::SignConditionFailed(e.to_string()))?;
    Ok(xi2 - z)
}

pub(super) fn solve(recipe: Recipe, spec: &ModelSpec, base: &WaveProfile, delta0: f64) -> Result<CertificateParams, CertError> {
    let lv = spec.lv().ok_or_else(|| infeasible("Lotka-Volterra model expected"))?;
    let c = base.c;
    let ce = c - delta0;
    let linear = spectral::lv_linear_speed(lv);
    if !(ce > linear) {
        return Err(infeasible(format!("c - delta0 = {ce:.6} is not above the linear speed {linear:.6}")));
    }
    let h = base.grid.spacing();
    let xs = base.xs();
    let n = xs.len();
    let u = &base.u;
    let v = base.v.as_ref().ok_or_else(|| infeasible("profile has no V component"))?;
    let k = common(lv, ce, h)?;
    let a = lv.a;
    let n2 = (k.delta2 / h).round() as usize;
    let (rho, ratio) = regime(lv, recipe);

    let i2 = if recipe == Recipe::LvBeq1 {
        let g = |i: usize| (-xs[i]).powf(THETA) * (1.0 - u[i]);
        // also keeps the V corner at xi2 + delta2 convex
        let gv = |i: usize| (-xs[i]).powf(THETA) * v[i];
        let good = |i: usize| {
            if i == 0 {
                return true;
            }
            let (m1, m2) = left_margins(lv, recipe, rho, u[i], v[i]);
            m1 > 0.0 && m2 > 0.0 && xs[i] < 0.0 && g(i) > g(i - 1) && gv(i) - gv(i - 1) > GV_SLOPE * h * THETA * (-xs[i]).powf(THETA - 1.0) * v[i]
        };
        let first = (0..n).find(|&i| !good(i)).unwrap_or(n);
        if first < n2 + 2 {
            return Err(infeasible("far-left conditions fail at the left end of the grid"));
        }
        first - 1 - n2
    } else {
        let first = (0..n)
            .find(|&i| {
                let (m1, m2) = left_margins(lv, recipe, rho, u[i], v[i]);
                !(m1 > 0.0 && m2 > 0.0)
            })
            .unwrap_or(n);
        if first < 2 {
            return Err(infeasible("far-left conditions fail at the left end of the grid"));
        }
        first - 1
    };
    let xi2 = xs[i2];

    // xi1: the linear-growth piece must dominate the region-2 coefficient
    let co: Vec<f64> = (0..n).map(|i| k.lambda3 * k.lambda3 - k.lambda3 * ce + 1.0 - 2.0 * u[i] - a * v[i]).collect();
    let base_gap = ce - 2.0 * k.lambda3;
    let n1 = (k.delta1 / h).round() as usize;
    let i1 = (i2 + n2 + 1..n)
        .find(|&i1| (i1 + n1..n).all(|j| co[j] * (xs[j] - xs[i1]) + base_gap >= 0.1 * base_gap))
        .ok_or_else(|| infeasible("no admissible xi1"))?;
    let xi1 = xs[i1];
    let ist = (1..n - 1)
        .find(|&i| {
            xs[i] > xi1 + k.delta1 + 1.0
                && a * (1.0 - v[i]) < 0.1 * k.c2
                && 2.0 * lv.r * (1.0 - v[i]) < 0.1 * k.c3
                && local_rate(u, h, i, 0.0) < k.lambda1 - 0.5 * (k.lambda1 - k.lum)
        })
        .ok_or_else(|| infeasible("no admissible xi*"))?;
    let xst = xs[ist];
    let leff = local_rate(u, h, ist, 0.0);
    let dl = xst - xi1;
    let rst = 0.5 * u[ist] * (k.lambda1 - leff) / (1.0 / dl + k.lambda1 - k.lambda3);
    let eps1 = (u[ist] - rst) * (k.lambda1 * xst).exp();
    let eps2 = rst / (dl * (-k.lambda3 * xst).exp());
    let eps3 = eps2 * k.delta1 * (-k.lambda3 * (xi1 + k.delta1)).exp() / (k.lambda4 * (xi1 + k.delta1)).exp();
    let eps4 = eps3 * (k.lambda4 * (xi2 + k.delta2)).exp() / (k.delta2 * k.delta3).sin();

    let mut p = CertificateParams {
        c,
        delta0,
        c_eff: ce,
        xi_star: Some(xst),
        xi1,
        xi2,
        delta1: k.delta1,
        delta2: k.delta2,
        delta3: k.delta3,
        lambda1: k.lambda1,
        lambda2: k.lambda2,
        lambda3: Some(k.lambda3),
        lambda4: Some(k.lambda4),
        eps1,
        eps2,
        eps3,
        eps4,
        rho: Some(rho),
        c1: Some(k.c1),
        c2: Some(k.c2),
        c3: Some(k.c3),
        m0: Some(-xi2),
        ..Default::default()
    };

    if recipe == Recipe::LvBeq1 {
        // 1e-3 of the profile scale, reduced until the smallness conditions hold
        let mut eta1 = 1e-3;
        let mut found = false;
        for _ in 0..40 {
            let dv = eta1 * (-k.lambda2 * xst).exp();
            let eta2 = dv / ((-xi2 - k.delta2).powf(THETA) * v[i2 + n2]);
            let z = xi2 - k.delta2;
            let f_lo = eps4 * (k.delta3 * (z - xi2)).sin() + eta2 * (-z).powf(THETA) * (1.0 - base.interp_u(z));
            if f_lo < 0.0 && eps4 * (k.delta3 * k.delta2).sin() > 10.0 * dv {
                found = true;
                p.eta2 = Some(eta2);
                break;
            }
            eta1 /= 10.0;
        }
        if !found {
            return Err(CertError::SignConditionFailed("no eta1 gives F(xi2 - delta2) < 0".into()));
        }
        let raw = critical_delta4(base, xi2, k.delta2, k.delta3, eps4, p.eta2.unwrap())?;
        // snap the junction to a node and re-derive the amplitudes from it
        let delta4 = snap(raw, h, 1).min(k.delta2 - h);
        let i4 = i2 - (delta4 / h).round() as usize;
        let eps5 = eps4 * (k.delta3 * delta4).sin() / ((-xi2 + delta4).powf(THETA) * (1.0 - u[i4]));
        let eta2 = eps5;
        let dv = eta2 * (-xi2 - k.delta2).powf(THETA) * v[i2 + n2];
        p.delta4 = Some(delta4);
        p.eps5 = Some(eps5);
        p.eta2 = Some(eta2);
        p.delta_v = Some(dv);
        p.eta1 = Some(dv * (k.lambda2 * xst).exp());
        p.theta = Some(THETA);
        p.m1 = Some(eta2.powf(-1.0 / THETA));
        return Ok(p);
    }

    // shrink delta4 until delta_v is small against R_u on [xi2 + delta2, xi*]
    let min_ru = ru_min(&p, &k);
    let mut delta4 = snap_down(0.5 * k.delta2, h, 1);
    loop {
        let du = eps4 * (k.delta3 * delta4).sin();
        if ratio * du <= 0.5 * min_ru || delta4 <= h {
            p.delta4 = Some(delta4);
            p.delta_u = Some(du);
            p.delta_v = Some(ratio * du);
            p.eta1 = Some(ratio * du * (k.lambda2 * xst).exp());
            break;
        }
        delta4 = snap_down(0.5 * delta4, h, 1);
    }
    Ok(p)
}

/// Smallest value of R_u over [xi2 + delta2, xi*] (both positive pieces are unimodal,
/// so the endpoints and the junction suffice, checked on a fine sample anyway).
fn ru_min(p: &CertificateParams, k: &Common) -> f64 {
    let (a, b) = (p.xi2 + p.delta2, p.xi_star.unwrap());
    (0..=400)
        .map(|j| {
            let x = a + (b - a) * j as f64 / 400.0;
            if x <= p.xi1 + k.delta1 {
                p.eps3 * (k.lambda4 * x).exp()
            } else {
                p.eps2 * (x - p.xi1) * (-k.lambda3 * x).exp()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

pub(super) fn ledger(recipe: Recipe, spec: &ModelSpec, base: &WaveProfile, p: &CertificateParams) -> Result<Vec<LedgerEntry>, CertError> {
    use Relation::*;
    let lv = spec.lv().ok_or_else(|| infeasible("Lotka-Volterra model expected"))?;
    let (a, b) = (lv.a, lv.b);
    let h = base.grid.spacing();
    let ce = p.c_eff;
    let k = common(lv, ce, h)?;
    let (l3, l4) = (p.lambda3.unwrap(), p.lambda4.unwrap());
    let xst = p.xi_star.unwrap();
    let xs = base.xs();
    let u = &base.u;
    let v = base.v.as_ref().unwrap();
    let mut e = Vec::new();

    e.push(LedgerEntry::new("c_e above the linear speed", ce, Gt, spectral::lv_linear_speed(lv)));
    e.push(LedgerEntry::new("lambda1 > lambda_u^-", p.lambda1, Gt, k.lum));
    e.push(LedgerEntry::new("lambda1 < lambda_u^+", p.lambda1, Lt, k.lup));
    e.push(LedgerEntry::new("lambda2 > 0", p.lambda2, Gt, 0.0));
    e.push(LedgerEntry::new("lambda2 < Lambda_v", p.lambda2, Lt, k.cap_v));
    e.push(LedgerEntry::new("lambda3 < min(lambda_u^-, c_e/2)", l3, Lt, k.lum.min(0.5 * ce) + 1e-300));
    e.push(LedgerEntry::new("lambda3 > 0", l3, Gt, 0.0));
    let c1 = l4 * l4 + 2.0 * (1.0 - a).sqrt() * l4 - 3.0;
    e.push(LedgerEntry::new("C1 > 0", c1, Gt, 0.0));
    let c2 = -(p.lambda1 * p.lambda1 - p.lambda1 * ce + 1.0 - a);
    let c3 = -(lv.d * p.lambda2 * p.lambda2 - p.lambda2 * ce - lv.r);
    e.push(LedgerEntry::new("C2 > 0", c2, Gt, 0.0));
    e.push(LedgerEntry::new("C3 > 0", c3, Gt, 0.0));
    e.push(LedgerEntry::new("delta1 < 1/(lambda3 + lambda4)", p.delta1, Lt, 1.0 / (l3 + l4)));
    e.push(LedgerEntry::new("delta2 > 1/lambda4", p.delta2, Gt, 1.0 / l4));
    let d2max = ce / (p.delta3 * p.delta3 + 1.0 + 2.0 * a);
    e.push(LedgerEntry::new("delta2 < c_e/(delta3^2 + 1 + 2a)", p.delta2, Lt, d2max));
    let d4 = p.delta4.unwrap_or(f64::NAN);
    e.push(LedgerEntry::new("delta4 > 0", d4, Gt, 0.0));
    e.push(LedgerEntry::new("delta4 < delta2", d4, Lt, p.delta2));
    let d3 = p.delta3;
    e.push(LedgerEntry::new(
        "sine piece sign at delta2",
        (d3 * d3 + 1.0 + 2.0 * a) * (p.delta2 * d3).sin() - ce * d3 * (p.delta2 * d3).cos(),
        Lt,
        0.0,
    ));
    e.push(LedgerEntry::new("delta2 delta3 < pi/2", p.delta2 * d3, Lt, PI / 2.0));

    // continuity of R_u and R_v
    let x12 = p.xi1 + p.delta1;
    let i_st = base.grid.nearest(xst);
    let rst = p.eps2 * (xst - p.xi1) * (-l3 * xst).exp();
    e.push(LedgerEntry::new("continuity at xi*", p.eps1 * (-p.lambda1 * xst).exp(), Eq, u[i_st] - rst));
    e.push(LedgerEntry::new("continuity at xi1 + delta1", p.eps3 * (l4 * x12).exp(), Eq, p.eps2 * p.delta1 * (-l3 * x12).exp()));
    e.push(LedgerEntry::new(
        "continuity at xi2 + delta2",
        p.eps4 * (d3 * p.delta2).sin(),
        Eq,
        p.eps3 * (l4 * (p.xi2 + p.delta2)).exp(),
    ));
    let dv = p.delta_v.unwrap_or(f64::NAN);
    e.push(LedgerEntry::new("continuity of R_v at xi*", p.eta1.unwrap_or(f64::NAN) * (-p.lambda2 * xst).exp(), Eq, dv));
    let leff = local_rate(u, h, i_st, 0.0);
    e.push(LedgerEntry::new(
        "kink at xi*",
        rst * (1.0 / (xst - p.xi1) + p.lambda1 - l3),
        Lt,
        u[i_st] * (p.lambda1 - leff),
    ));
    e.push(LedgerEntry::new("R* < U(xi*)", rst, Lt, u[i_st]));
    e.push(LedgerEntry::new("xi2 + delta2 < xi1", p.xi2 + p.delta2, Lt, p.xi1));
    e.push(LedgerEntry::new("xi1 + delta1 + 1 < xi*", x12 + 1.0, Lt, xst));
    let vst = v[i_st];
    e.push(LedgerEntry::new("a(1 - V) < C2/10 at xi*", a * (1.0 - vst), Lt, 0.1 * c2));
    e.push(LedgerEntry::new("2r(1 - V) < C3/10 at xi*", 2.0 * lv.r * (1.0 - vst), Lt, 0.1 * c3));

    // far-left conditions on xi <= xi2 (M0 = -xi2)
    let rho = p.rho.unwrap();
    let i2 = base.grid.nearest(p.xi2);
    let (mut w1, mut w2) = (f64::INFINITY, f64::INFINITY);
    for i in 1..=i2 {
        let (m1, m2) = left_margins(lv, recipe, rho, u[i], v[i]);
        w1 = w1.min(m1);
        w2 = w2.min(m2);
    }
    e.push(LedgerEntry::new("far-left U condition margin on xi <= -M0", w1, Gt, 0.0));
    e.push(LedgerEntry::new("far-left V condition margin on xi <= -M0", w2, Gt, 0.0));

    match recipe {
        Recipe::LvBgt1 => {
            let du = p.delta_u.unwrap();
            e.push(LedgerEntry::new("delta_u = eps4 sin(delta3 delta4)", du, Eq, p.eps4 * (d3 * d4).sin()));
            e.push(LedgerEntry::new("rho < min(1/2, (b-1)/b)", rho, Lt, (0.5f64).min((b - 1.0) / b)));
            // delta_v/delta_u sits between the two far-left linearization bounds
            let ratio = dv / du;
            e.push(LedgerEntry::new("delta_v/delta_u < (1 - 2 rho)/a", ratio, Lt, (1.0 - 2.0 * rho) / a));
            e.push(LedgerEntry::new("delta_v/delta_u > b rho/(b - 1 - b rho)", ratio, Gt, b * rho / (b - 1.0 - b * rho)));
        }
        Recipe::LvBlt1 => {
            let du = p.delta_u.unwrap();
            let kk = (1.0 - b) / (1.0 - a * b);
            let m = (1.0 - a) / (1.0 - a * b);
            e.push(LedgerEntry::new("delta_u = eps4 sin(delta3 delta4)", du, Eq, p.eps4 * (d3 * d4).sin()));
            e.push(LedgerEntry::new("delta_v = b delta_u / a", dv, Eq, b * du / a));
            e.push(LedgerEntry::new("(k - b rho)/a > k + rho", (kk - b * rho) / a, Gt, kk + rho));
            e.push(LedgerEntry::new("m - 2 rho > b m", m - 2.0 * rho, Gt, b * m));
        }
        Recipe::LvBeq1 => {
            let theta = p.theta.unwrap();
            let eta2 = p.eta2.unwrap();
            let eps5 = p.eps5.unwrap();
            e.push(LedgerEntry::new("theta > 0", theta, Gt, 0.0));
            e.push(LedgerEntry::new("theta < 1", theta, Lt, 1.0));
            e.push(LedgerEntry::new("eps5 = eta2", eps5, Eq, eta2));
            let z = p.xi2 - d4;
            let iz = base.grid.nearest(z);
            let fz = p.eps4 * (d3 * (z - p.xi2)).sin() + eta2 * (-z).powf(theta) * (1.0 - u[iz]);
            e.push(LedgerEntry::new("|F(xi2 - delta4)|", fz.abs(), Lt, 1e-10));
            // sandwich -eta2 (-xi)^theta (1 - U) < R_u < 0 on (xi2 - delta4, xi2)
            let worst_f = (1..1000)
                .map(|j| {
                    let x = z + d4 * j as f64 / 1000.0;
                    let f = p.eps4 * (d3 * (x - p.xi2)).sin() + eta2 * (-x).powf(theta) * (1.0 - base.interp_u(x));
                    f.min(-p.eps4 * (d3 * (x - p.xi2)).sin())
                })
                .fold(f64::INFINITY, f64::min);
            e.push(LedgerEntry::new("sandwich on (xi2 - delta4, xi2)", worst_f, Gt, 0.0));
            e.push(LedgerEntry::new(
                "continuity of R_v at xi2 + delta2",
                eta2 * (-p.xi2 - p.delta2).powf(theta) * v[i2 + (p.delta2 / h).round() as usize],
                Eq,
                dv,
            ));
            e.push(LedgerEntry::new("eps4 sin(delta3 delta2) > 10 delta_v", p.eps4 * (d3 * p.delta2).sin(), Gt, 10.0 * dv));
            e.push(LedgerEntry::new("xi2 + delta2 < 0", p.xi2 + p.delta2, Lt, 0.0));
            // 1 - eta2 (-xi)^theta stays positive on the whole left part of the grid
            let (lo, hi) = (xs[0], p.xi2 + p.delta2);
            let worst = (0..1000)
                .map(|j| 1.0 - eta2 * (-(lo + (hi - lo) * j as f64 / 999.0)).powf(theta))
                .fold(f64::INFINITY, f64::min);
            e.push(LedgerEntry::new("1 - eta2 (-xi)^theta > 0 on the grid", worst, Gt, 0.0));
            e.push(LedgerEntry::new("grid inside |xi| < M1", -xs[0], Lt, p.m1.unwrap()));
        }
        _ => {}
    }
    if recipe != Recipe::LvBeq1 {
        // smallness of delta_v against R_u
        e.push(LedgerEntry::new("delta_v <= min R_u / 2 on [xi2 + delta2, xi*]", dv, Lt, 0.5 * ru_min(p, &k) * (1.0 + 1e-12)));
    }
    Ok(e)
}

pub(super) fn build(spec: &ModelSpec, base: &WaveProfile, p: &CertificateParams) -> (PiecewiseProfile, PiecewiseProfile) {
    let lv = spec.lv().unwrap();
    let (us, vs) = lv.equilibrium();
    let h = base.grid.spacing();
    let samples = |values: &Vec<f64>, l: f64, r: f64| BaseSamples { left: base.grid.left, h, values: values.clone(), left_value: l, right_value: r, speed: base.c };
    let xst = p.xi_star.unwrap();
    let d4 = p.delta4.unwrap();
    let (l3, l4) = (p.lambda3.unwrap(), p.lambda4.unwrap());
    let dv = p.delta_v.unwrap();
    let left_u = match p.eps5 {
        Some(eps5) => Piece::base(Modifier::PowerDeviation { amp: eps5, theta: p.theta.unwrap(), target: 1.0 }),
        None => Piece::base(Modifier::Const { value: p.delta_u.unwrap() }),
    };
    let u = PiecewiseProfile {
        base: samples(&base.u, us, 0.0),
        junctions: vec![p.xi2 - d4, p.xi2 + p.delta2, p.xi1 + p.delta1, xst],
        pieces: vec![
            left_u,
            Piece::base(Modifier::Sine { amp: -p.eps4, freq: p.delta3, origin: p.xi2 }),
            Piece::base(Modifier::Exp { amp: -p.eps3, rate: l4 }),
            Piece::base(Modifier::LinExp { amp: -p.eps2, origin: p.xi1, rate: -l3 }),
            Piece::free(Modifier::Exp { amp: p.eps1, rate: -p.lambda1 }),
        ],
        clamp: Clamp::Min(1.0),
    };
    let tail = Piece::base(Modifier::Exp { amp: -p.eta1.unwrap(), rate: -p.lambda2 });
    let v = match p.eta2 {
        Some(eta2) => PiecewiseProfile {
            base: samples(base.v.as_ref().unwrap(), vs, 1.0),
            junctions: vec![p.xi2 + p.delta2, xst],
            pieces: vec![
                Piece::base(Modifier::PowerBase { amp: -eta2, theta: p.theta.unwrap() }),
                Piece::base(Modifier::Const { value: -dv }),
                tail,
            ],
            clamp: Clamp::Max(0.0),
        },
        None => PiecewiseProfile {
            base: samples(base.v.as_ref().unwrap(), vs, 1.0),
            junctions: vec![xst],
            pieces: vec![Piece::base(Modifier::Const { value: -dv }), tail],
            clamp: Clamp::Max(0.0),
        },
    };
    (u, v)
}
