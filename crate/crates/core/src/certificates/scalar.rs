//! Scalar super-solution: the base wave lowered by a small exponential /
//! sine / exponential correction, replaced by a pure exponential with a rate
//! strictly between lambda^- and lambda^+ far to the right.

use std::f64::consts::PI;

use super::profile::{BaseSamples, Clamp, Modifier, Piece, PiecewiseProfile};
use super::{local_rate, snap, CertError, CertificateParams, LedgerEntry, Relation};
use crate::models::ModelSpec;
use crate::spectral::{self, kernel_laplace};
use crate::waves::WaveProfile;

fn infeasible(msg: impl Into<String>) -> CertError {
    CertError::LedgerInfeasible(msg.into())
}

/// Characteristic function of the linearization at 0 (negative between the roots).
fn characteristic(spec: &ModelSpec, lambda: f64, c: f64) -> f64 {
    let fp0 = spec.nonlinearity().unwrap().fp0();
    match spec.kernel() {
        Some(k) => kernel_laplace(k, lambda) - 1.0 - c * lambda + fp0,
        None => lambda * lambda - c * lambda + fp0,
    }
}

/// The stable-side function whose positivity bounds lambda_2.
fn stable_side(spec: &ModelSpec, k2: f64, lambda: f64, c: f64) -> f64 {
    match spec.kernel() {
        Some(k) => 1.0 + k2 - (lambda * k.half_width).exp() - c * lambda,
        None => k2 - lambda * lambda - c * lambda,
    }
}

/// sup over 0 < s <= w of f(s)/s - f'(0): how far the reaction exceeds its
/// linearization on the exponential piece.
fn taylor_excess(spec: &ModelSpec, w: f64) -> f64 {
    let f = spec.nonlinearity().unwrap();
    let fp0 = f.fp0();
    (1..=200)
        .map(|j| {
            let s = w * j as f64 / 200.0;
            f.f(s) / s - fp0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub(super) fn solve(spec: &ModelSpec, base: &WaveProfile, delta0: f64) -> Result<CertificateParams, CertError> {
    let f = spec.nonlinearity().ok_or_else(|| infeasible("scalar model expected"))?;
    let c = base.c;
    let ce = c - delta0;
    let linear = spectral::linear_speed(spec)?;
    if !(ce > linear) {
        return Err(infeasible(format!("c - delta0 = {ce:.6} is not above the linear speed {linear:.6}")));
    }
    let h = base.grid.spacing();
    let xs = base.xs();
    let w = &base.u;
    let n = w.len();
    let l = spec.kernel().map_or(0.0, |k| k.half_width);

    let k1 = 1.05 * w.iter().map(|&x| f.df(x).abs()).fold(0.0, f64::max);
    let lambda1 = 1.1 * (4.0 * k1 / ce).max((k1 + 1.0) / ce);
    let k2 = 0.5 * f.fp1().abs();
    let first_bad = (0..n).find(|&i| f.df(w[i]) > -1.1 * k2).ok_or_else(|| infeasible("f'(W) never exceeds -K2"))?;
    if first_bad == 0 {
        return Err(infeasible("f'(W) > -K2 at the left end of the grid"));
    }
    let xi2 = xs[0] + snap(xs[first_bad - 1] - l - xs[0], h, 0);
    let mu = spectral::scalar_left_root(spec, c)?;
    let lambda2 = 0.5 * spectral::stable_side_bound(spec.kernel(), k2, ce)?.min(mu);

    let roots = spectral::right_roots(spec, ce)?;
    let (lm, lp) = (roots.minus(), roots.plus());
    let lambda_star = 0.5 * (lm + lp);

    let (lo, hi) = (1.0 / lambda1, ce / (4.0 * k1));
    let mut delta1 = snap(0.5 * (lo + hi), h, 1);
    if !(delta1 > lo && delta1 < hi) {
        delta1 = ((lo / h).floor() + 1.0) * h;
    }
    let n1 = (delta1 / h).round() as usize;
    let delta2 = (n1 / 2).max(3) as f64 * h;

    let target = lambda_star - 0.1 * (lambda_star - lm);
    let from = xi2 + delta1 + l;
    let slack = -characteristic(spec, lambda_star, ce);
    let i1 = (1..n - 1)
        .find(|&i| {
            xs[i] > from + 1.5 * h && local_rate(w, h, i, 0.0) < target && taylor_excess(spec, w[i]) < 0.5 * slack
        })
        .ok_or_else(|| infeasible("no node where the local decay rate falls below lambda*"))?;
    let xi1 = xs[i1];
    let leff = local_rate(w, h, i1, 0.0);
    let r1 = 0.5 * w[i1] * (lambda_star - leff) / (lambda_star + lambda1);
    let eps2 = r1 * (-lambda1 * xi1).exp();
    let eps1 = (w[i1] - r1) * (lambda_star * xi1).exp();

    // delta3 and eps3 depend on each other through the nonlocal curvature bound
    let cap = match spec.kernel() {
        Some(_) => (ce / (2.0 * l)).min(PI / (4.0 * delta1)) / 4.0,
        None => PI / (16.0 * delta1),
    };
    let eps3_of = |d3: f64| eps2 * (lambda1 * (xi2 + delta1)).exp() / (d3 * delta1).sin();
    let mut delta3 = cap;
    if l > 0.0 {
        for _ in 0..50 {
            let next = cap.min((2.0 * k1 / (eps3_of(delta3) * l * l)).powf(0.25) / 4.0);
            if (next - delta3).abs() <= 1e-15 * delta3 {
                break;
            }
            delta3 = next;
        }
    }
    let eps3 = eps3_of(delta3);
    let eps4 = eps3 * (delta3 * delta2).sin() * (-lambda2 * (xi2 - delta2)).exp();

    Ok(CertificateParams {
        c,
        delta0,
        c_eff: ce,
        xi1,
        xi2,
        delta1,
        delta2,
        delta3,
        lambda1,
        lambda2,
        lambda_star: Some(lambda_star),
        eps1,
        eps2,
        eps3,
        eps4,
        k1: Some(k1),
        k2: Some(k2),
        mu: Some(mu),
        l: Some(l),
        ..Default::default()
    })
}

pub(super) fn ledger(spec: &ModelSpec, base: &WaveProfile, p: &CertificateParams) -> Result<Vec<LedgerEntry>, CertError> {
    use Relation::*;
    let f = spec.nonlinearity().ok_or_else(|| infeasible("scalar model expected"))?;
    let h = base.grid.spacing();
    let xs = base.xs();
    let w = &base.u;
    let ce = p.c_eff;
    let (k1, k2, mu, l) = (p.k1.unwrap(), p.k2.unwrap(), p.mu.unwrap(), p.l.unwrap());
    let ls = p.lambda_star.unwrap();
    let mut e = Vec::new();

    e.push(LedgerEntry::new("c_e above the linear speed", ce, Gt, spectral::linear_speed(spec)?));
    let sup = w.iter().map(|&x| f.df(x).abs()).fold(0.0, f64::max);
    e.push(LedgerEntry::new("K1 > sup|f'(W)|", k1, Gt, sup));
    e.push(LedgerEntry::new("lambda1 > 4 K1 / c_e", p.lambda1, Gt, 4.0 * k1 / ce));
    e.push(LedgerEntry::new("lambda1 > (K1 + 1) / c_e", p.lambda1, Gt, (k1 + 1.0) / ce));
    let worst_left = xs
        .iter()
        .zip(w)
        .filter(|(x, _)| **x <= p.xi2 + l + 1e-9 * h)
        .map(|(_, &v)| f.df(v))
        .fold(f64::NEG_INFINITY, f64::max);
    e.push(LedgerEntry::new("f'(W) < -K2 left of xi2 + L", worst_left, Lt, -k2));
    e.push(LedgerEntry::new("lambda2 < mu", p.lambda2, Lt, mu));
    e.push(LedgerEntry::new("lambda2 > 0", p.lambda2, Gt, 0.0));
    e.push(LedgerEntry::new("stable-side margin at lambda2", stable_side(spec, k2, p.lambda2, ce), Gt, 0.0));
    let roots = spectral::right_roots(spec, ce)?;
    e.push(LedgerEntry::new("lambda* > lambda^-(c_e)", ls, Gt, roots.minus()));
    e.push(LedgerEntry::new("lambda* < lambda^+(c_e)", ls, Lt, roots.plus()));
    e.push(LedgerEntry::new("characteristic sign at lambda*", characteristic(spec, ls, ce), Lt, 0.0));
    let i1 = base.grid.nearest(p.xi1);
    e.push(LedgerEntry::new(
        "reaction excess on the exponential piece",
        taylor_excess(spec, w[i1]),
        Lt,
        -characteristic(spec, ls, ce),
    ));
    e.push(LedgerEntry::new("delta1 > 1/lambda1", p.delta1, Gt, 1.0 / p.lambda1));
    e.push(LedgerEntry::new("delta1 < c_e/(4 K1)", p.delta1, Lt, ce / (4.0 * k1)));
    e.push(LedgerEntry::new("delta2 < delta1", p.delta2, Lt, p.delta1));
    e.push(LedgerEntry::new("delta2 > 0", p.delta2, Gt, 0.0));
    e.push(LedgerEntry::new("delta3 delta1 < pi/4", p.delta3 * p.delta1, Lt, PI / 4.0));
    if l > 0.0 {
        e.push(LedgerEntry::new("delta3 < c_e/(2L)", p.delta3, Lt, ce / (2.0 * l)));
        e.push(LedgerEntry::new("eps3 L^2 delta3^4 < 2 K1", p.eps3 * l * l * p.delta3.powi(4), Lt, 2.0 * k1));
    }
    e.push(LedgerEntry::new("xi2 + delta1 + L < xi1", p.xi2 + p.delta1 + l, Lt, p.xi1));

    let w1 = w[i1];
    let leff = local_rate(w, h, i1, 0.0);
    e.push(LedgerEntry::new(
        "continuity at xi1",
        p.eps1 * (-ls * p.xi1).exp(),
        Eq,
        w1 - p.eps2 * (p.lambda1 * p.xi1).exp(),
    ));
    e.push(LedgerEntry::new("eps1 e^{-lambda* xi1} < W(xi1)", p.eps1 * (-ls * p.xi1).exp(), Lt, w1));
    let r1 = p.eps2 * (p.lambda1 * p.xi1).exp();
    e.push(LedgerEntry::new("kink at xi1: R1 (lambda* + lambda1)", r1 * (ls + p.lambda1), Lt, w1 * (ls - leff)));
    let a = p.xi2 + p.delta1;
    e.push(LedgerEntry::new(
        "continuity at xi2 + delta1",
        p.eps2 * (p.lambda1 * a).exp(),
        Eq,
        p.eps3 * (p.delta3 * p.delta1).sin(),
    ));
    e.push(LedgerEntry::new(
        "kink at xi2 + delta1",
        p.lambda1 * (p.delta3 * p.delta1).tan(),
        Gt,
        p.delta3,
    ));
    e.push(LedgerEntry::new(
        "continuity at xi2 - delta2",
        p.eps4 * (p.lambda2 * (p.xi2 - p.delta2)).exp(),
        Eq,
        p.eps3 * (p.delta3 * p.delta2).sin(),
    ));
    e.push(LedgerEntry::new("eps2 > 0", p.eps2, Gt, 0.0));
    Ok(e)
}

pub(super) fn build(base: &WaveProfile, p: &CertificateParams) -> PiecewiseProfile {
    let ls = p.lambda_star.unwrap();
    PiecewiseProfile {
        base: BaseSamples {
            left: base.grid.left,
            h: base.grid.spacing(),
            values: base.u.clone(),
            left_value: base.left_state.0,
            right_value: base.right_state.0,
            speed: base.c,
        },
        junctions: vec![p.xi2 - p.delta2, p.xi2 + p.delta1, p.xi1],
        pieces: vec![
            Piece::base(Modifier::Exp { amp: p.eps4, rate: p.lambda2 }),
            Piece::base(Modifier::Sine { amp: -p.eps3, freq: p.delta3, origin: p.xi2 }),
            Piece::base(Modifier::Exp { amp: -p.eps2, rate: p.lambda1 }),
            Piece::free(Modifier::Exp { amp: p.eps1, rate: -ls }),
        ],
        clamp: Clamp::Min(1.0),
    }
}
