//! Characteristic roots, linear speeds and tail exponents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{Family, Kernel, LvParams, LvRegime, ModelSpec};
use crate::numerics::roots::{bisect, expand_until, newton_bisect, RootError};

/// Relative distance to the linear speed below which roots count as double.
pub const DOUBLE_ROOT_TOL: f64 = 1e-8;

const ROOT_XTOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("ComplexRoots: speed {c} is below the linear speed {linear}")]
    ComplexRoots { c: f64, linear: f64 },
    #[error("NoRealRoots: speed {c} is below c0* = {c0}")]
    NoRealRoots { c: f64, c0: f64 },
    #[error("root bracketing failed: {0}")]
    Bracket(#[from] RootError),
    #[error("invalid input: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "multiplicity", rename_all = "kebab-case")]
pub enum RootPair {
    Simple { minus: f64, plus: f64 },
    Double { root: f64 },
}

impl RootPair {
    pub fn minus(&self) -> f64 {
        match *self {
            RootPair::Simple { minus, .. } => minus,
            RootPair::Double { root } => root,
        }
    }

    pub fn plus(&self) -> f64 {
        match *self {
            RootPair::Simple { plus, .. } => plus,
            RootPair::Double { root } => root,
        }
    }

    pub fn is_double(&self) -> bool {
        matches!(self, RootPair::Double { .. })
    }
}

fn near_linear(c: f64, linear: f64) -> bool {
    (c - linear).abs() <= DOUBLE_ROOT_TOL * linear
}

/// Roots of lambda^2 - c lambda + fp0 = 0.
pub fn local_roots(fp0: f64, c: f64) -> Result<RootPair, SpectralError> {
    if !(fp0 > 0.0) || !c.is_finite() {
        return Err(SpectralError::Domain(format!("need fp0 > 0, got {fp0}")));
    }
    let linear = 2.0 * fp0.sqrt();
    if near_linear(c, linear) {
        return Ok(RootPair::Double { root: fp0.sqrt() });
    }
    if c < linear {
        return Err(SpectralError::ComplexRoots { c, linear });
    }
    let disc = (c * c - 4.0 * fp0).sqrt();
    // stable form for the small root
    let plus = 0.5 * (c + disc);
    Ok(RootPair::Simple { minus: fp0 / plus, plus })
}

pub fn local_linear_speed(fp0: f64) -> f64 {
    2.0 * fp0.sqrt()
}

/// Positive root of mu^2 + c mu + fp1 = 0: left decay rate of 1 - W.
pub fn local_left_root(fp1: f64, c: f64) -> Result<f64, SpectralError> {
    if !(fp1 < 0.0) {
        return Err(SpectralError::Domain(format!("need fp1 < 0, got {fp1}")));
    }
    let disc = (c * c - 4.0 * fp1).sqrt();
    Ok(-2.0 * fp1 / (c + disc))
}

/// Integral of J(x) e^{lambda x}.
pub fn kernel_laplace(kernel: &Kernel, lambda: f64) -> f64 {
    kernel.laplace(lambda)
}

/// h(lambda) = Laplace(J)(lambda) + fp0 - 1 and its first two derivatives.
fn h_nonlocal(kernel: &Kernel, fp0: f64, lambda: f64) -> (f64, f64, f64) {
    let q = kernel.quadrature();
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (x, w) in q {
        let e = w * (lambda * x).exp();
        s0 += e;
        s1 += e * x;
        s2 += e * x * x;
    }
    (s0 + fp0 - 1.0, s1, s2)
}

/// (c0*, lambda0): minimum of h(lambda)/lambda over lambda > 0 and its argmin.
pub fn linear_speed_nonlocal(kernel: &Kernel, fp0: f64) -> Result<(f64, f64), SpectralError> {
    if !(fp0 > 0.0) {
        return Err(SpectralError::Domain(format!("need fp0 > 0, got {fp0}")));
    }
    // g = lambda h' - h is increasing (g' = lambda h'') with g(0) = -fp0
    let g = |l: f64| {
        let (h, h1, h2) = h_nonlocal(kernel, fp0, l);
        (l * h1 - h, l * h2)
    };
    let hi = expand_until(|l| g(l).0, 1.0 / kernel.half_width, true)?;
    let lambda0 = newton_bisect(g, 0.0, hi, ROOT_XTOL)?;
    let c0 = h_nonlocal(kernel, fp0, lambda0).0 / lambda0;
    Ok((c0, lambda0))
}

/// Roots of c lambda = h(lambda).
pub fn nonlocal_roots(kernel: &Kernel, fp0: f64, c: f64) -> Result<RootPair, SpectralError> {
    let (c0, lambda0) = linear_speed_nonlocal(kernel, fp0)?;
    if near_linear(c, c0) {
        return Ok(RootPair::Double { root: lambda0 });
    }
    if c < c0 {
        return Err(SpectralError::NoRealRoots { c, c0 });
    }
    let phi = |l: f64| {
        let (h, h1, _) = h_nonlocal(kernel, fp0, l);
        (h - c * l, h1 - c)
    };
    let minus = newton_bisect(phi, 0.0, lambda0, ROOT_XTOL)?;
    let hi = expand_until(|l| phi(l).0, 2.0 * lambda0, true)?;
    let plus = newton_bisect(phi, lambda0, hi, ROOT_XTOL)?;
    Ok(RootPair::Simple { minus, plus })
}

/// Positive root of Laplace(J)(-mu) - 1 + fp1 + c mu = 0 (left decay of 1 - W).
pub fn nonlocal_left_root(kernel: &Kernel, fp1: f64, c: f64) -> Result<f64, SpectralError> {
    if !(fp1 < 0.0) || c < 0.0 {
        return Err(SpectralError::Domain(format!("need fp1 < 0 and c >= 0, got {fp1}, {c}")));
    }
    let psi = |mu: f64| {
        let (h, h1, _) = h_nonlocal(kernel, 1.0, -mu);
        (h - 1.0 + fp1 + c * mu, -h1 + c)
    };
    let hi = expand_until(|m| psi(m).0, 1.0 / kernel.half_width, true)?;
    Ok(newton_bisect(psi, 0.0, hi, ROOT_XTOL)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvRoots {
    pub lambda_u: RootPair,
    pub lambda_v_plus: f64,
    pub lambda_v_minus: f64,
    /// min(lambda_u^-, lambda_v^+)
    pub cap_lambda_v: f64,
}

pub fn lv_linear_speed(lv: &LvParams) -> f64 {
    2.0 * (1.0 - lv.a).sqrt()
}

pub fn lv_roots(lv: &LvParams, c: f64) -> Result<LvRoots, SpectralError> {
    let lambda_u = local_roots(1.0 - lv.a, c)?;
    let (lambda_v_plus, lambda_v_minus) = lv_v_roots(lv, c);
    Ok(LvRoots { lambda_u, lambda_v_plus, lambda_v_minus, cap_lambda_v: lambda_u.minus().min(lambda_v_plus) })
}

/// Roots of d lambda^2 - c lambda - r = 0.
pub fn lv_v_roots(lv: &LvParams, c: f64) -> (f64, f64) {
    let disc = (c * c + 4.0 * lv.r * lv.d).sqrt();
    ((c + disc) / (2.0 * lv.d), (c - disc) / (2.0 * lv.d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LeftRoots {
    /// b > 1: rates of 1 - U and V toward (1, 0).
    Exponential { mu_u_plus: f64, mu_u_minus: f64, mu_v_plus: f64, mu_v_minus: f64 },
    /// b < 1: common rate toward the coexistence state.
    Coexistence { nu: f64 },
    /// b = 1: algebraic decay |xi|^power.
    Polynomial { power: i32 },
}

/// rho(lambda) for the coexistence left tail, with derivative.
pub fn coexistence_poly(lv: &LvParams, c: f64, l: f64) -> (f64, f64) {
    let (u, v) = lv.equilibrium();
    let p = l * l + c * l - u;
    let q = lv.d * l * l + c * l - lv.r * v;
    let val = p * q - lv.r * lv.a * lv.b * u * v;
    let der = (2.0 * l + c) * q + p * (2.0 * lv.d * l + c);
    (val, der)
}

/// All positive zeros of rho on (0, upper], by dense scan and Newton polish.
pub fn coexistence_zeros(lv: &LvParams, c: f64, upper: f64) -> Vec<f64> {
    let n = 10_000;
    let step = upper / n as f64;
    let f = |l: f64| coexistence_poly(lv, c, l);
    let mut out: Vec<f64> = Vec::new();
    let mut prev = f(step * 1e-6).0;
    for i in 1..=n {
        let x = i as f64 * step;
        let cur = f(x).0;
        if prev == 0.0 || prev.signum() != cur.signum() {
            if let Ok(r) = newton_bisect(f, x - step, x, ROOT_XTOL) {
                out.push(r);
            }
        } else {
            // tangential touch: look for a local min of |rho| and polish on rho'
            let xm = x - 0.5 * step;
            let (vm, _) = f(xm);
            if vm.abs() < cur.abs().min(prev.abs()) && vm.abs() < 1e-6 {
                let dd = |l: f64| {
                    let e = 1e-7;
                    let d = f(l).1;
                    (d, (f(l + e).1 - f(l - e).1) / (2.0 * e))
                };
                if let Ok(r) = newton_bisect(dd, x - step, x, ROOT_XTOL) {
                    if f(r).0.abs() < 1e-10 {
                        out.push(r);
                    }
                }
            }
        }
        prev = cur;
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out
}

pub fn lv_left_roots(lv: &LvParams, c: f64) -> Result<LeftRoots, SpectralError> {
    if c < 0.0 {
        return Err(SpectralError::Domain(format!("need c >= 0, got {c}")));
    }
    match lv.regime() {
        LvRegime::Critical => Ok(LeftRoots::Polynomial { power: -1 }),
        LvRegime::Strong => {
            let du = (c * c + 4.0).sqrt();
            let dv = (c * c + 4.0 * lv.r * lv.d * (lv.b - 1.0)).sqrt();
            Ok(LeftRoots::Exponential {
                mu_u_plus: (-c + du) / 2.0,
                mu_u_minus: (-c - du) / 2.0,
                mu_v_plus: (-c + dv) / (2.0 * lv.d),
                mu_v_minus: (-c - dv) / (2.0 * lv.d),
            })
        }
        LvRegime::Weak => {
            let zeros = coexistence_zeros(lv, c, 10.0);
            match zeros.first() {
                Some(&nu) => Ok(LeftRoots::Coexistence { nu }),
                None => Err(SpectralError::Domain("no positive zero of the coexistence polynomial".into())),
            }
        }
    }
}

/// Linear (spreading) speed of the family.
pub fn linear_speed(spec: &ModelSpec) -> Result<f64, SpectralError> {
    match spec {
        ModelSpec::LocalScalar { nonlinearity } => Ok(local_linear_speed(nonlinearity.fp0())),
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => {
            Ok(linear_speed_nonlocal(kernel, nonlinearity.fp0())?.0)
        }
        ModelSpec::LotkaVolterra { lv } => Ok(lv_linear_speed(lv)),
    }
}

/// Right-tail rate pair of the invading component.
pub fn right_roots(spec: &ModelSpec, c: f64) -> Result<RootPair, SpectralError> {
    match spec {
        ModelSpec::LocalScalar { nonlinearity } => local_roots(nonlinearity.fp0(), c),
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => nonlocal_roots(kernel, nonlinearity.fp0(), c),
        ModelSpec::LotkaVolterra { lv } => local_roots(1.0 - lv.a, c),
    }
}

/// Left decay rate of the scalar deviation 1 - W.
pub fn scalar_left_root(spec: &ModelSpec, c: f64) -> Result<f64, SpectralError> {
    match spec {
        ModelSpec::LocalScalar { nonlinearity } => local_left_root(nonlinearity.fp1(), c),
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => nonlocal_left_root(kernel, nonlinearity.fp1(), c),
        ModelSpec::LotkaVolterra { .. } => Err(SpectralError::Domain("scalar model expected".into())),
    }
}

/// Flat record of every characteristic quantity at (model, c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub family: Family,
    pub c: f64,
    pub linear_speed: f64,
    pub double_root: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c0_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_u_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_u_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_v_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_v_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap_lambda_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_q_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_u_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_u_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_v_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_v_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub left_power: Option<i32>,
}

impl RootSet {
    fn empty(family: Family, c: f64, linear_speed: f64) -> Self {
        RootSet {
            family,
            c,
            linear_speed,
            double_root: false,
            lambda_minus: None,
            lambda_plus: None,
            lambda0: None,
            c0_star: None,
            lambda_u_minus: None,
            lambda_u_plus: None,
            lambda_v_plus: None,
            lambda_v_minus: None,
            cap_lambda_v: None,
            mu_q_plus: None,
            mu_u_plus: None,
            mu_u_minus: None,
            mu_v_plus: None,
            mu_v_minus: None,
            nu: None,
            left_power: None,
        }
    }

    fn set_pair(&mut self, pair: RootPair) {
        self.double_root = pair.is_double();
        self.lambda_minus = Some(pair.minus());
        self.lambda_plus = Some(pair.plus());
        if let RootPair::Double { root } = pair {
            self.lambda0 = Some(root);
        }
    }

    pub fn pair(&self) -> Option<RootPair> {
        let (m, p) = (self.lambda_minus?, self.lambda_plus?);
        Some(if self.double_root { RootPair::Double { root: m } } else { RootPair::Simple { minus: m, plus: p } })
    }
}

pub fn root_set(spec: &ModelSpec, c: f64) -> Result<RootSet, SpectralError> {
    let linear = linear_speed(spec)?;
    let mut rs = RootSet::empty(spec.family(), c, linear);
    match spec {
        ModelSpec::LocalScalar { nonlinearity } => {
            rs.set_pair(local_roots(nonlinearity.fp0(), c)?);
            rs.mu_q_plus = Some(local_left_root(nonlinearity.fp1(), c)?);
        }
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => {
            let (c0, l0) = linear_speed_nonlocal(kernel, nonlinearity.fp0())?;
            rs.set_pair(nonlocal_roots(kernel, nonlinearity.fp0(), c)?);
            rs.c0_star = Some(c0);
            rs.lambda0 = Some(l0);
            rs.mu_q_plus = Some(nonlocal_left_root(kernel, nonlinearity.fp1(), c.max(0.0))?);
        }
        ModelSpec::LotkaVolterra { lv } => {
            let r = lv_roots(lv, c)?;
            rs.set_pair(r.lambda_u);
            rs.lambda_u_minus = Some(r.lambda_u.minus());
            rs.lambda_u_plus = Some(r.lambda_u.plus());
            rs.lambda_v_plus = Some(r.lambda_v_plus);
            rs.lambda_v_minus = Some(r.lambda_v_minus);
            rs.cap_lambda_v = Some(r.cap_lambda_v);
            match lv_left_roots(lv, c)? {
                LeftRoots::Exponential { mu_u_plus, mu_u_minus, mu_v_plus, mu_v_minus } => {
                    rs.mu_u_plus = Some(mu_u_plus);
                    rs.mu_u_minus = Some(mu_u_minus);
                    rs.mu_v_plus = Some(mu_v_plus);
                    rs.mu_v_minus = Some(mu_v_minus);
                }
                LeftRoots::Coexistence { nu } => rs.nu = Some(nu),
                LeftRoots::Polynomial { power } => rs.left_power = Some(power),
            }
        }
    }
    Ok(rs)
}

/// Residuals of every root in the set against its defining equation.
pub fn root_residuals(spec: &ModelSpec, rs: &RootSet) -> Vec<(&'static str, f64)> {
    let c = rs.c;
    let mut out = Vec::new();
    let mut push = |name: &'static str, v: Option<f64>, f: &dyn Fn(f64) -> f64| {
        if let Some(x) = v {
            out.push((name, f(x)));
        }
    };
    match spec {
        ModelSpec::LocalScalar { nonlinearity } => {
            let (a, b) = (nonlinearity.fp0(), nonlinearity.fp1());
            let right = |l: f64| l * l - c * l + a;
            if !rs.double_root {
                push("lambda_minus", rs.lambda_minus, &right);
                push("lambda_plus", rs.lambda_plus, &right);
            }
            push("mu_q_plus", rs.mu_q_plus, &|m| m * m + c * m + b);
        }
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => {
            let a = nonlinearity.fp0();
            let b = nonlinearity.fp1();
            if !rs.double_root {
                let right = |l: f64| kernel.laplace(l) + a - 1.0 - c * l;
                push("lambda_minus", rs.lambda_minus, &right);
                push("lambda_plus", rs.lambda_plus, &right);
            }
            push("lambda0", rs.lambda0, &|l| {
                let (h, h1, _) = h_nonlocal(kernel, a, l);
                l * h1 - h
            });
            push("mu_q_plus", rs.mu_q_plus, &|m| kernel.laplace(-m) - 1.0 + b + c * m);
        }
        ModelSpec::LotkaVolterra { lv } => {
            let a = 1.0 - lv.a;
            if !rs.double_root {
                let right = |l: f64| l * l - c * l + a;
                push("lambda_u_minus", rs.lambda_u_minus, &right);
                push("lambda_u_plus", rs.lambda_u_plus, &right);
            }
            let vr = |l: f64| lv.d * l * l - c * l - lv.r;
            push("lambda_v_plus", rs.lambda_v_plus, &vr);
            push("lambda_v_minus", rs.lambda_v_minus, &vr);
            let ur = |m: f64| m * m + c * m - 1.0;
            push("mu_u_plus", rs.mu_u_plus, &ur);
            push("mu_u_minus", rs.mu_u_minus, &ur);
            let vl = |m: f64| lv.d * m * m + c * m - lv.r * (lv.b - 1.0);
            push("mu_v_plus", rs.mu_v_plus, &vl);
            push("mu_v_minus", rs.mu_v_minus, &vl);
            push("nu", rs.nu, &|l| coexistence_poly(lv, c, l).0);
        }
    }
    out
}

/// Smallest zero of 1 + k2 - e^{lambda L} - c lambda (nonlocal) or k2 - lambda^2 - c lambda (local).
pub fn stable_side_bound(kernel: Option<&Kernel>, k2: f64, c: f64) -> Result<f64, SpectralError> {
    match kernel {
        Some(k) => {
            let l = k.half_width;
            let g = |x: f64| 1.0 + k2 - (x * l).exp() - c * x;
            let hi = expand_until(|x| -g(x), 1e-3, true)?;
            Ok(bisect(g, 0.0, hi, 1e-15)?)
        }
        None => {
            let disc = (c * c + 4.0 * k2).sqrt();
            Ok(2.0 * k2 / (c + disc))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::preset;

    #[test]
    fn local_examples() {
        assert_eq!(local_roots(1.0, 2.0).unwrap(), RootPair::Double { root: 1.0 });
        let r = local_roots(1.0, 2.5).unwrap();
        assert!((r.minus() - 0.5).abs() < 1e-15 && (r.plus() - 2.0).abs() < 1e-15);
        assert!(matches!(local_roots(1.0, 1.0), Err(SpectralError::ComplexRoots { .. })));
    }

    #[test]
    fn laplace_uniform() {
        let k = Kernel::uniform(1.0);
        assert!((kernel_laplace(&k, 0.0) - 1.0).abs() < 1e-14);
        assert!((kernel_laplace(&k, 1.0) - 1f64.sinh()).abs() < 1e-14);
        assert!((kernel_laplace(&k, -1.0) - kernel_laplace(&k, 1.0)).abs() < 1e-14);
        assert!((kernel_laplace(&k, 4.0) - 4f64.sinh() / 4.0).abs() < 1e-12);
    }

    // lambda0 solves tanh(l) = l/2; c0* = sinh(l)/l^2
    fn uniform_oracle() -> (f64, f64) {
        let l0 = bisect(|l: f64| l.tanh() - l / 2.0, 1.0, 3.0, 1e-15).unwrap();
        (l0.sinh() / (l0 * l0), l0)
    }

    #[test]
    fn nonlocal_linear_speed_matches_oracle() {
        let (c0, l0) = linear_speed_nonlocal(&Kernel::uniform(1.0), 1.0).unwrap();
        let (oc, ol) = uniform_oracle();
        assert!((c0 - oc).abs() < 1e-12, "{c0} vs {oc}");
        assert!((l0 - ol).abs() < 1e-10);
        assert!((l0 - 1.915).abs() < 1e-3 && (c0 - 0.905).abs() < 1e-3);
        // minimum below any evaluation, and wider kernels are faster
        assert!(c0 < kernel_laplace(&Kernel::uniform(1.0), 1.0));
        let (c2, _) = linear_speed_nonlocal(&Kernel::uniform(2.0), 1.0).unwrap();
        assert!(c2 > c0);
    }

    #[test]
    fn nonlocal_roots_examples() {
        let k = Kernel::uniform(1.0);
        let (c0, l0) = linear_speed_nonlocal(&k, 1.0).unwrap();
        assert_eq!(nonlocal_roots(&k, 1.0, c0).unwrap(), RootPair::Double { root: l0 });
        let r = nonlocal_roots(&k, 1.0, 1.2).unwrap();
        assert!(r.minus() < l0 && l0 < r.plus());
        for l in [r.minus(), r.plus()] {
            assert!((1.2 * l - l.sinh() / l).abs() < 1e-10);
        }
        assert!(matches!(nonlocal_roots(&k, 1.0, 0.5), Err(SpectralError::NoRealRoots { .. })));
    }

    #[test]
    fn nonlocal_left_root_examples() {
        let k = Kernel::uniform(1.0);
        let m1 = nonlocal_left_root(&k, -1.0, 1.0).unwrap();
        assert!((m1.sinh() / m1 + m1 - 2.0).abs() < 1e-12);
        assert!((m1 - 0.87).abs() < 0.01);
        let m2 = nonlocal_left_root(&k, -1.0, 2.0).unwrap();
        assert!(m2 < m1);
        let m0 = nonlocal_left_root(&k, -1.0, 0.0).unwrap();
        assert!((m0.sinh() / m0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lv_examples() {
        let lv = LvParams { d: 1.0, r: 1.0, a: 0.75, b: 2.0 };
        assert_eq!(lv_roots(&lv, 1.0).unwrap().lambda_u, RootPair::Double { root: 0.5 });
        let r = lv_roots(&lv, 1.25).unwrap().lambda_u;
        assert!((r.plus() - 1.0).abs() < 1e-15 && (r.minus() - 0.25).abs() < 1e-15);
        let (p, m) = lv_v_roots(&LvParams { d: 1.0, r: 1.0, a: 0.5, b: 2.0 }, 0.0);
        assert_eq!((p, m), (1.0, -1.0));
        match lv_left_roots(&lv, 0.0).unwrap() {
            LeftRoots::Exponential { mu_u_plus, mu_u_minus, .. } => {
                assert_eq!((mu_u_plus, mu_u_minus), (1.0, -1.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nu_symmetric_case() {
        let lv = LvParams { d: 1.0, r: 1.0, a: 0.5, b: 0.5 };
        let LeftRoots::Coexistence { nu } = lv_left_roots(&lv, 0.0).unwrap() else { panic!() };
        assert!((nu - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let crit = LvParams { b: 1.0, ..lv };
        assert_eq!(lv_left_roots(&crit, 1.0).unwrap(), LeftRoots::Polynomial { power: -1 });
    }

    #[test]
    fn root_sets_have_small_residuals() {
        for (name, c) in [("kpp", 2.5), ("hr-nu4", 2.2), ("nonlocal-kpp-uniform", 1.2), ("lv-strongweak", 2.2), ("lv-weak", 1.6), ("lv-critical", 1.6)] {
            let spec = preset(name).unwrap();
            let rs = root_set(&spec, c).unwrap();
            for (k, r) in root_residuals(&spec, &rs) {
                assert!(r.abs() < 1e-10, "{name} {k} {r}");
            }
        }
        let rs = root_set(&preset("lv-strongweak").unwrap(), 2.2).unwrap();
        let json = serde_json::to_value(&rs).unwrap();
        assert!(json.get("lambda_u_plus").is_some() && json.get("mu_v_plus").is_some());
    }

    #[test]
    fn stable_bound() {
        let k = Kernel::uniform(1.0);
        let x = stable_side_bound(Some(&k), 0.5, 1.0).unwrap();
        assert!((1.5 - x.exp() - x).abs() < 1e-12);
        let y = stable_side_bound(None, 0.5, 1.0).unwrap();
        assert!((0.5 - y * y - y).abs() < 1e-14);
    }
}
