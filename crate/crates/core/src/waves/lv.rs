use super::newton::{self, System};
use super::operator;
use super::{check_shape, Grid, WaveError, WaveProfile};
use crate::models::{Family, LvParams};
use crate::numerics::Banded;
use crate::spectral;

/// Interleaved unknowns: U_i at 2(i-1), V_i at 2(i-1)+1 for i = 1..n-2, and
/// U_{n-1} last. (U, V)_0 = (u*, v*) and V_{n-1} = 1 are clamped.
struct LvSystem<'a> {
    lv: &'a LvParams,
    c: f64,
    h: f64,
    n: usize,
    k0: usize,
    left: (f64, f64),
}

impl LvSystem<'_> {
    fn unknowns(&self) -> usize {
        2 * self.n - 3
    }

    fn split(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        u[0] = self.left.0;
        v[0] = self.left.1;
        for i in 1..n - 1 {
            u[i] = z[2 * (i - 1)];
            v[i] = z[2 * (i - 1) + 1];
        }
        u[n - 1] = z[2 * (n - 2)];
        v[n - 1] = 1.0;
        (u, v)
    }

    fn pack(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = vec![0.0; self.unknowns()];
        for i in 1..n - 1 {
            z[2 * (i - 1)] = u[i];
            z[2 * (i - 1) + 1] = v[i];
        }
        z[2 * (n - 2)] = u[n - 1];
        z
    }

    fn col_u(&self, i: usize) -> Option<usize> {
        match i {
            0 => None,
            i if i == self.n - 1 => Some(2 * (self.n - 2)),
            i => Some(2 * (i - 1)),
        }
    }

    fn col_v(&self, i: usize) -> Option<usize> {
        (i >= 1 && i <= self.n - 2).then(|| 2 * (i - 1) + 1)
    }

    fn shift(&self, i: usize) -> usize {
        usize::from(i >= self.k0)
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        operator::lv_residual(self.lv, self.c, self.h, u, v, self.left, (0.0, 1.0))
    }
}

impl System for LvSystem<'_> {
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let (u, v) = self.split(z);
        let (ru, rv) = self.eval(&u, &v);
        let mut out = vec![0.0; self.unknowns()];
        for i in 1..self.n - 1 {
            let s = self.shift(i);
            out[2 * (i - 1) + s] = ru[i];
            out[2 * (i - 1) + 1 + s] = rv[i];
        }
        out[2 * (self.k0 - 1)] = u[self.k0] - 0.5 * self.left.0;
        out
    }

    fn jacobian(&self, z: &[f64]) -> Banded {
        let (u, v) = self.split(z);
        let (h, c, lv) = (self.h, self.c, self.lv);
        let mut jac = Banded::zeros(self.unknowns(), 3, 2);
        for i in 1..self.n - 1 {
            let s = self.shift(i);
            let ru = 2 * (i - 1) + s;
            let rv = ru + 1;
            let lo = 1.0 / (h * h) - c / (2.0 * h);
            let hi = 1.0 / (h * h) + c / (2.0 * h);
            for (j, val) in [(i - 1, lo), (i + 1, hi), (i, -2.0 / (h * h) + 1.0 - 2.0 * u[i] - lv.a * v[i])] {
                if let Some(col) = self.col_u(j) {
                    jac.add(ru, col, val);
                }
            }
            if let Some(col) = self.col_v(i) {
                jac.add(ru, col, -lv.a * u[i]);
            }
            let dlo = lv.d / (h * h) - c / (2.0 * h);
            let dhi = lv.d / (h * h) + c / (2.0 * h);
            let diag = -2.0 * lv.d / (h * h) + lv.r * (1.0 - 2.0 * v[i] - lv.b * u[i]);
            for (j, val) in [(i - 1, dlo), (i + 1, dhi), (i, diag)] {
                if let Some(col) = self.col_v(j) {
                    jac.add(rv, col, val);
                }
            }
            if let Some(col) = self.col_u(i) {
                jac.add(rv, col, -lv.r * lv.b * v[i]);
            }
        }
        jac.add(2 * (self.k0 - 1), 2 * (self.k0 - 1), 1.0);
        jac
    }
}

pub(super) fn solve(
    lv: &LvParams,
    c: f64,
    grid: &Grid,
    tol: f64,
    warm: Option<&WaveProfile>,
) -> Result<WaveProfile, WaveError> {
    let left = lv.equilibrium();
    let sys = LvSystem { lv, c, h: grid.spacing(), n: grid.nodes, k0: grid.nearest(0.0), left };
    let xs = grid.xs();
    let mut guesses = Vec::new();
    if let Some(p) = warm {
        if p.v.is_some() {
            let shift = p.phase();
            let shift = if shift.is_finite() { shift } else { 0.0 };
            let u: Vec<f64> = xs.iter().map(|x| p.interp_u(x + shift)).collect();
            let v: Vec<f64> = xs.iter().map(|x| p.interp_v(x + shift).unwrap()).collect();
            guesses.push(sys.pack(&u, &v));
        }
    }
    let lm = spectral::local_roots(1.0 - lv.a, c).map(|r| r.minus()).unwrap_or(1.0);
    for kappa in [1.0, lm, 0.5] {
        let s: Vec<f64> = xs.iter().map(|x| 1.0 / (1.0 + (kappa * x).exp())).collect();
        let u: Vec<f64> = s.iter().map(|s| left.0 * s).collect();
        let v: Vec<f64> = s.iter().map(|s| left.1 * s + 1.0 - s).collect();
        guesses.push(sys.pack(&u, &v));
    }

    let mut last = WaveError::NoConvergence { c, reason: "no initial guess".into() };
    for g in guesses {
        let out = match newton::solve(&sys, &g, tol) {
            Ok(out) => out,
            Err(reason) => {
                last = WaveError::NoConvergence { c, reason };
                continue;
            }
        };
        let (u, v) = sys.split(&out.z);
        let (ru, rv) = sys.eval(&u, &v);
        let residual = (1..grid.nodes - 1).fold(0.0f64, |m, i| m.max(ru[i].abs()).max(rv[i].abs()));
        if !(residual <= tol) {
            last = WaveError::NoConvergence { c, reason: format!("re-evaluated residual {residual:.3e}") };
            continue;
        }
        if let Err(e) = check_shape(c, grid, &u, false, left.0).and_then(|_| check_shape(c, grid, &v, true, 1.0)) {
            last = e;
            continue;
        }
        return Ok(WaveProfile {
            grid: *grid,
            c,
            family: Family::LotkaVolterra,
            u,
            v: Some(v),
            left_state: left,
            right_state: (0.0, 1.0),
            residual,
            iterations: out.iterations,
        });
    }
    Err(last)
}
