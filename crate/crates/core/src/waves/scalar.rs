use super::newton::{self, System};
use super::operator::{self, ConvolutionWeights, Derivative};
use super::{check_shape, Grid, WaveError, WaveProfile};
use crate::models::{ModelSpec, Nonlinearity};
use crate::numerics::Banded;
use crate::spectral;

/// Unknowns W_1..W_{n-1}; W_0 is clamped to 1. Equations at nodes 1..n-2 plus
/// the phase row W_{k0} = 1/2, inserted at row k0-1 to keep the band narrow.
struct ScalarSystem<'a> {
    f: &'a Nonlinearity,
    conv: Option<ConvolutionWeights>,
    c: f64,
    h: f64,
    n: usize,
    k0: usize,
}

impl ScalarSystem<'_> {
    fn full(&self, z: &[f64]) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.n);
        w.push(1.0);
        w.extend_from_slice(z);
        w
    }

    fn row(&self, node: usize) -> usize {
        node - 1 + usize::from(node >= self.k0)
    }

    fn half_band(&self) -> usize {
        self.conv.as_ref().map_or(1, |cw| cw.m.max(1))
    }
}

impl System for ScalarSystem<'_> {
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let w = self.full(z);
        let all = operator::scalar_residual(self.f, self.conv.as_ref(), self.c, self.h, &w, (1.0, 0.0), Derivative::Centered);
        let mut out = vec![0.0; self.n - 1];
        for i in 1..self.n - 1 {
            out[self.row(i)] = all[i];
        }
        out[self.k0 - 1] = w[self.k0] - 0.5;
        out
    }

    fn jacobian(&self, z: &[f64]) -> Banded {
        let (n, h, c) = (self.n, self.h, self.c);
        let m = self.half_band();
        let mut jac = Banded::zeros(n - 1, m + 1, m);
        let w = self.full(z);
        for i in 1..n - 1 {
            let r = self.row(i);
            let mut put = |j: usize, v: f64| {
                if j >= 1 && j <= n - 1 {
                    jac.add(r, j - 1, v);
                }
            };
            match &self.conv {
                Some(cw) => {
                    for (k, wt) in cw.weights.iter().enumerate() {
                        let j = i as i64 - (k as i64 - cw.m as i64);
                        if j >= 1 && j <= (n - 1) as i64 {
                            put(j as usize, *wt);
                        }
                    }
                    put(i, -1.0 + self.f.df(w[i]));
                }
                None => {
                    put(i - 1, 1.0 / (h * h));
                    put(i + 1, 1.0 / (h * h));
                    put(i, -2.0 / (h * h) + self.f.df(w[i]));
                }
            }
            put(i + 1, c / (2.0 * h));
            put(i - 1, -c / (2.0 * h));
        }
        jac.add(self.k0 - 1, self.k0 - 1, 1.0);
        jac
    }
}

fn logistic_guess(grid: &Grid, kappa: f64) -> Vec<f64> {
    (1..grid.nodes).map(|i| 1.0 / (1.0 + (kappa * grid.x(i)).exp())).collect()
}

pub(super) fn solve(
    spec: &ModelSpec,
    c: f64,
    grid: &Grid,
    tol: f64,
    warm: Option<&WaveProfile>,
) -> Result<WaveProfile, WaveError> {
    let f = spec.nonlinearity().expect("scalar model");
    let h = grid.spacing();
    let sys = ScalarSystem {
        f,
        conv: spec.kernel().map(|k| ConvolutionWeights::new(k, h)),
        c,
        h,
        n: grid.nodes,
        k0: grid.nearest(0.0),
    };
    let mut guesses: Vec<Vec<f64>> = Vec::new();
    if let Some(p) = warm {
        let shift = p.phase();
        let shift = if shift.is_finite() { shift } else { 0.0 };
        guesses.push((1..grid.nodes).map(|i| p.interp_u(grid.x(i) + shift)).collect());
    }
    let lm = spectral::right_roots(spec, c).map(|r| r.minus()).unwrap_or(1.0);
    for kappa in [lm, 1.0, 0.5] {
        guesses.push(logistic_guess(grid, kappa));
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
        let w = sys.full(&out.z);
        let residual = interior_residual(&sys, &w);
        if !(residual <= tol) {
            last = WaveError::NoConvergence { c, reason: format!("re-evaluated residual {residual:.3e}") };
            continue;
        }
        if let Err(e) = check_shape(c, grid, &w, false, 1.0) {
            last = e;
            continue;
        }
        return Ok(WaveProfile {
            grid: *grid,
            c,
            family: spec.family(),
            u: w,
            v: None,
            left_state: spec.left_state(),
            right_state: spec.right_state(),
            residual,
            iterations: out.iterations,
        });
    }
    Err(last)
}

fn interior_residual(sys: &ScalarSystem, w: &[f64]) -> f64 {
    let all = operator::scalar_residual(sys.f, sys.conv.as_ref(), sys.c, sys.h, w, (1.0, 0.0), Derivative::Centered);
    all[1..w.len() - 1].iter().fold(0.0, |m, r| m.max(r.abs()))
}
