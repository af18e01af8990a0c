use serde::{Deserialize, Serialize};

use super::newton::{self, System};
use super::operator::{self, ConvolutionWeights, Derivative};
use super::{Grid, WaveError, MONOTONE_TOL};
use crate::models::{Kernel, Nonlinearity};
use crate::numerics::quad::trapezoid;
use crate::numerics::Banded;

/// Nonincreasing solution of the half-line problem on (-inf, 0] with Phi(0) = 0,
/// together with the boundary coefficient mu linking it to speed c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiWave {
    pub grid: Grid,
    pub c: f64,
    pub phi: Vec<f64>,
    pub mu: f64,
    /// Phi at the left truncation.
    pub left_value: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl SemiWave {
    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# c = {:.16e}\n# mu = {:.16e}\n# residual = {:.6e}\nxi,Phi\n", self.c, self.mu, self.residual);
        for (x, p) in self.xs().iter().zip(&self.phi) {
            s.push_str(&format!("{x:.16e},{p:.16e}\n"));
        }
        s
    }
}

/// Unknowns Phi_0..Phi_{n-2}; Phi_{n-1} = 0. The one-sided derivative keeps
/// the stencil inside the half-line. At c = 0 the problem is algebraic and
/// carries no boundary condition, so every node is an unknown.
struct SemiSystem<'a> {
    f: &'a Nonlinearity,
    conv: ConvolutionWeights,
    c: f64,
    h: f64,
    n: usize,
    clamp: bool,
}

impl SemiSystem<'_> {
    fn unknowns(&self) -> usize {
        if self.clamp {
            self.n - 1
        } else {
            self.n
        }
    }

    fn full(&self, z: &[f64]) -> Vec<f64> {
        let mut p = z.to_vec();
        if self.clamp {
            p.push(0.0);
        }
        p
    }

    fn all_residuals(&self, p: &[f64]) -> Vec<f64> {
        operator::scalar_residual(self.f, Some(&self.conv), self.c, self.h, p, (1.0, 0.0), Derivative::Forward)
    }
}

impl System for SemiSystem<'_> {
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let mut r = self.all_residuals(&self.full(z));
        r.truncate(self.unknowns());
        r
    }

    fn jacobian(&self, z: &[f64]) -> Banded {
        let nu = self.unknowns();
        let m = self.conv.m;
        let mut jac = Banded::zeros(nu, m, m.max(2));
        let d = self.c / (2.0 * self.h);
        for i in 0..nu {
            for (k, wt) in self.conv.weights.iter().enumerate() {
                let j = i as i64 - (k as i64 - m as i64);
                if j >= 0 && (j as usize) < nu {
                    jac.add(i, j as usize, *wt);
                }
            }
            jac.add(i, i, -1.0 + self.f.df(z[i]) - 3.0 * d);
            if i + 1 < nu {
                jac.add(i, i + 1, 4.0 * d);
            }
            if i + 2 < nu {
                jac.add(i, i + 2, -d);
            }
        }
        jac
    }
}

/// Solve the semi-wave problem at speed c >= 0 on a grid whose right end is 0.
/// The boundary layer at 0 has width of order c, so small speeds need a grid
/// spacing below c to stay monotone.
pub fn solve_semiwave(kernel: &Kernel, f: &Nonlinearity, c: f64, grid: &Grid, tol: f64) -> Result<SemiWave, WaveError> {
    if grid.right.abs() > 1e-12 * grid.spacing() {
        return Err(WaveError::InvalidGrid(format!("semi-wave grid must end at 0, got {}", grid.right)));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(WaveError::NoConvergence { c, reason: "speed must be nonnegative".into() });
    }
    let h = grid.spacing();
    let sys = SemiSystem { f, conv: ConvolutionWeights::new(kernel, h), c, h, n: grid.nodes, clamp: c > 0.0 };
    let guess: Vec<f64> = (0..sys.unknowns()).map(|i| (-grid.x(i) + 1.0).tanh()).collect();
    let out = newton::solve(&sys, &guess, tol).map_err(|reason| WaveError::NoConvergence { c, reason })?;
    let phi = sys.full(&out.z);
    let r = sys.all_residuals(&phi);
    let residual = r[..sys.unknowns()].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(residual <= tol) {
        return Err(WaveError::NoConvergence { c, reason: format!("re-evaluated residual {residual:.3e}") });
    }
    for i in 0..phi.len() - 1 {
        if phi[i + 1] - phi[i] > MONOTONE_TOL { 
            return Err(WaveError::MonotonicityLost { c, node: i + 1, xi: grid.x(i + 1) });
        }
    }
    if phi[0] <= 0.99 {
        return Err(WaveError::NoConvergence {
            c,
            reason: format!("profile collapsed: Phi(left) = {:.3e}, no semi-wave at this speed", phi[0]),
        });
    }
    let ys: Vec<f64> = (0..grid.nodes).map(|i| phi[i] * kernel.cdf(grid.x(i))).collect();
    let flux = trapezoid(h, &ys);
    Ok(SemiWave {
        grid: *grid,
        c,
        mu: if c > 0.0 { c / flux } else { 0.0 },
        left_value: phi[0],
        phi,
        residual,
        iterations: out.iterations,
    })
}
