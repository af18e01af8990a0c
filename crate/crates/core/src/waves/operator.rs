//! Discrete wave operators shared by the solvers and the certificate verifier.
//! Values outside the grid are extended by the given boundary states.

use crate::models::{Kernel, LvParams, Nonlinearity};

/// First-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Centered,
    /// Second-order one-sided forward difference.
    Forward,
}

#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    pub m: usize,
    pub weights: Vec<f64>,
}

impl ConvolutionWeights {
    pub fn new(kernel: &Kernel, h: f64) -> Self {
        let (m, weights) = kernel.grid_weights(h);
        Self { m, weights }
    }

    /// (J * w)_i for every node, with constant extension outside.
    pub fn apply(&self, w: &[f64], left: f64, right: f64) -> Vec<f64> {
        let n = w.len() as i64;
        let m = self.m as i64;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for (k, wt) in self.weights.iter().enumerate() {
                    let j = i - (k as i64 - m);
                    let v = if j < 0 {
                        left
                    } else if j >= n {
                        right
                    } else {
                        w[j as usize]
                    };
                    s += wt * v;
                }
                s
            })
            .collect()
    }
}

#[inline]
fn at(w: &[f64], j: i64, left: f64, right: f64) -> f64 {
    if j < 0 {
        left
    } else if j >= w.len() as i64 {
        right
    } else {
        w[j as usize]
    }
}

pub fn derivative(w: &[f64], h: f64, scheme: Derivative, left: f64, right: f64) -> Vec<f64> {
    (0..w.len() as i64)
        .map(|i| match scheme {
            Derivative::Centered => (at(w, i + 1, left, right) - at(w, i - 1, left, right)) / (2.0 * h),
            Derivative::Forward => {
                (-3.0 * w[i as usize] + 4.0 * at(w, i + 1, left, right) - at(w, i + 2, left, right)) / (2.0 * h)
            }
        })
        .collect()
}

pub fn second_difference(w: &[f64], h: f64, left: f64, right: f64) -> Vec<f64> {
    (0..w.len() as i64)
        .map(|i| (at(w, i + 1, left, right) - 2.0 * w[i as usize] + at(w, i - 1, left, right)) / (h * h))
        .collect()
}

/// Scalar wave operator at every node: diffusion (or J * w - w) + c w' + f(w).
pub fn scalar_residual(
    f: &Nonlinearity,
    conv: Option<&ConvolutionWeights>,
    c: f64,
    h: f64,
    w: &[f64],
    bounds: (f64, f64),
    scheme: Derivative,
) -> Vec<f64> {
    let (l, r) = bounds;
    let d1 = derivative(w, h, scheme, l, r);
    let spread = match conv {
        Some(cw) => cw.apply(w, l, r).iter().zip(w).map(|(a, b)| a - b).collect(),
        None => second_difference(w, h, l, r),
    };
    (0..w.len()).map(|i| spread[i] + c * d1[i] + f.f(w[i])).collect()
}

/// The two Lotka-Volterra wave operators at every node.
pub fn lv_residual(lv: &LvParams, c: f64, h: f64, u: &[f64], v: &[f64], left: (f64, f64), right: (f64, f64)) -> (Vec<f64>, Vec<f64>) {
    let du = derivative(u, h, Derivative::Centered, left.0, right.0);
    let dv = derivative(v, h, Derivative::Centered, left.1, right.1);
    let uu = second_difference(u, h, left.0, right.0);
    let vv = second_difference(v, h, left.1, right.1);
    let mut n2 = Vec::with_capacity(u.len());
    let mut n3 = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let (fu, fv) = lv.reaction(u[i], v[i]);
        n2.push(uu[i] + c * du[i] + fu);
        n3.push(lv.d * vv[i] + c * dv[i] + fv);
    }
    (n2, n3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_of_constants() {
        let cw = ConvolutionWeights::new(&Kernel::uniform(1.0), 0.1);
        let out = cw.apply(&[1.0; 30], 1.0, 1.0);
        assert!(out.iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn convolution_of_linear_is_exact() {
        // symmetric J with hat interpolation reproduces linear functions
        let h = 0.05;
        let cw = ConvolutionWeights::new(&Kernel::triangular(0.7), h);
        let w: Vec<f64> = (0..100).map(|i| 2.0 + 0.3 * i as f64 * h).collect();
        let out = cw.apply(&w, 2.0 - 0.3 * h * 1e9, 0.0);
        for i in 20..80 {
            assert!((out[i] - w[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_difference_exact_on_quadratics() {
        let h = 0.1;
        let w: Vec<f64> = (0..10).map(|i| (i as f64 * h).powi(2)).collect();
        let d = derivative(&w, h, Derivative::Forward, 0.0, 0.0);
        assert!((d[3] - 2.0 * 0.3).abs() < 1e-12);
    }
}
