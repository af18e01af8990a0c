//! Piecewise profiles built from a sampled base wave plus analytic modifiers.

use serde::{Deserialize, Serialize};

use super::{node_slope, CertError, CONTINUITY_TOL, MIN_PIECE_NODES};

/// Base wave sampled on a uniform grid, extended by constants outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSamples {
    pub left: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub left_value: f64,
    pub right_value: f64,
    /// Speed of the wave the samples come from.
    pub speed: f64,
}

impl BaseSamples {
    pub fn right(&self) -> f64 {
        self.left + (self.values.len() - 1) as f64 * self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.left + i as f64 * self.h).collect()
    }

    /// Node index when x sits on a node.
    fn node(&self, x: f64) -> Option<usize> {
        let t = (x - self.left) / self.h;
        let k = t.round();
        if (t - k).abs() < 1e-6 && k >= 0.0 && (k as usize) < self.values.len() {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Exact at nodes, linear in between.
    pub fn value(&self, x: f64) -> f64 {
        if let Some(i) = self.node(x) {
            return self.values[i];
        }
        if x < self.left {
            return self.left_value;
        }
        if x > self.right() {
            return self.right_value;
        }
        let t = (x - self.left) / self.h;
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let s = t - i as f64;
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }

    /// Centered slope at nodes, one-sided second order at the ends, zero outside.
    pub fn slope(&self, x: f64) -> f64 {
        match self.node(x) {
            Some(i) => node_slope(&self.values, self.h, i),
            None if x < self.left || x > self.right() => 0.0,
            None => {
                let t = (x - self.left) / self.h;
                let i = (t.floor() as usize).min(self.values.len() - 2);
                (self.values[i + 1] - self.values[i]) / self.h
            }
        }
    }
}

/// Analytic correction added to (or replacing) the base wave on one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Modifier {
    Zero,
    Const { value: f64 },
    /// amp e^{rate x}
    Exp { amp: f64, rate: f64 },
    /// amp (x - origin) e^{rate x}
    LinExp { amp: f64, origin: f64, rate: f64 },
    /// amp sin(freq (x - origin))
    Sine { amp: f64, freq: f64, origin: f64 },
    /// amp (-x)^theta (target - base)
    PowerDeviation { amp: f64, theta: f64, target: f64 },
    /// amp (-x)^theta base
    PowerBase { amp: f64, theta: f64 },
}

impl Modifier {
    pub fn value(&self, x: f64, b: f64) -> f64 {
        match *self {
            Modifier::Zero => 0.0,
            Modifier::Const { value } => value,
            Modifier::Exp { amp, rate } => amp * (rate * x).exp(),
            Modifier::LinExp { amp, origin, rate } => amp * (x - origin) * (rate * x).exp(),
            Modifier::Sine { amp, freq, origin } => amp * (freq * (x - origin)).sin(),
            Modifier::PowerDeviation { amp, theta, target } => amp * (-x).powf(theta) * (target - b),
            Modifier::PowerBase { amp, theta } => amp * (-x).powf(theta) * b,
        }
    }

    /// d/dx given the base value b and base slope db.
    pub fn derivative(&self, x: f64, b: f64, db: f64) -> f64 {
        match *self {
            Modifier::Zero | Modifier::Const { .. } => 0.0,
            Modifier::Exp { amp, rate } => amp * rate * (rate * x).exp(),
            Modifier::LinExp { amp, origin, rate } => amp * (1.0 + rate * (x - origin)) * (rate * x).exp(),
            Modifier::Sine { amp, freq, origin } => amp * freq * (freq * (x - origin)).cos(),
            Modifier::PowerDeviation { amp, theta, target } => {
                amp * (-theta * (-x).powf(theta - 1.0) * (target - b) - (-x).powf(theta) * db)
            }
            Modifier::PowerBase { amp, theta } => amp * (-theta * (-x).powf(theta - 1.0) * b + (-x).powf(theta) * db),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// Whether the base wave is included.
    pub base: bool,
    pub modifier: Modifier,
}

impl Piece {
    pub fn base(modifier: Modifier) -> Self {
        Piece { base: true, modifier }
    }

    pub fn free(modifier: Modifier) -> Self {
        Piece { base: false, modifier }
    }

    fn value(&self, x: f64, b: f64) -> f64 {
        (if self.base { b } else { 0.0 }) + self.modifier.value(x, b)
    }

    fn derivative(&self, x: f64, b: f64, db: f64) -> f64 {
        (if self.base { db } else { 0.0 }) + self.modifier.derivative(x, b, db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "level", rename_all = "kebab-case")]
pub enum Clamp {
    None,
    /// min(value, level)
    Min(f64),
    /// max(value, level)
    Max(f64),
}

impl Clamp {
    /// Clamped value and whether the clamp is active.
    fn apply(&self, v: f64) -> (f64, bool) {
        match *self {
            Clamp::None => (v, false),
            Clamp::Min(l) if v > l => (l, true),
            Clamp::Max(l) if v < l => (l, true),
            _ => (v, false),
        }
    }
}

/// pieces[k] lives on [junctions[k-1], junctions[k]); a junction node takes
/// the value of the piece to its right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseProfile {
    pub base: BaseSamples,
    pub junctions: Vec<f64>,
    pub pieces: Vec<Piece>,
    pub clamp: Clamp,
}

impl PiecewiseProfile {
    fn piece_index(&self, x: f64) -> usize {
        let tol = 1e-9 * self.base.h;
        self.junctions.partition_point(|j| *j <= x + tol)
    }

    pub fn raw_value(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].value(x, self.base.value(x))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.clamp.apply(self.raw_value(x)).0
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }

    pub fn sample_with_clamp(&self, xs: &[f64]) -> (Vec<f64>, Vec<bool>) {
        xs.iter().map(|&x| self.clamp.apply(self.raw_value(x))).unzip()
    }

    /// Left and right values of the unclamped profile at junction k.
    fn junction_values(&self, k: usize) -> (f64, f64) {
        let x = self.junctions[k];
        let b = self.base.value(x);
        (self.pieces[k].value(x, b), self.pieces[k + 1].value(x, b))
    }

    /// Largest jump across a junction, after clamping.
    pub fn continuity_residual(&self) -> f64 {
        (0..self.junctions.len())
            .map(|k| {
                let (l, r) = self.junction_values(k);
                (self.clamp.apply(l).0 - self.clamp.apply(r).0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_continuity(&self) -> Result<(), CertError> {
        for k in 0..self.junctions.len() {
            let (l, r) = self.junction_values(k);
            let gap = (self.clamp.apply(l).0 - self.clamp.apply(r).0).abs();
            if !(gap <= CONTINUITY_TOL) {
                return Err(CertError::DiscontinuityDetected { at: self.junctions[k], gap });
            }
        }
        Ok(())
    }

    /// One-sided derivatives of the clamped profile at junction k.
    pub fn one_sided_derivatives(&self, k: usize) -> (f64, f64) {
        let x = self.junctions[k];
        let b = self.base.value(x);
        let db = self.base.slope(x);
        let side = |p: &Piece| {
            let (_, clamped) = self.clamp.apply(p.value(x, b));
            if clamped {
                0.0
            } else {
                p.derivative(x, b, db)
            }
        };
        (side(&self.pieces[k]), side(&self.pieces[k + 1]))
    }

    /// Every interior piece must contain at least MIN_PIECE_NODES nodes of xs.
    pub fn check_resolution(&self, xs: &[f64]) -> Result<(), CertError> {
        for k in 1..self.pieces.len().saturating_sub(1) {
            let (a, b) = (self.junctions[k - 1], self.junctions[k]);
            let nodes = xs.iter().filter(|&&x| x >= a - 1e-9 * self.base.h && x <= b + 1e-9 * self.base.h).count();
            if nodes < MIN_PIECE_NODES {
                return Err(CertError::UnresolvedPiece { piece: k, nodes });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BaseSamples {
        let h = 0.1;
        let values: Vec<f64> = (0..101).map(|i| 1.0 / (1.0 + (-5.0 + i as f64 * h).exp())).collect();
        BaseSamples { left: -5.0, h, values, left_value: 1.0, right_value: 0.0, speed: 1.0 }
    }

    #[test]
    fn modifier_derivatives_match_differences() {
        let mods = [
            Modifier::Exp { amp: 0.3, rate: -1.2 },
            Modifier::LinExp { amp: 0.2, origin: -1.0, rate: -0.4 },
            Modifier::Sine { amp: -0.1, freq: 2.0, origin: 0.3 },
            Modifier::PowerDeviation { amp: 0.05, theta: 0.5, target: 1.0 },
            Modifier::PowerBase { amp: -0.05, theta: 0.5 },
        ];
        // base as an exact function b(x) = e^{x/3}
        let b = |x: f64| (x / 3.0).exp();
        for m in mods {
            let x = -2.3;
            let e = 1e-6;
            let fd = (m.value(x + e, b(x + e)) - m.value(x - e, b(x - e))) / (2.0 * e);
            assert!((fd - m.derivative(x, b(x), b(x) / 3.0)).abs() < 1e-8, "{m:?}");
        }
    }

    #[test]
    fn base_is_exact_at_nodes() {
        let b = base();
        assert_eq!(b.value(-5.0 + 37.0 * 0.1), b.values[37]);
        assert_eq!(b.value(-100.0), 1.0);
        assert_eq!(b.value(100.0), 0.0);
    }

    #[test]
    fn continuity_and_corners() {
        let b = base();
        let x0 = -5.0 + 50.0 * 0.1;
        let w0 = b.values[50];
        // replace the base by a tangent-free exponential matching at x0
        let p = PiecewiseProfile {
            base: b.clone(),
            junctions: vec![x0],
            pieces: vec![Piece::base(Modifier::Zero), Piece::free(Modifier::Exp { amp: w0 * (2.0 * x0).exp(), rate: -2.0 })],
            clamp: Clamp::None,
        };
        assert!(p.continuity_residual() < 1e-14);
        let (l, r) = p.one_sided_derivatives(0);
        assert!(l > r);
        let broken = PiecewiseProfile { pieces: vec![Piece::base(Modifier::Zero), Piece::free(Modifier::Zero)], ..p };
        assert!(matches!(broken.check_continuity(), Err(CertError::DiscontinuityDetected { .. })));
    }

    #[test]
    fn clamp_flags_nodes() {
        let p = PiecewiseProfile {
            base: base(),
            junctions: vec![],
            pieces: vec![Piece::base(Modifier::Const { value: 0.2 })],
            clamp: Clamp::Min(1.0),
        };
        let (v, c) = p.sample_with_clamp(&[-4.0, 4.0]);
        assert_eq!(v[0], 1.0);
        assert!(c[0] && !c[1]);
    }

    #[test]
    fn thin_piece_is_unresolved() {
        let b = base();
        let p = PiecewiseProfile {
            base: b.clone(),
            junctions: vec![0.0, 0.1],
            pieces: vec![Piece::base(Modifier::Zero); 3],
            clamp: Clamp::None,
        };
        assert!(matches!(p.check_resolution(&b.xs()), Err(CertError::UnresolvedPiece { nodes: 2, .. })));
    }
}
