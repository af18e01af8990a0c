use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Points per panel of the composite rule.
pub const GL_POINTS: usize = 12;

/// Reference nodes and weights on [-1, 1].
pub fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(GL_POINTS)
            .expect("valid degree")
            .into_node_weight_pairs()
    })
}

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    if b == a {
        return 0.0;
    }
    let rule = gl_rule();
    let w = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * w;
        let mid = lo + 0.5 * w;
        for &(x, wt) in rule {
            sum += wt * f(mid + 0.5 * w * x);
        }
    }
    sum * 0.5 * w
}

/// Integrate across a list of sorted breakpoints, `panels` per piece.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(breaks: &[f64], panels: usize, mut f: F) -> f64 {
    breaks
        .windows(2)
        .map(|p| integrate(p[0], p[1], panels, &mut f))
        .sum()
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(h: f64, ys: &[f64]) -> f64 {
    match ys.len() {
        0 | 1 => 0.0,
        n => h * (ys[1..n - 1].iter().sum::<f64>() + 0.5 * (ys[0] + ys[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_high_degree() {
        // degree 22 is exact for 12 points
        let v = integrate(-1.0, 2.0, 1, |x| x.powi(22));
        let exact = (2f64.powi(23) + 1.0) / 23.0;
        assert!((v - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn pieces_sum() {
        let v = integrate_pieces(&[0.0, 0.5, 1.0], 2, |x| x.exp());
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear() {
        assert!((trapezoid(0.5, &[0.0, 0.5, 1.0]) - 0.5).abs() < 1e-15);
    }
}
