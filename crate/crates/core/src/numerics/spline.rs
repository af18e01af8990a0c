use super::tridiag::solve_tridiagonal;

/// Natural cubic spline through sorted knots; extrapolates with the end cubics.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Panics unless there are at least two strictly increasing knots.
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len(), "need matching knots");
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "knots must increase");
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let (mut a, mut b, mut c, mut d) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                a[i - 1] = h0;
                b[i - 1] = 2.0 * (h0 + h1);
                c[i - 1] = h1;
                d[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            solve_tridiagonal(&a, &b, &c, &mut d);
            m[1..n - 1].copy_from_slice(&d);
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), m }
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value, first and second derivative.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let v = a * self.ys[i] + b * self.ys[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.ys[i + 1] - self.ys[i]) / h
            + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval3(x).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_and_lines() {
        let xs = [0.0, 0.3, 1.0, 1.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let s = CubicSpline::new(&xs, &ys);
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!((s.eval(x) - y).abs() < 1e-14);
        }
        let (v, d, dd) = s.eval3(0.77);
        assert!((v - 0.54).abs() < 1e-14 && (d - 2.0).abs() < 1e-13 && dd.abs() < 1e-12);
    }

    #[test]
    fn smooth_function_accuracy() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::new(&xs, &ys);
        let (v, d, _) = s.eval3(0.4321);
        assert!((v - 0.4321f64.sin()).abs() < 1e-9);
        assert!((d - 0.4321f64.cos()).abs() < 1e-6);
    }
}
