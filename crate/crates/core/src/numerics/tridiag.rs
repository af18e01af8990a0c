/// Thomas algorithm: sub-diagonal `a` (a[0] unused), diagonal `b`, super-diagonal `c`
/// (c[n-1] unused). Overwrites `d` with the solution. No pivoting, so only meant
/// for diagonally dominant systems.
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    let mut cp = vec![0.0; n];
    let mut denom = b[0];
    cp[0] = c[0] / denom;
    d[0] /= denom;
    for i in 1..n {
        denom = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / denom } else { 0.0 };
        d[i] = (d[i] - a[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Pre-factored constant tridiagonal matrix, reused across time steps.
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    a: Vec<f64>,
    cp: Vec<f64>,
    inv: Vec<f64>,
}

impl TridiagFactor {
    pub fn new(a: &[f64], b: &[f64], c: &[f64]) -> Self {
        let n = b.len();
        let mut cp = vec![0.0; n];
        let mut inv = vec![0.0; n];
        for i in 0..n {
            let denom = if i == 0 { b[0] } else { b[i] - a[i] * cp[i - 1] };
            inv[i] = 1.0 / denom;
            cp[i] = if i + 1 < n { c[i] * inv[i] } else { 0.0 };
        }
        Self { a: a.to_vec(), cp, inv }
    }

    pub fn solve(&self, d: &mut [f64]) {
        let n = d.len();
        if n == 0 {
            return;
        }
        d[0] *= self.inv[0];
        for i in 1..n {
            d[i] = (d[i] - self.a[i] * d[i - 1]) * self.inv[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.cp[i] * d[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4 8 8] -> x = [1 2 3]
        let a = [0.0, 1.0, 1.0];
        let b = [2.0, 2.0, 2.0];
        let c = [1.0, 1.0, 0.0];
        let mut d = [4.0, 8.0, 8.0];
        solve_tridiagonal(&a, &b, &c, &mut d);
        for (x, e) in d.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-14);
        }
        let f = TridiagFactor::new(&a, &b, &c);
        let mut d = [4.0, 8.0, 8.0];
        f.solve(&mut d);
        assert!((d[2] - 3.0).abs() < 1e-14);
    }
}
