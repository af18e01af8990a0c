use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("singular banded matrix at pivot {0}")]
pub struct SingularMatrix(pub usize);

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise
/// with room for the fill-in produced by partial pivoting.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i},{j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// y = A x (using the unfactored entries).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting; `b` is overwritten by the solution.
    pub fn solve(mut self, b: &mut [f64]) -> Result<(), SingularMatrix> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=last {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix(j));
            }
            piv[j] = p;
            let cmax = (j + ku + kl).min(n - 1);
            if p != j {
                for k in j..=cmax {
                    let a = self.idx(j, k);
                    let c = self.idx(p, k);
                    self.data.swap(a, c);
                }
            }
            let d = self.data[self.idx(j, j)];
            for i in j + 1..=last {
                let ij = self.idx(i, j);
                let l = self.data[ij] / d;
                self.data[ij] = l;
                if l != 0.0 {
                    for k in j + 1..=cmax {
                        let jk = self.data[self.idx(j, k)];
                        let ik = self.idx(i, k);
                        self.data[ik] -= l * jk;
                    }
                }
            }
        }
        // forward: interleaved row swaps and elimination
        for j in 0..n {
            let p = piv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in j + 1..=(j + kl).min(n - 1) {
                    b[i] -= self.data[self.idx(i, j)] * bj;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..=(i + ku + kl).min(n - 1) {
                s -= self.data[self.idx(i, k)] * b[k];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut x = b.to_vec();
        for j in 0..n {
            let p = (j..n).max_by(|&r, &s| m[r][j].abs().total_cmp(&m[s][j].abs())).unwrap();
            m.swap(j, p);
            x.swap(j, p);
            for i in j + 1..n {
                let l = m[i][j] / m[j][j];
                for k in j..n {
                    m[i][k] -= l * m[j][k];
                }
                x[i] -= l * x[j];
            }
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (x[i] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn matches_dense_with_pivoting() {
        let n = 9;
        let (kl, ku) = (2, 1);
        let mut band = Banded::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces row swaps
                let v = if i == j { 0.1 } else { 1.0 + (3 * i + 7 * j) as f64 * 0.13 % 1.0 };
                band.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let expected = dense_solve(&dense, &b);
        let mut x = b.clone();
        band.clone().solve(&mut x).unwrap();
        for (u, v) in x.iter().zip(&expected) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
        let back = band.matvec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let band = Banded::zeros(3, 1, 1);
        let mut b = vec![1.0; 3];
        assert_eq!(band.solve(&mut b), Err(SingularMatrix(0)));
    }
}
