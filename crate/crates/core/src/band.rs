//! Square complex band matrices, enough for composing finite-difference
//! stencils on long grids.

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    half_width: usize,
    // row-major, each row stores columns i - w ..= i + w
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, half_width: usize) -> Self {
        BandMatrix {
            n,
            half_width,
            data: vec![C64::new(0.0, 0.0); n * (2 * half_width + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let w = self.half_width;
        if i >= self.n || j >= self.n || j + w < i || j > i + w {
            return None;
        }
        Some(i * (2 * w + 1) + (j + w - i))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j)
            .map(|s| self.data[s])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    fn columns(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.half_width);
        let hi = (i + self.half_width + 1).min(self.n);
        lo..hi
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matmul(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let w = self.half_width + other.half_width;
        let mut out = BandMatrix::zeros(self.n, w);
        for i in 0..self.n {
            for k in self.columns(i) {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in other.columns(k) {
                    let s = out.slot(i, j).expect("within product band");
                    out.data[s] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self + scale * other`, widening the band as needed.
    pub fn add_scaled(&self, other: &BandMatrix, scale: C64) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let w = self.half_width.max(other.half_width);
        let mut out = BandMatrix::zeros(self.n, w);
        for i in 0..self.n {
            for j in out.columns(i) {
                let s = out.slot(i, j).expect("within band");
                out.data[s] = self.get(i, j) + scale * other.get(i, j);
            }
        }
        out
    }

    /// Largest `|A_ij - conj(A_ji)|` over rows and columns in `range`.
    pub fn hermiticity_residual(&self, range: std::ops::Range<usize>) -> f64 {
        let mut worst = 0.0f64;
        for i in range.clone() {
            for j in self.columns(i) {
                if range.contains(&j) {
                    worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &BandMatrix) -> Vec<Vec<C64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn product_matches_dense() {
        let n = 9;
        let mut a = BandMatrix::zeros(n, 1);
        let mut b = BandMatrix::zeros(n, 2);
        for i in 0..n {
            for j in a.columns(i) {
                a.set(i, j, C64::new((i + 2 * j) as f64, (i as f64) - 1.0));
            }
            for j in b.columns(i) {
                b.set(i, j, C64::new(1.0 + j as f64, -(i as f64)));
            }
        }
        let c = a.matmul(&b);
        let (da, db) = (dense(&a), dense(&b));
        for i in 0..n {
            for j in 0..n {
                let want: C64 = (0..n).map(|k| da[i][k] * db[k][j]).sum();
                assert!((c.get(i, j) - want).norm() < 1e-12);
            }
        }
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let y = c.mul_vec(&x);
        let y2 = a.mul_vec(&b.mul_vec(&x));
        for (u, v) in y.iter().zip(&y2) {
            assert!((u - v).norm() < 1e-9);
        }
    }

    #[test]
    fn identity_and_sum() {
        let id = BandMatrix::identity(4);
        let two = id.add_scaled(&id, C64::new(1.0, 0.0));
        assert_eq!(two.get(2, 2), C64::new(2.0, 0.0));
        assert_eq!(two.get(1, 2), C64::new(0.0, 0.0));
        assert_eq!(id.hermiticity_residual(0..4), 0.0);
    }
}
