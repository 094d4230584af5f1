//! Symmetric banded storage and its Cholesky factorization.

use nalgebra::DMatrix;

/// Lower band of a symmetric matrix: row `i` stores columns `i - bandwidth ..= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        i * (self.bandwidth + 1) + (self.bandwidth - (i - j))
    }

    /// Entry `(i, j)` with `j <= i`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bandwidth {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j);
        self.data[s] = value;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if j <= i { self.get(i, j) } else { self.get(j, i) })
    }

    /// `A = R Rᵀ` with `R` lower triangular of the same bandwidth. Returns
    /// `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<BandedCholesky> {
        let w = self.bandwidth;
        let mut f = self.clone();
        for i in 0..self.n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let kmin = lo.max(j.saturating_sub(w));
                let mut s = f.data[f.slot(i, j)];
                let ri = f.slot(i, kmin);
                let rj = f.slot(j, kmin);
                let len = j - kmin;
                s -= f.data[ri..ri + len]
                    .iter()
                    .zip(&f.data[rj..rj + len])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    let d = f.slot(i, i);
                    f.data[d] = s.sqrt();
                } else {
                    let d = f.data[f.slot(j, j)];
                    let t = f.slot(i, j);
                    f.data[t] = s / d;
                }
            }
        }
        Some(BandedCholesky { factor: f })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: BandedMatrix,
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.factor.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let f = &self.factor;
        let w = f.bandwidth;
        // R y = b
        for i in 0..f.n {
            let lo = i.saturating_sub(w);
            let row = f.slot(i, lo);
            let s: f64 = f.data[row..row + (i - lo)].iter().zip(&x[lo..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / f.data[f.slot(i, i)];
        }
        // Rᵀ x = y
        for i in (0..f.n).rev() {
            x[i] /= f.data[f.slot(i, i)];
            let xi = x[i];
            let lo = i.saturating_sub(w);
            let row = f.slot(i, lo);
            for (k, r) in (lo..i).zip(&f.data[row..row + (i - lo)]) {
                x[k] -= r * xi;
            }
        }
    }
}
