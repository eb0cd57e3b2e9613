//! Banded linear systems: compact storage, LU factorization with partial
//! pivoting, and back substitution.
//!
//! Row `i` stores the columns `i - kl ..= i + ku` contiguously, so the diagonal
//! always sits at band position `kl`. Factorization follows the classic
//! band-LU with row swaps confined to the band; pivoting widens the stored
//! upper band from `ku` to `kl + ku`.

use crate::error::{Error, Result};

/// A general banded matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    rows: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> BandedMatrix {
        BandedMatrix {
            n,
            kl,
            ku,
            rows: vec![0.0; n * (kl + ku + 1)],
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn band_index(&self, i: usize, col: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        if col < lo || col > hi {
            None
        } else {
            Some(i * self.width() + (col + self.kl - i))
        }
    }

    /// Entry `(i, col)`; zero outside the band.
    pub fn get(&self, i: usize, col: usize) -> f64 {
        self.band_index(i, col).map_or(0.0, |idx| self.rows[idx])
    }

    /// Sets entry `(i, col)`; panics if the position is outside the band.
    pub fn set(&mut self, i: usize, col: usize, v: f64) {
        let idx = self
            .band_index(i, col)
            .unwrap_or_else(|| panic!("({i}, {col}) outside band kl={} ku={}", self.kl, self.ku));
        self.rows[idx] = v;
    }

    /// Adds `v` to entry `(i, col)`; panics outside the band.
    pub fn add(&mut self, i: usize, col: usize, v: f64) {
        let idx = self
            .band_index(i, col)
            .unwrap_or_else(|| panic!("({i}, {col}) outside band kl={} ku={}", self.kl, self.ku));
        self.rows[idx] += v;
    }

    /// Dense matrix-vector product restricted to the band.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for col in lo..=hi {
                acc += self.rows[i * self.width() + (col + self.kl - i)] * x[col];
            }
            y[i] = acc;
        }
        y
    }

    /// LU factorization with partial pivoting; consumes the matrix.
    pub fn factor(self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let mm = kl + self.ku + 1 + kl; // widened upper storage
        let mut upper = vec![0.0; n * mm];
        // Left-align each row: upper[i][j] holds A[i, i - kl + j] for the
        // original band, shifted so column i starts at position 0 when i < kl.
        for i in 0..n {
            let shift = kl.saturating_sub(i);
            for j in 0..self.width() {
                let src = self.rows[i * self.width() + j];
                if j >= shift {
                    upper[i * mm + (j - shift)] = src;
                }
            }
        }
        let mut low = vec![0.0; n * kl];
        let mut index = vec![0usize; n];
        let mut reach = kl;
        for k in 0..n {
            if reach < n {
                reach += 1;
            }
            let mut pivot = upper[k * mm];
            let mut pivot_row = k;
            for i in k + 1..reach {
                if upper[i * mm].abs() > pivot.abs() {
                    pivot = upper[i * mm];
                    pivot_row = i;
                }
            }
            index[k] = pivot_row;
            if pivot == 0.0 {
                return Err(Error::SingularMatrix(k));
            }
            if pivot_row != k {
                for j in 0..mm {
                    upper.swap(k * mm + j, pivot_row * mm + j);
                }
            }
            for i in k + 1..reach {
                let mult = upper[i * mm] / upper[k * mm];
                low[k * kl + (i - k - 1)] = mult;
                for j in 1..mm {
                    upper[i * mm + (j - 1)] = upper[i * mm + j] - mult * upper[k * mm + j];
                }
                upper[i * mm + (mm - 1)] = 0.0;
            }
        }
        Ok(BandedLu {
            n,
            kl,
            mm,
            upper,
            low,
            index,
        })
    }
}

/// Factored form ready for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    mm: usize,
    upper: Vec<f64>,
    low: Vec<f64>,
    index: Vec<usize>,
}

impl BandedLu {
    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, mm) = (self.n, self.kl, self.mm);
        let mut reach = kl;
        for k in 0..n {
            let j = self.index[k];
            if j != k {
                b.swap(k, j);
            }
            if reach < n {
                reach += 1;
            }
            for i in k + 1..reach {
                b[i] -= self.low[k * kl + (i - k - 1)] * b[k];
            }
        }
        let mut used = 1;
        for i in (0..n).rev() {
            let mut acc = b[i];
            for k in 1..used {
                acc -= self.upper[i * mm + k] * b[k + i];
            }
            b[i] = acc / self.upper[i * mm];
            if used < mm {
                used += 1;
            }
        }
    }

    /// Convenience wrapper returning a fresh vector.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain dense Gaussian elimination with partial pivoting, used as the
    /// reference solver for small systems.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
            m.swap(k, p);
            x.swap(k, p);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= m[i][j] * x[j];
            }
            x[i] = acc / m[i][i];
        }
        x
    }

    fn to_dense(b: &BandedMatrix) -> Vec<Vec<f64>> {
        (0..b.n)
            .map(|i| (0..b.n).map(|j| b.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let n = 12;
        let mut a = BandedMatrix::new(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 2.0 + 0.1 * i as f64);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -0.7);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = dense_solve(&to_dense(&a), &b);
        let lu = a.factor().unwrap();
        let x = lu.solve(&b);
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-12, "i={i}: {} vs {}", x[i], dense[i]);
        }
    }

    #[test]
    fn pivoting_handles_weak_diagonal() {
        // strongly off-diagonally dominant rows force genuine row swaps
        let n = 9;
        let mut a = BandedMatrix::new(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 1e-6);
            if i >= 2 {
                a.set(i, i - 2, 3.0);
            }
            if i + 2 < n {
                a.set(i, i + 2, -4.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let b = a.mul_vec(&x_true);
        let lu = a.factor().unwrap();
        let x = lu.solve(&b);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-8, "i={i}: {}", x[i]);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::new(4, 1, 1);
        for i in 0..4 {
            a.set(i, i, 0.0);
        }
        assert!(matches!(a.factor(), Err(Error::SingularMatrix(_))));
    }

    proptest! {
        #[test]
        fn random_banded_systems_match_dense(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(6..24);
            let kl = rng.gen_range(1..4usize).min(n - 1);
            let ku = rng.gen_range(1..4usize).min(n - 1);
            let mut a = BandedMatrix::new(n, kl, ku);
            for i in 0..n {
                for col in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    a.set(i, col, rng.gen_range(-1.0..1.0));
                }
                // keep the system comfortably nonsingular
                a.add(i, i, 4.0);
            }
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b = a.mul_vec(&x_true);
            let dense = dense_solve(&to_dense(&a), &b);
            let x = a.factor().unwrap().solve(&b);
            for i in 0..n {
                prop_assert!((x[i] - dense[i]).abs() < 1e-9);
                prop_assert!((x[i] - x_true[i]).abs() < 1e-9);
            }
        }
    }
}
