//! Sparse symmetric storage and a profile (skyline) LDL^T factorization.
//!
//! Mesh degrees of freedom are numbered edge by edge along each edge, with
//! vertex nodes last. Under that ordering every edge-interior row has a
//! profile of width one, and only the few vertex rows carry long profiles,
//! so the factorization is exact and costs O(V * n) storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, a)| a * x[j]).sum()).collect()
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, a)| a * x[j]).sum::<f64>()).sum()
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `scale * A + diag(d)`.
    pub fn scaled_plus_diagonal(&self, scale: f64, d: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= scale;
        }
        for (i, di) in d.iter().enumerate() {
            let r = out.row_ptr[i]..out.row_ptr[i + 1];
            let k = out.cols[r.clone()].binary_search(&i).expect("diagonal entry present");
            out.vals[r.start + k] += di;
        }
        out
    }
}

/// `A = L D L^T` with unit lower-triangular `L` stored by row profile.
#[derive(Debug, Clone)]
pub struct ProfileLdl {
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl ProfileLdl {
    /// Factor a symmetric positive definite matrix; any nonpositive pivot
    /// is an error.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_with(a, |d| d > 0.0)
    }

    /// Factor a symmetric matrix without pivoting, accepting pivots of
    /// either sign but failing on tiny ones (relative to the diagonal).
    pub fn factor_indefinite(a: &CsrMatrix) -> Result<Self> {
        let scale = (0..a.dim()).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        Self::factor_with(a, |d| d.abs() > 1e-14 * scale)
    }

    fn factor_with(a: &CsrMatrix, pivot_ok: impl Fn(f64) -> bool) -> Result<Self> {
        let n = a.dim();
        let mut first: Vec<usize> = (0..n).collect();
        for (i, f) in first.iter_mut().enumerate() {
            if let Some((j, _)) = a.row(i).next() {
                *f = (*f).min(j);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; offset[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j < i {
                    lower[offset[i] + j - first[i]] = v;
                } else if j == i {
                    diag[i] = v;
                }
            }
        }

        // Row-wise elimination: before the division, lower[i][j] holds
        // (L D)_ij = A_ij - sum_k L_ik D_k L_jk.
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let mut s = lower[offset[i] + j - fi];
                if start < j {
                    let ri = &lower[offset[i] + start - fi..offset[i] + j - fi];
                    let rj = &lower[offset[j] + start - fj..offset[j] + j - fj];
                    let dk = &diag[start..j];
                    for ((&lik, &ljk), &d) in ri.iter().zip(rj).zip(dk) {
                        s -= lik * d * ljk;
                    }
                }
                lower[offset[i] + j - fi] = s / diag[j];
            }
            let row = &lower[offset[i]..offset[i + 1]];
            let mut d = diag[i];
            for (k, &l) in row.iter().enumerate() {
                d -= l * l * diag[fi + k];
            }
            if !pivot_ok(d) || !d.is_finite() {
                return Err(Error::LinearSolveFailure { row: i, pivot: d });
            }
            diag[i] = d;
        }
        Ok(ProfileLdl { first, offset, lower, diag })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            for (k, l) in row.iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        x
    }

    /// Number of stored off-diagonal entries.
    pub fn profile_size(&self) -> usize {
        self.lower.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, piv);
            b.swap(k, piv);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn matches_dense_elimination_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 17, 40] {
            // random sparse symmetric, made diagonally dominant
            let mut trip = Vec::new();
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..i {
                    if rng.random_bool(0.2) {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        trip.push((i, j, v));
                        trip.push((j, i, v));
                        dense[i][j] += v;
                        dense[j][i] += v;
                    }
                }
            }
            for i in 0..n {
                let s: f64 = dense[i].iter().map(|v| v.abs()).sum::<f64>() + 1.0;
                trip.push((i, i, s));
                dense[i][i] += s;
            }
            let a = CsrMatrix::from_triplets(n, trip);
            assert_eq!(a.max_asymmetry(), 0.0);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = ProfileLdl::factor(&a).unwrap().solve(&b);
            let y = dense_solve(dense, b);
            for (p, q) in x.iter().zip(&y) {
                assert!((p - q).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(ProfileLdl::factor(&a), Err(Error::LinearSolveFailure { row: 1, .. })));
        let x = ProfileLdl::factor_indefinite(&a).unwrap().solve(&[3.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let singular = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(ProfileLdl::factor_indefinite(&singular).is_err());
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.matvec(&[1.0, 2.0]), vec![3.0, 2.0]);
        assert_eq!(a.quadratic_form(&[1.0, 2.0]), 7.0);
    }
}
