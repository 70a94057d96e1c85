use std::ops::{Index, IndexMut};

use crate::scalar::{Real, Scalar};

/// Dense row-major matrix. The games handled here are small enough that
/// sparsity buys nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<T, F: FnMut(&S) -> T>(&self, f: F) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = o.clone() + a.clone() * vi.clone();
            }
        }
        out
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// Solves the symmetric positive semidefinite system `m x = b` by Gaussian
/// elimination with complete pivoting. Pivots below a relative tolerance are
/// treated as rank deficiency and the matching unknowns are set to zero, so a
/// consistent singular system yields one particular solution.
pub(crate) fn solve_psd<T: Real>(m: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = b.len();
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut rhs = b.to_vec();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let tol = T::lit(1e-13) * scale.max(T::one());

    let mut rank = 0;
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, T::zero());
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, &v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    best = v.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= tol {
            break;
        }
        a.swap(k, pi);
        rhs.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        col_perm.swap(k, pj);

        let pivot = a[k][k];
        for i in k + 1..n {
            let factor = a[i][k] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in k..n {
                let v = a[k][j];
                a[i][j] = a[i][j] - factor * v;
            }
            rhs[i] = rhs[i] - factor * rhs[k];
        }
        rank += 1;
    }

    let mut x_perm = vec![T::zero(); n];
    for k in (0..rank).rev() {
        let mut s = rhs[k];
        for j in k + 1..rank {
            s = s - a[k][j] * x_perm[j];
        }
        x_perm[k] = s / a[k][k];
    }
    let mut x = vec![T::zero(); n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = x_perm[k];
    }
    x
}
