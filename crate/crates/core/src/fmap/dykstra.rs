//! Dykstra's alternating projections between the affine set `{F y = f}` and
//! the shifted orthant `{y ≥ ε}`. Slow but independent of the active-set
//! solver; used to cross-check it.

use crate::error::{Error, Result};
use crate::linalg::{solve_psd, Matrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct DykstraConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DykstraConfig {
    fn default() -> Self {
        Self { tolerance: 1e-13, max_iterations: 2_000_000 }
    }
}

pub fn dykstra_project<T: Real>(f: &Matrix<T>, rhs: &[T], eps: T, z: &[T], config: DykstraConfig) -> Result<Vec<T>> {
    let (m, n) = (f.rows(), f.cols());
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    let gram: Vec<Vec<T>> = (0..m)
        .map(|a| (0..m).map(|b| dot(f.row(a), f.row(b))).collect())
        .collect();
    let affine = |x: &[T]| -> Vec<T> {
        let r: Vec<T> = (0..m).map(|a| dot(f.row(a), x) - rhs[a]).collect();
        let lambda = solve_psd(&gram, &r);
        let mut out = x.to_vec();
        for (a, &l) in lambda.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(f.row(a)) {
                *o = *o - v * l;
            }
        }
        out
    };
    let tol = T::lit(config.tolerance);

    let mut x = z.to_vec();
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    for _ in 0..config.max_iterations {
        let shifted: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a + b).collect();
        let y = affine(&shifted);
        for i in 0..n {
            p[i] = shifted[i] - y[i];
        }
        let mut next = vec![T::zero(); n];
        for i in 0..n {
            let v = y[i] + q[i];
            next[i] = v.max(eps);
            q[i] = v - next[i];
        }
        let change = x.iter().zip(&next).fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        let gap = y.iter().zip(&next).fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        x = next;
        if change < tol && gap < tol {
            return Ok(x);
        }
    }
    Err(Error::ProjectionStalled { iterations: config.max_iterations, residual: f64::NAN })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
