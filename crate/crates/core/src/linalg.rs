//! Small dense linear algebra, generic over the scalar.
//!
//! Sizes here are tiny (at most 2^n x 2^n with n <= 8), and the same code
//! must run over exact rationals, so this is a plain Gauss-Jordan with
//! partial pivoting rather than an external solver.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![S::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let term = a[i][l].clone() * b[l][j].clone();
                let cur = std::mem::replace(&mut out[i][j], S::zero());
                out[i][j] = cur + term;
            }
        }
    }
    out
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, x: &[S]) -> Vec<S> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect()
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].clone()).collect())
        .collect()
}

/// Max-abs entry, for residual norms.
pub fn max_abs<S: Scalar>(a: &Matrix<S>) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.abs_f64())
        .fold(0.0, f64::max)
}

fn norm_inf<S: Scalar>(a: &Matrix<S>) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs_f64()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse by Gauss-Jordan with partial pivoting (pivot chosen by f64
/// magnitude, which also orders exact rationals correctly). A pivot that is
/// exactly zero in exact mode, or has magnitude below ~1e-300 in float
/// mode, reports a singular matrix.
pub fn invert<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>> {
    let n = a.len();
    let mut work = a.clone();
    let mut inv = identity::<S>(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                work[i][col]
                    .abs_f64()
                    .partial_cmp(&work[j][col].abs_f64())
                    .expect("pivot magnitudes must compare")
            })
            .expect("non-empty column");
        let pivot_ok = if S::EXACT {
            !work[pivot_row][col].is_zero()
        } else {
            work[pivot_row][col].abs_f64() > f64::MIN_POSITIVE
        };
        if !pivot_ok {
            return Err(Error::Singular { cond: None });
        }
        work.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = work[col][col].clone();
        for j in 0..n {
            work[col][j] = std::mem::replace(&mut work[col][j], S::zero()) / pivot.clone();
            inv[col][j] = std::mem::replace(&mut inv[col][j], S::zero()) / pivot.clone();
        }
        for row in 0..n {
            if row == col || work[row][col].is_zero() {
                continue;
            }
            let factor = work[row][col].clone();
            for j in 0..n {
                let w = work[col][j].clone() * factor.clone();
                let cur = std::mem::replace(&mut work[row][j], S::zero());
                work[row][j] = cur - w;
                let v = inv[col][j].clone() * factor.clone();
                let cur = std::mem::replace(&mut inv[row][j], S::zero());
                inv[row][j] = cur - v;
            }
        }
    }
    Ok(inv)
}

/// Solve A x = b through the explicit inverse (sizes are tiny).
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>> {
    Ok(mat_vec(&invert(a)?, b))
}

/// Infinity-norm condition estimate from a matrix and its inverse.
pub fn cond_inf<S: Scalar>(a: &Matrix<S>, inv: &Matrix<S>) -> f64 {
    norm_inf(a) * norm_inf(inv)
}

/// Matrix exponential by plain Taylor summation; fixture generators are
/// small (norms of order 1), where this is accurate and fast.
pub fn mat_exp<S: Scalar>(m: &Matrix<S>, tol: f64, cap: usize) -> Result<Matrix<S>> {
    let n = m.len();
    let mut sum = identity::<S>(n);
    let mut term = identity::<S>(n);
    for k in 1..=cap {
        term = mat_mul(&term, m);
        let factor = S::one() / S::from_i64(k as i64);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x = std::mem::replace(x, S::zero()) * factor.clone();
            }
        }
        for i in 0..n {
            for j in 0..n {
                let t = term[i][j].clone();
                let cur = std::mem::replace(&mut sum[i][j], S::zero());
                sum[i][j] = cur + t;
            }
        }
        if max_abs(&term) <= tol * max_abs(&sum).max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::SeriesDiverged(cap))
}
