//! Fixed-size dense helpers for the 4×4 and 16×16 matrices in the model.
//!
//! Factorisations go through `nalgebra` in `f64` regardless of the scalar
//! type; the matrices involved are tiny.

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Matrix<T, const N: usize> = [[T; N]; N];

pub fn identity<T: Real, const N: usize>() -> Matrix<T, N> {
    let mut m = [[T::zero(); N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn mat_mul<T: Real, const N: usize>(a: &Matrix<T, N>, b: &Matrix<T, N>) -> Matrix<T, N> {
    let mut out = [[T::zero(); N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            for j in 0..N {
                out[i][j] = out[i][j] + aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose<T: Copy, const N: usize>(a: &Matrix<T, N>) -> Matrix<T, N> {
    let mut out = *a;
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

pub fn frobenius_norm<T: Real, const N: usize>(a: &Matrix<T, N>) -> T {
    a.iter().flatten().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

pub fn max_abs_diff<T: Real, const N: usize>(a: &Matrix<T, N>, b: &Matrix<T, N>) -> T {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

fn to_dense<T: Real, const N: usize>(a: &Matrix<T, N>) -> SMatrix<f64, N, N> {
    SMatrix::from_fn(|i, j| a[i][j].as_f64())
}

fn to_dynamic<T: Real, const N: usize>(a: &Matrix<T, N>) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |i, j| a[i][j].as_f64())
}

/// Inverse via LU with partial pivoting, carried out in `f64`.
pub fn inverse<T: Real, const N: usize>(a: &Matrix<T, N>) -> Result<Matrix<T, N>> {
    let dense = to_dense(a);
    let inv = dense
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular {
            smallest_singular_value: 0.0,
            condition: f64::INFINITY,
        })?;
    let mut out = [[T::zero(); N]; N];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = T::lit(inv[(i, j)]);
        }
    }
    Ok(out)
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real, const N: usize>(a: &Matrix<T, N>) -> [T; N] {
    let eig = to_dynamic(a).symmetric_eigenvalues();
    let mut out = [T::zero(); N];
    for (o, &e) in out.iter_mut().zip(eig.iter()) {
        *o = T::lit(e);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Singular values, descending.
pub fn singular_values<T: Real, const N: usize>(a: &Matrix<T, N>) -> [T; N] {
    let sv = to_dynamic(a).singular_values();
    let mut out = [T::zero(); N];
    for (o, &s) in out.iter_mut().zip(sv.iter()) {
        *o = T::lit(s);
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Eigenvalues of a 4×4 Hermitian matrix, ascending.
pub fn hermitian_eigenvalues4<T: Real>(h: &Matrix<Complex<T>, 4>) -> [T; 4] {
    let dense: SMatrix<Complex<f64>, 4, 4> =
        SMatrix::from_fn(|i, j| Complex::new(h[i][j].re.as_f64(), h[i][j].im.as_f64()));
    let eig = dense.symmetric_eigenvalues();
    let mut out = [T::zero(); 4];
    for (o, &e) in out.iter_mut().zip(eig.iter()) {
        *o = T::lit(e);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}
