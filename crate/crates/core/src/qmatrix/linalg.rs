//! Dense LU factorization with partial pivoting.

use alloc::vec::Vec;
use num_traits::Zero;

use super::{QMatrix, C64};
use crate::error::{Error, Result};

/// Solves `A X = B` in place. `a` is `n x n`, `b` is `n x m` (both row
/// major). Returns `None` for a numerically singular `A`.
pub(crate) fn lu_solve_matrix(mut a: Vec<C64>, mut b: Vec<C64>, n: usize) -> Option<Vec<C64>> {
    let m = b.len() / n;
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= scale * 1e-300 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            for j in 0..m {
                b.swap(k * m + j, piv * m + j);
            }
        }
        let d = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / d;
            if f.is_zero() {
                continue;
            }
            a[i * n + k] = C64::zero();
            for j in (k + 1)..n {
                let akj = a[k * n + j];
                a[i * n + j] -= f * akj;
            }
            for j in 0..m {
                let bkj = b[k * m + j];
                b[i * m + j] -= f * bkj;
            }
        }
    }
    for k in (0..n).rev() {
        let d = a[k * n + k];
        for j in 0..m {
            let mut s = b[k * m + j];
            for p in (k + 1)..n {
                s -= a[k * n + p] * b[p * m + j];
            }
            b[k * m + j] = s / d;
        }
    }
    Some(b)
}

/// Solves `A X = B` for square `A`.
pub fn solve(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::dim("solve needs square A with as many rows as B"));
    }
    let n = a.rows();
    let x = lu_solve_matrix(a.to_vec(), b.to_vec(), n).ok_or_else(|| Error::domain("singular matrix"))?;
    QMatrix::from_vec(n, b.cols(), x)
}

pub fn inverse(a: &QMatrix) -> Result<QMatrix> {
    solve(a, &QMatrix::identity(a.rows()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = QMatrix::from_fn(4, 4, |i, j| C64::new((i * 3 + j) as f64 % 5.0 + if i == j { 4.0 } else { 0.0 }, j as f64 * 0.1));
        let inv = inverse(&a).unwrap();
        assert!((&a * &inv).approx_eq(&QMatrix::identity(4), 1e-13));
    }

    #[test]
    fn singular_is_reported() {
        let a = QMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(solve(&a, &QMatrix::identity(2)).is_err());
    }
}
