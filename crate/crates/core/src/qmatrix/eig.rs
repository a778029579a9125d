//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use alloc::vec::Vec;
use num_traits::{One, Zero};

use super::{QMatrix, Tolerances, C64};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: QMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn eig_hermitian(a: &QMatrix) -> Result<EigenDecomposition> {
    eig_hermitian_tol(a, &Tolerances::DEFAULT)
}

pub fn eig_hermitian_tol(a: &QMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::dim("eigendecomposition needs a square matrix"));
    }
    let dev = a.hermiticity_deviation();
    if dev > tol.hermitian {
        return Err(Error::NotHermitian(dev));
    }
    let n = a.rows();
    let mut m = a.to_vec();
    // Symmetrize so rounding noise does not accumulate.
    for i in 0..n {
        m[i * n + i] = C64::new(m[i * n + i].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[i * n + j] + m[j * n + i].conj()) * 0.5;
            m[i * n + j] = v;
            m[j * n + i] = v.conj();
        }
    }
    let mut e: Vec<C64> = (0..n * n).map(|k| if k / n == k % n { C64::one() } else { C64::zero() }).collect();
    let total: f64 = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if total > 0.0 {
        for _sweep in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| m[i * n + j].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= total * 1e-17 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut m, &mut e, n, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x * n + x].re.partial_cmp(&m[y * n + y].re).unwrap());
    let values = order.iter().map(|&k| m[k * n + k].re).collect();
    let vectors = QMatrix::from_fn(n, n, |i, j| e[i * n + order[j]]);
    Ok(EigenDecomposition { values, vectors })
}

fn rotate(m: &mut [C64], e: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    if r < 1e-300 || (app - aqq).abs() > r * 1e300 {
        m[p * n + q] = C64::zero();
        m[q * n + p] = C64::zero();
        return;
    }
    let phase = apq / r;
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph = phase.conj();
    // columns: M <- M V
    for k in 0..n {
        let mp = m[k * n + p];
        let mq = m[k * n + q];
        m[k * n + p] = mp * c - mq * ph * s;
        m[k * n + q] = mp * s + mq * ph * c;
        let ep = e[k * n + p];
        let eq = e[k * n + q];
        e[k * n + p] = ep * c - eq * ph * s;
        e[k * n + q] = ep * s + eq * ph * c;
    }
    // rows: M <- V^† M
    let phc = phase;
    for k in 0..n {
        let mp = m[p * n + k];
        let mq = m[q * n + k];
        m[p * n + k] = mp * c - mq * phc * s;
        m[q * n + k] = mp * s + mq * phc * c;
    }
    m[p * n + q] = C64::zero();
    m[q * n + p] = C64::zero();
    m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
    m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
}
