//! Matrix exponential by scaling and squaring with Padé approximants.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Zero};

use super::linalg::lu_solve_matrix;
use super::{dense_matmul, QMatrix, C64};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a square matrix.
///
/// Sparse inputs are split into the connected components of their nonzero
/// pattern; each block is exponentiated densely and the result is returned
/// sparse. Dense inputs go straight through the Padé path.
///
/// # Panics
/// If the matrix is not square.
pub fn expm(a: &QMatrix) -> QMatrix {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.rows();
    if a.is_sparse() {
        return expm_sparse(a);
    }
    let data = expm_dense(&a.to_vec(), n);
    QMatrix::from_vec(n, n, data).expect("expm overflowed").with_kind(a.kind())
}

fn expm_sparse(a: &QMatrix) -> QMatrix {
    let n = a.rows();
    let trip = a.triplets();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j, _) in &trip {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut local = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if comp_of[r] == usize::MAX {
            comp_of[r] = comps.len();
            comps.push(Vec::new());
        }
        let c = comp_of[r];
        local[i] = comps[c].len();
        comps[c].push(i);
    }
    let mut blocks: Vec<Vec<C64>> = comps.iter().map(|c| vec![C64::zero(); c.len() * c.len()]).collect();
    for &(i, j, v) in &trip {
        let c = comp_of[find(&mut parent, i)];
        let m = comps[c].len();
        blocks[c][local[i] * m + local[j]] = v;
    }
    let mut out = Vec::new();
    for (c, idx) in comps.iter().enumerate() {
        let m = idx.len();
        let e = expm_dense(&blocks[c], m);
        for p in 0..m {
            for q in 0..m {
                let v = e[p * m + q];
                if !v.is_zero() {
                    out.push((idx[p], idx[q], v));
                }
            }
        }
    }
    QMatrix::from_triplets(n, n, out).expect("expm overflowed").with_kind(a.kind())
}

fn one_norm(a: &[C64], n: usize) -> f64 {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn add_identity(a: &mut [C64], n: usize, c: f64) {
    for i in 0..n {
        a[i * n + i] += c;
    }
}

fn lincomb(terms: &[(&[C64], f64)], len: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); len];
    for (m, c) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(m.iter()) {
            *o += v * c;
        }
    }
    out
}

pub(crate) fn expm_dense(a: &[C64], n: usize) -> Vec<C64> {
    if n == 1 {
        return vec![a[0].exp()];
    }
    let norm = one_norm(a, n);
    if norm == 0.0 {
        let mut id = vec![C64::zero(); n * n];
        add_identity(&mut id, n, 1.0);
        return id;
    }
    let a2 = dense_matmul(a, a, n, n, n);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = pade_low(a, &a2, n, m);
            return pade_solve(&u, &v, n);
        }
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let a_s: Vec<C64> = a.iter().map(|v| v * scale).collect();
    let a2s: Vec<C64> = a2.iter().map(|v| v * (scale * scale)).collect();
    let (u, v) = pade13(&a_s, &a2s, n);
    let mut r = pade_solve(&u, &v, n);
    for _ in 0..s {
        r = dense_matmul(&r, &r, n, n, n);
    }
    r
}

fn pade_low(a: &[C64], a2: &[C64], n: usize, m: usize) -> (Vec<C64>, Vec<C64>) {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let len = n * n;
    let mut powers: Vec<Vec<C64>> = vec![a2.to_vec()];
    for _ in 1..(m - 1) / 2 {
        let last = powers.last().unwrap();
        powers.push(dense_matmul(last, a2, n, n, n));
    }
    let mut u_inner = vec![C64::zero(); len];
    let mut v = vec![C64::zero(); len];
    add_identity(&mut u_inner, n, b[1]);
    add_identity(&mut v, n, b[0]);
    for (k, p) in powers.iter().enumerate() {
        let cu = b[2 * k + 3];
        let cv = b[2 * k + 2];
        for idx in 0..len {
            u_inner[idx] += p[idx] * cu;
            v[idx] += p[idx] * cv;
        }
    }
    (dense_matmul(a, &u_inner, n, n, n), v)
}

fn pade13(a: &[C64], a2: &[C64], n: usize) -> (Vec<C64>, Vec<C64>) {
    let len = n * n;
    let b = &B13;
    let a4 = dense_matmul(a2, a2, n, n, n);
    let a6 = dense_matmul(&a4, a2, n, n, n);
    let w1 = lincomb(&[(&a6, b[13]), (&a4, b[11]), (a2, b[9])], len);
    let mut w2 = lincomb(&[(&a6, b[7]), (&a4, b[5]), (a2, b[3])], len);
    add_identity(&mut w2, n, b[1]);
    let z1 = lincomb(&[(&a6, b[12]), (&a4, b[10]), (a2, b[8])], len);
    let mut z2 = lincomb(&[(&a6, b[6]), (&a4, b[4]), (a2, b[2])], len);
    add_identity(&mut z2, n, b[0]);
    let w = {
        let mut t = dense_matmul(&a6, &w1, n, n, n);
        for (x, y) in t.iter_mut().zip(&w2) {
            *x += y;
        }
        t
    };
    let u = dense_matmul(a, &w, n, n, n);
    let mut v = dense_matmul(&a6, &z1, n, n, n);
    for (x, y) in v.iter_mut().zip(&z2) {
        *x += y;
    }
    (u, v)
}

/// Solves `(V - U) R = (V + U)`.
fn pade_solve(u: &[C64], v: &[C64], n: usize) -> Vec<C64> {
    let p: Vec<C64> = v.iter().zip(u).map(|(v, u)| v + u).collect();
    let q: Vec<C64> = v.iter().zip(u).map(|(v, u)| v - u).collect();
    lu_solve_matrix(q, p, n).unwrap_or_else(|| {
        // Singular denominators do not occur for the selected degrees; keep a
        // defined result anyway.
        let mut id = vec![C64::zero(); n * n];
        for i in 0..n {
            id[i * n + i] = C64::one();
        }
        id
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(a: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::zero(); n * n];
        let mut term = vec![C64::zero(); n * n];
        add_identity(&mut term, n, 1.0);
        for k in 1..60 {
            for (o, t) in out.iter_mut().zip(&term) {
                *o += t;
            }
            term = dense_matmul(&term, a, n, n, n).iter().map(|v| v / k as f64).collect();
        }
        out
    }

    #[test]
    fn matches_taylor_for_each_degree() {
        for &scale in &[0.005, 0.1, 0.5, 1.5, 4.0, 9.0] {
            let a: Vec<C64> = (0..9)
                .map(|k| C64::new(((k * 7 % 5) as f64 - 2.0) * scale / 3.0, ((k % 3) as f64 - 1.0) * scale / 4.0))
                .collect();
            let e = expm_dense(&a, 3);
            let t = taylor(&a, 3);
            let err = e.iter().zip(&t).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let mag = t.iter().map(|v| v.norm()).fold(1.0, f64::max);
            assert!(err / mag < 1e-12, "scale {scale}: {err}");
        }
    }

    #[test]
    fn diagonal_is_exact() {
        let a = QMatrix::diag(&[C64::new(0.0, 3.0), C64::new(-40.0, 0.0), C64::new(2.0, 1.0)]);
        let e = expm(&a);
        assert!((e.get(0, 0) - C64::new(0.0, 3.0).exp()).norm() < 1e-13);
        assert!((e.get(1, 1) - (-40.0f64).exp()).norm() < 1e-25);
        assert!((e.get(2, 2) - C64::new(2.0, 1.0).exp()).norm() < 1e-12);
    }

    #[test]
    fn sparse_blocks_match_dense() {
        let a = QMatrix::from_triplets(
            4,
            4,
            vec![
                (0, 2, C64::new(0.0, 1.0)),
                (2, 0, C64::new(0.0, 1.0)),
                (1, 1, C64::new(-0.5, 0.0)),
                (3, 3, C64::new(0.0, 2.0)),
            ],
        )
        .unwrap();
        let s = expm(&a);
        let d = expm(&a.to_dense());
        assert!(s.is_sparse());
        assert!(s.approx_eq(&d, 1e-14));
    }
}
