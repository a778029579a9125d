//! Compressed sparse row storage.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Zero;

use super::C64;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl Csr {
    pub fn empty(rows: usize) -> Self {
        Csr { indptr: vec![0; rows + 1], indices: Vec::new(), data: Vec::new() }
    }

    /// Duplicate coordinates are summed; exact zeros are dropped.
    pub fn from_triplets(rows: usize, triplets: &mut Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in triplets.iter() {
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        let mut csr = Csr { indptr, indices, data };
        csr.prune();
        csr
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[C64]) -> Self {
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..rows {
            for j in 0..cols {
                let v = dense[i * cols + j];
                if !v.is_zero() {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr { indptr, indices, data }
    }

    pub fn to_dense(&self, rows: usize, cols: usize) -> Vec<C64> {
        let mut out = vec![C64::zero(); rows * cols];
        for (i, row) in self.row_iter().enumerate().take(rows) {
            for (j, v) in row {
                out[i * cols + j] = v;
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Drops stored exact zeros.
    fn prune(&mut self) {
        if self.data.iter().all(|v| !v.is_zero()) {
            return;
        }
        let rows = self.indptr.len() - 1;
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        indptr.push(0);
        for i in 0..rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if !self.data[k].is_zero() {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr.push(indices.len());
        }
        *self = Csr { indptr, indices, data };
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()].iter().copied().zip(self.data[range].iter().copied())
    }

    pub fn row_iter(&self) -> impl Iterator<Item = impl Iterator<Item = (usize, C64)> + '_> + '_ {
        (0..self.indptr.len() - 1).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(k) => self.data[range.start + k],
            Err(_) => C64::zero(),
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = Csr {
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        };
        out.prune();
        out
    }

    pub fn transpose(&self, cols: usize) -> Self {
        let mut trip: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz());
        for (i, row) in self.row_iter().enumerate() {
            for (j, v) in row {
                trip.push((j, i, v));
            }
        }
        Csr::from_triplets(cols, &mut trip)
    }

    pub fn matmul(&self, other: &Csr, other_cols: usize) -> Self {
        let rows = self.indptr.len() - 1;
        let mut acc = vec![C64::zero(); other_cols];
        let mut mark = vec![usize::MAX; other_cols];
        let mut touched = Vec::new();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..rows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = C64::zero();
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if !acc[j].is_zero() {
                    indices.push(j);
                    data.push(acc[j]);
                }
            }
            indptr.push(indices.len());
        }
        Csr { indptr, indices, data }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        self.row_iter().map(|row| row.map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Sparse times row-major dense `(k x n)`.
    pub fn mul_dense(&self, dense: &[C64], n: usize) -> Vec<C64> {
        let rows = self.indptr.len() - 1;
        let mut out = vec![C64::zero(); rows * n];
        for i in 0..rows {
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, a) in self.row(i) {
                let src = &dense[k * n..(k + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn combine(&self, other: &Csr, alpha: C64, beta: C64) -> Self {
        let rows = self.indptr.len() - 1;
        let mut trip = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..rows {
            trip.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            trip.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        Csr::from_triplets(rows, &mut trip)
    }

    pub fn kron(&self, other: &Csr, other_rows: usize, other_cols: usize) -> Self {
        let rows = self.indptr.len() - 1;
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for i in 0..rows {
            for (j, a) in self.row(i) {
                for k in 0..other_rows {
                    for (l, b) in other.row(k) {
                        trip.push((i * other_rows + k, j * other_cols + l, a * b));
                    }
                }
            }
        }
        Csr::from_triplets(rows * other_rows, &mut trip)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.row_iter()
            .enumerate()
            .flat_map(|(i, row)| row.map(move |(j, v)| (i, j, v)))
    }
}
