//! Complex matrix carrier for operators, states and superoperators.
//!
//! Dense row-major storage is the default. Compressed sparse rows are used
//! when requested explicitly or when [`QMatrix::compact`] finds a large,
//! mostly empty matrix. Every operation accepts either storage and the two
//! storages of the same logical matrix compare equal.

mod eig;
mod expm;
mod linalg;
mod sparse;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::layout::SpaceLayout;
use sparse::Csr;

pub use eig::{eig_hermitian, eig_hermitian_tol, EigenDecomposition};
pub use expm::expm;
pub use linalg::{inverse, solve};

pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Central numerical tolerances. Functions that check a property take a
/// `Tolerances` (or use [`Tolerances::DEFAULT`]) so callers can override them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Maximum `|A - A^†|` entry, relative to `max(1, max|A|)`.
    pub hermitian: f64,
    /// Maximum `|U^†U - 1|` entry.
    pub unitary: f64,
    /// Default entrywise equality tolerance.
    pub equality: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances { hermitian: 1e-10, unitary: 1e-10, equality: 1e-12 };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Advisory tag describing what a matrix represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Operator,
    Ket,
    Bra,
    Superoperator,
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<C64>),
    Sparse(Csr),
}

/// Complex matrix, dense or sparse. Values are immutable; every operation
/// returns a new matrix.
#[derive(Clone)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    kind: Kind,
    storage: Storage,
}

fn default_kind(rows: usize, cols: usize) -> Kind {
    match (rows, cols) {
        (r, 1) if r > 1 => Kind::Ket,
        (1, c) if c > 1 => Kind::Bra,
        _ => Kind::Operator,
    }
}

fn check_finite(data: &[C64]) -> Result<()> {
    if data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

impl QMatrix {
    fn dense_unchecked(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        QMatrix { rows, cols, kind: default_kind(rows, cols), storage: Storage::Dense(data) }
    }

    fn sparse_unchecked(rows: usize, cols: usize, csr: Csr) -> Self {
        QMatrix { rows, cols, kind: default_kind(rows, cols), storage: Storage::Sparse(csr) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be at least 1");
        Self::dense_unchecked(rows, cols, vec![C64::zero(); rows * cols])
    }

    pub fn sparse_zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be at least 1");
        Self::sparse_unchecked(rows, cols, Csr::empty(rows))
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        if let Storage::Dense(d) = &mut m.storage {
            for i in 0..n {
                d[i * n + i] = C64::one();
            }
        }
        m
    }

    pub fn sparse_identity(n: usize) -> Self {
        let mut trip: Vec<_> = (0..n).map(|i| (i, i, C64::one())).collect();
        Self::sparse_unchecked(n, n, Csr::from_triplets(n, &mut trip))
    }

    /// Row-major data. Rejects empty shapes and non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim("matrix dimensions must be at least 1"));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(alloc::format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        check_finite(&data)?;
        Ok(Self::dense_unchecked(rows, cols, data))
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Builds a dense matrix from a closure. Panics on non-finite output.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data).expect("from_fn produced an invalid matrix")
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows"));
        }
        Self::from_vec(r, c, rows.iter().flat_map(|row| row.iter().copied()).collect())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::zero() })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(entries[i], 0.0) } else { C64::zero() })
    }

    /// Column vector.
    pub fn ket(entries: &[C64]) -> Result<Self> {
        Ok(Self::from_vec(entries.len(), 1, entries.to_vec())?.with_kind(Kind::Ket))
    }

    /// Unit column vector `e_index` of length `n`.
    pub fn basis_ket(n: usize, index: usize) -> Self {
        assert!(index < n);
        let mut v = vec![C64::zero(); n];
        v[index] = C64::one();
        Self::dense_unchecked(n, 1, v).with_kind(Kind::Ket)
    }

    /// Sparse matrix from coordinates; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim("matrix dimensions must be at least 1"));
        }
        let mut trip: Vec<_> = triplets.into_iter().collect();
        if trip.iter().any(|&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::dim("triplet index out of range"));
        }
        check_finite(&trip.iter().map(|t| t.2).collect::<Vec<_>>())?;
        Ok(Self::sparse_unchecked(rows, cols, Csr::from_triplets(rows, &mut trip)))
    }

    /// Columns of equal length stacked side by side.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::dim("columns of unequal length"));
        }
        let mut data = vec![C64::zero(); rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * cols + j] = *v;
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn is_column(&self) -> bool {
        self.cols == 1
    }

    /// Number of stored entries (all entries for dense storage).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| !v.is_zero()).count(),
            Storage::Sparse(s) => s.nnz(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        match &self.storage {
            Storage::Dense(d) => d[i * self.cols + j],
            Storage::Sparse(s) => s.get(i, j),
        }
    }

    /// Row-major copy of all entries.
    pub fn to_vec(&self) -> Vec<C64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse(s) => s.to_dense(self.rows, self.cols),
        }
    }

    /// Borrowed row-major data when the storage is dense.
    pub fn dense_data(&self) -> Option<&[C64]> {
        match &self.storage {
            Storage::Dense(d) => Some(d),
            Storage::Sparse(_) => None,
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_dense(&self) -> Self {
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Sparse(s) => QMatrix {
                rows: self.rows,
                cols: self.cols,
                kind: self.kind,
                storage: Storage::Dense(s.to_dense(self.rows, self.cols)),
            },
        }
    }

    pub fn to_sparse(&self) -> Self {
        match &self.storage {
            Storage::Sparse(_) => self.clone(),
            Storage::Dense(d) => QMatrix {
                rows: self.rows,
                cols: self.cols,
                kind: self.kind,
                storage: Storage::Sparse(Csr::from_dense(self.rows, self.cols, d)),
            },
        }
    }

    /// Applies the storage rule: sparse when the dimension is at least 64 and
    /// fewer than 10% of the entries are nonzero, dense otherwise.
    pub fn compact(&self) -> Self {
        let total = self.rows * self.cols;
        let large = self.rows.max(self.cols) >= 64;
        if large && (self.nnz() as f64) < 0.1 * total as f64 {
            self.to_sparse()
        } else {
            self.to_dense()
        }
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(d) => Storage::Dense(d.iter().map(|&v| f(v)).collect()),
            Storage::Sparse(s) => Storage::Sparse(s.map(f)),
        };
        QMatrix { rows: self.rows, cols: self.cols, kind: self.kind, storage }
    }

    pub fn scale(&self, factor: C64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn transpose(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(d) => {
                let mut out = vec![C64::zero(); d.len()];
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        out[j * self.rows + i] = d[i * self.cols + j];
                    }
                }
                Storage::Dense(out)
            }
            Storage::Sparse(s) => Storage::Sparse(s.transpose(self.cols)),
        };
        let kind = match self.kind {
            Kind::Ket => Kind::Bra,
            Kind::Bra => Kind::Ket,
            k => k,
        };
        QMatrix { rows: self.cols, cols: self.rows, kind, storage }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    fn combine(&self, other: &QMatrix, alpha: C64, beta: C64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::dim(alloc::format!(
                "cannot add {}x{} and {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.combine(b, alpha, beta)),
            _ => {
                let a = self.to_vec();
                let b = other.to_vec();
                Storage::Dense(a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect())
            }
        };
        Ok(QMatrix { rows: self.rows, cols: self.cols, kind: self.kind, storage })
    }

    pub fn try_add(&self, other: &QMatrix) -> Result<Self> {
        self.combine(other, C64::one(), C64::one())
    }

    pub fn try_sub(&self, other: &QMatrix) -> Result<Self> {
        self.combine(other, C64::one(), -C64::one())
    }

    /// `self + factor * other`.
    pub fn try_axpy(&self, factor: C64, other: &QMatrix) -> Result<Self> {
        self.combine(other, C64::one(), factor)
    }

    pub fn try_matmul(&self, other: &QMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(dense_matmul(a, b, m, k, n)),
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.matmul(b, n)),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(a.mul_dense(b, n)),
            (Storage::Dense(_), Storage::Sparse(b)) => {
                // (A B) = (B^T A^T)^T
                let at = self.transpose().to_vec();
                let bt = b.transpose(n);
                let prod = bt.mul_dense(&at, m);
                let mut out = vec![C64::zero(); m * n];
                for j in 0..n {
                    for i in 0..m {
                        out[i * n + j] = prod[j * m + i];
                    }
                }
                Storage::Dense(out)
            }
        };
        let kind = if n == 1 && m > 1 { Kind::Ket } else { join_kind(self.kind, other.kind) };
        Ok(QMatrix { rows: m, cols: n, kind, storage })
    }

    /// Matrix-vector product on a plain slice.
    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "vector length mismatch");
        match &self.storage {
            Storage::Dense(d) => (0..self.rows)
                .map(|i| d[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
            Storage::Sparse(s) => s.matvec(x),
        }
    }

    /// Kronecker product; the left factor is the slowest index.
    pub fn kron(&self, other: &QMatrix) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let kind = join_kind(self.kind, other.kind);
        match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                QMatrix { rows: r, cols: c, kind, storage: Storage::Sparse(a.kron(b, other.rows, other.cols)) }
            }
            _ => {
                let a = self.to_vec();
                let b = other.to_vec();
                let mut out = vec![C64::zero(); r * c];
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let aij = a[i * self.cols + j];
                        if aij.is_zero() {
                            continue;
                        }
                        for k in 0..other.rows {
                            let row = (i * other.rows + k) * c + j * other.cols;
                            for l in 0..other.cols {
                                out[row + l] = aij * b[k * other.cols + l];
                            }
                        }
                    }
                }
                QMatrix { rows: r, cols: c, kind, storage: Storage::Dense(out) }
            }
        }
    }

    /// Block-diagonal `diag(self, other)`.
    pub fn direct_sum(&self, other: &QMatrix) -> Result<Self> {
        if !self.is_square() || !other.is_square() {
            return Err(Error::dim("direct sum requires square inputs"));
        }
        let n = self.rows + other.rows;
        let off = self.rows;
        if self.is_sparse() && other.is_sparse() {
            let trip = self
                .triplets()
                .into_iter()
                .chain(other.triplets().into_iter().map(|(i, j, v)| (i + off, j + off, v)));
            return QMatrix::from_triplets(n, n, trip.collect::<Vec<_>>());
        }
        let mut out = vec![C64::zero(); n * n];
        for (i, j, v) in self.triplets().into_iter().chain(other.triplets().into_iter().map(|(i, j, v)| (i + off, j + off, v))) {
            out[i * n + j] = v;
        }
        Ok(Self::dense_unchecked(n, n, out))
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(d) => d
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(k, &v)| (k / self.cols, k % self.cols, v))
                .collect(),
            Storage::Sparse(s) => s.triplets().collect(),
        }
    }

    /// Dense sub-matrix picking the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        QMatrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(s) => s.data.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = match &self.storage {
            Storage::Dense(d) => d.iter().map(|v| v.norm_sqr()).sum(),
            Storage::Sparse(s) => s.data.iter().map(|v| v.norm_sqr()).sum(),
        };
        sum.sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (_, j, v) in self.triplets() {
            sums[j] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest entrywise deviation between two matrices of equal shape.
    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        let a = self.to_vec();
        let b = other.to_vec();
        a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &QMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// `max|A - A^†|`, relative to `max(1, max|A|)`.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.max_abs().max(1.0);
        self.max_abs_diff(&self.adjoint()) / scale
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `max|U^†U - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&QMatrix::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Partial trace over tensor factors of dimensions `dims`, keeping the
    /// factors at positions `keep` (ascending output order).
    pub fn ptrace_factors(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total {
            return Err(Error::dim(alloc::format!(
                "operator of dimension {} does not match factor dimensions {:?}",
                self.rows,
                dims
            )));
        }
        if keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::dim("kept factor position out of range"));
        }
        let mut keep_mask = vec![false; dims.len()];
        for &k in keep {
            keep_mask[k] = true;
        }
        let mut strides = vec![1usize; dims.len()];
        for f in (0..dims.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1] * dims[f + 1];
        }
        let offsets = |mask: bool| -> Vec<usize> {
            let mut offs = vec![0usize];
            for f in 0..dims.len() {
                if keep_mask[f] != mask {
                    continue;
                }
                let mut next = Vec::with_capacity(offs.len() * dims[f]);
                for &o in &offs {
                    for i in 0..dims[f] {
                        next.push(o + i * strides[f]);
                    }
                }
                offs = next;
            }
            offs
        };
        let kept = offsets(true);
        let traced = offsets(false);
        Ok(self.reduce_with_maps(
            &traced.iter().map(|&t| kept.iter().map(|&k| k + t).collect()).collect::<Vec<Vec<usize>>>(),
        ))
    }

    /// `sum_t A[m_t[i], m_t[j]]` for a family of index maps of equal length.
    /// Covers partial traces (one map per traced index) and block projections
    /// (a single map) with the same code.
    pub(crate) fn reduce_with_maps(&self, maps: &[Vec<usize>]) -> Self {
        let d = maps.first().map_or(0, |m| m.len());
        let mut out = vec![C64::zero(); d * d];
        let dense = self.to_dense();
        let data = dense.dense_data().unwrap();
        let n = self.cols;
        for map in maps {
            for (i, &gi) in map.iter().enumerate() {
                let row = &data[gi * n..(gi + 1) * n];
                let dst = &mut out[i * d..(i + 1) * d];
                for (j, &gj) in map.iter().enumerate() {
                    dst[j] += row[gj];
                }
            }
        }
        QMatrix::dense_unchecked(d, d, out)
    }
}

fn join_kind(a: Kind, b: Kind) -> Kind {
    if a == Kind::Superoperator || b == Kind::Superoperator {
        Kind::Superoperator
    } else {
        Kind::Operator
    }
}

pub(crate) fn dense_matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); m * n];
    for i in 0..m {
        let dst = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.is_zero() {
                continue;
            }
            let src = &b[p * n..(p + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += aip * s;
            }
        }
    }
    out
}

/// Kronecker product of two matrices.
pub fn kron(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.kron(b)
}

/// Kronecker product of a list, left to right.
pub fn kron_all(factors: &[QMatrix]) -> QMatrix {
    let mut iter = factors.iter();
    let first = iter.next().expect("kron_all needs at least one factor").clone();
    iter.fold(first, |acc, f| acc.kron(f))
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    a.direct_sum(b)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &QMatrix, b: &QMatrix) -> QMatrix {
    &(a * b) - &(b * a)
}

/// Reduced operator on the kept members of a pure tensor-product layout.
///
/// Fails when the request would have to project across a direct sum; use
/// [`crate::SpinSystem::subsystem`] for mixed layouts.
pub fn ptrace(op: &QMatrix, layout: &SpaceLayout, keep: &[&str]) -> Result<QMatrix> {
    layout.ptrace(op, keep)
}

/// Sub-block of `op` belonging to the direct-sum branch that holds `branch`.
pub fn project_block(op: &QMatrix, layout: &SpaceLayout, branch: &str) -> Result<QMatrix> {
    layout.project_block(op, branch)
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "QMatrix {}x{} {:?}{}",
            self.rows,
            self.cols,
            self.kind,
            if self.is_sparse() { " (sparse)" } else { "" }
        )?;
        if self.rows * self.cols <= 64 {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    let v = self.get(i, j);
                    write!(f, " {:>9.4}{:+.4}i", v.re, v.im)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl PartialEq for QMatrix {
    /// Exact logical equality, independent of storage.
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.max_abs_diff(other) == 0.0
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $call:ident) => {
        impl $trait<&QMatrix> for &QMatrix {
            type Output = QMatrix;
            fn $method(self, rhs: &QMatrix) -> QMatrix {
                self.$call(rhs).unwrap_or_else(|e| panic!("{}", e))
            }
        }
        impl $trait<QMatrix> for QMatrix {
            type Output = QMatrix;
            fn $method(self, rhs: QMatrix) -> QMatrix {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QMatrix> for QMatrix {
            type Output = QMatrix;
            fn $method(self, rhs: &QMatrix) -> QMatrix {
                (&self).$method(rhs)
            }
        }
        impl $trait<QMatrix> for &QMatrix {
            type Output = QMatrix;
            fn $method(self, rhs: QMatrix) -> QMatrix {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_matmul);

impl Mul<C64> for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: C64) -> QMatrix {
        self.scale(rhs)
    }
}

impl Mul<C64> for QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: C64) -> QMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: f64) -> QMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<f64> for QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: f64) -> QMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<&QMatrix> for f64 {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        rhs.scale_real(self)
    }
}

impl Mul<QMatrix> for f64 {
    type Output = QMatrix;
    fn mul(self, rhs: QMatrix) -> QMatrix {
        rhs.scale_real(self)
    }
}

impl Mul<&QMatrix> for C64 {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        rhs.scale(self)
    }
}

impl Mul<QMatrix> for C64 {
    type Output = QMatrix;
    fn mul(self, rhs: QMatrix) -> QMatrix {
        rhs.scale(self)
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale_real(-1.0)
    }
}

impl Neg for QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale_real(-1.0)
    }
}
