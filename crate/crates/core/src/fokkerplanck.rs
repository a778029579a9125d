//! Stochastic Liouville (Fokker–Planck) evolution over classical
//! coordinates.
//!
//! Each point of a grid over the classical coordinates carries its own
//! quantum state. The Fokker–Planck generator is block diagonal in the grid
//! with one coherent (or Lindblad) generator per point, plus `ω Dⁿ ⊗ I`
//! terms that move amplitude between points. The grid index is the slow
//! index and several coordinates are flattened row-major in declaration
//! order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::propagation::{liouvillian, CollapseOperator};
use crate::qmatrix::{expm, Kind, QMatrix, C64};
use crate::states::{dm2vec, vec2dm};

/// Whether grid blocks hold kets or vectorized density matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Hilbert,
    Liouville,
}

/// One classical coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Coordinate {
    pub name: String,
    pub values: Vec<f64>,
    /// Nonnegative; uniform when absent. Normalized when states are built.
    pub weights: Option<Vec<f64>>,
    /// `(n, ω)` pairs: derivative order and rate in rad/s.
    pub dynamics: Vec<(u32, f64)>,
    pub periodic: bool,
}

impl Coordinate {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Coordinate { name: name.to_string(), values, weights: None, dynamics: Vec::new(), periodic: true }
    }

    /// `n` uniform points on `[0, 2π)`.
    pub fn periodic_grid(name: &str, n: usize) -> Self {
        let step = 2.0 * core::f64::consts::PI / n as f64;
        Self::new(name, (0..n).map(|k| k as f64 * step).collect())
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_dynamics(mut self, order: u32, omega: f64) -> Self {
        self.dynamics.push((order, omega));
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::domain(format!("coordinate `{}` has no grid points", self.name)));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.values.len() {
                return Err(Error::dim(format!("coordinate `{}` has {} weights for {} points", self.name, w.len(), self.values.len())));
            }
            if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(Error::domain(format!("weights of `{}` must be finite and nonnegative", self.name)));
            }
        }
        let active = self.dynamics.iter().any(|&(_, w)| w != 0.0);
        if active {
            if self.values.len() < 2 {
                return Err(Error::domain(format!("coordinate `{}` needs at least two points for dynamics", self.name)));
            }
            if !self.periodic {
                return Err(Error::Unsupported(format!("non-periodic dynamics on `{}`", self.name)));
            }
            self.period()?;
        }
        for &(n, _) in &self.dynamics {
            if n != 1 && n != 2 {
                return Err(Error::domain(format!("derivative order {n} is not supported")));
            }
        }
        Ok(())
    }

    /// Grid period `N·Δ` of a uniform grid.
    fn period(&self) -> Result<f64> {
        let n = self.values.len();
        let step = self.values[1] - self.values[0];
        let uniform = self.values.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs());
        if !(step > 0.0) || !uniform {
            return Err(Error::domain(format!("coordinate `{}` must be a uniform increasing grid", self.name)));
        }
        Ok(step * n as f64)
    }
}

/// Grid of classical coordinates with their dynamics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StochasticParameters {
    pub coordinates: Vec<Coordinate>,
}

impl StochasticParameters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, c: Coordinate) -> Self {
        self.coordinates.push(c);
        self
    }

    /// Grid shape.
    pub fn dof(&self) -> Vec<usize> {
        self.coordinates.iter().map(|c| c.len()).collect()
    }

    pub fn points(&self) -> usize {
        self.coordinates.iter().map(|c| c.len()).product()
    }

    fn validate(&self) -> Result<()> {
        if self.coordinates.is_empty() {
            return Err(Error::domain("no classical coordinates declared"));
        }
        self.coordinates.iter().try_for_each(|c| c.validate())
    }

    /// Coordinate values at flat grid index `g`.
    pub fn point(&self, mut g: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.coordinates.len()];
        for (k, c) in self.coordinates.iter().enumerate().rev() {
            out[k] = c.values[g % c.len()];
            g /= c.len();
        }
        out
    }

    /// Product weights over the flattened grid, normalized to sum 1.
    pub fn weights(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut w = vec![1.0];
        for c in &self.coordinates {
            let cw: Vec<f64> = c.weights.clone().unwrap_or_else(|| vec![1.0; c.len()]);
            w = w.iter().flat_map(|a| cw.iter().map(move |b| a * b)).collect();
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::domain("weights sum to zero"));
        }
        Ok(w.into_iter().map(|x| x / total).collect())
    }
}

/// Spectral differentiation matrix of order 1 or 2 on `n` uniform points of
/// `[0, 2π)`, built directly from `(ik)ⁿ` in Fourier space. For odd orders
/// on even grids the Nyquist mode is dropped.
pub fn fourier_diff_matrix(n: usize, order: u32) -> Result<QMatrix> {
    if order != 1 && order != 2 {
        return Err(Error::domain(format!("derivative order {order} is not supported")));
    }
    if n < 2 {
        return Err(Error::domain("differentiation needs at least two grid points"));
    }
    let modes: Vec<f64> = (0..n)
        .filter(|&k| !(order == 1 && 2 * k == n))
        .map(|k| if 2 * k <= n { k as f64 } else { k as f64 - n as f64 })
        .collect();
    let step = 2.0 * core::f64::consts::PI / n as f64;
    // (1/n) Σ_k (ik)ⁿ e^{ikd}; the imaginary parts cancel between ±k
    Ok(QMatrix::from_fn(n, n, |j, l| {
        let d = (j as f64 - l as f64) * step;
        let acc: f64 = match order {
            1 => modes.iter().map(|&k| -k * (k * d).sin()).sum(),
            _ => modes.iter().map(|&k| -k * k * (k * d).cos()).sum(),
        };
        C64::new(acc / n as f64, 0.0)
    }))
}

fn block_generator(h: &QMatrix, space: Space, c_ops: &[CollapseOperator]) -> Result<QMatrix> {
    match space {
        Space::Hilbert => {
            if !c_ops.is_empty() {
                return Err(Error::domain("collapse operators need Liouville space"));
            }
            Ok(h.scale(C64::new(0.0, -1.0)))
        }
        Space::Liouville => liouvillian(h, c_ops),
    }
}

/// Fokker–Planck generator `F` with `dρ_FP/dt = F ρ_FP`.
pub fn fp_superoperator<F>(
    mut h_fun: F,
    params: &StochasticParameters,
    space: Space,
    c_ops: &[CollapseOperator],
) -> Result<QMatrix>
where
    F: FnMut(&[f64]) -> Result<QMatrix>,
{
    params.validate()?;
    let g = params.points();
    let mut trip = Vec::new();
    let mut q = 0;
    for p in 0..g {
        let h = h_fun(&params.point(p))?;
        if !h.is_square() {
            return Err(Error::dim("Hamiltonian must be square"));
        }
        let b = block_generator(&h, space, c_ops)?;
        if p == 0 {
            q = b.rows();
        } else if b.rows() != q {
            return Err(Error::dim(format!("grid point {p} has generator size {}, expected {q}", b.rows())));
        }
        trip.extend(b.triplets().into_iter().map(|(i, j, v)| (p * q + i, p * q + j, v)));
    }
    let dof = params.dof();
    for (c, coord) in params.coordinates.iter().enumerate() {
        let before: usize = dof[..c].iter().product();
        let after: usize = dof[c + 1..].iter().product::<usize>() * q;
        let n = coord.len();
        for &(order, omega) in &coord.dynamics {
            if omega == 0.0 {
                continue;
            }
            let scale = (2.0 * core::f64::consts::PI / coord.period()?).powi(order as i32);
            let d = fourier_diff_matrix(n, order)?;
            for (i, j, v) in d.triplets() {
                let v = v * (omega * scale);
                if v.norm() < 1e-14 * omega.abs() * scale {
                    continue;
                }
                for a in 0..before {
                    for r in 0..after {
                        let row = (a * n + i) * after + r;
                        let col = (a * n + j) * after + r;
                        trip.push((row, col, v));
                    }
                }
            }
        }
    }
    Ok(QMatrix::from_triplets(g * q, g * q, trip)?.compact().with_kind(Kind::Superoperator))
}

/// State on the Fokker–Planck grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FpState {
    pub data: Vec<C64>,
    pub dof: Vec<usize>,
    /// Hilbert-space dimension of one grid block.
    pub dim: usize,
    pub space: Space,
}

impl FpState {
    fn block_len(&self) -> usize {
        match self.space {
            Space::Hilbert => self.dim,
            Space::Liouville => self.dim * self.dim,
        }
    }

    pub fn points(&self) -> usize {
        self.dof.iter().product()
    }

    /// Hilbert-space object of grid block `g` (ket or density matrix).
    pub fn block(&self, g: usize) -> Result<QMatrix> {
        let l = self.block_len();
        let part = self.data[g * l..(g + 1) * l].to_vec();
        match self.space {
            Space::Hilbert => QMatrix::from_vec(l, 1, part),
            Space::Liouville => vec2dm(&QMatrix::from_vec(l, 1, part)?),
        }
    }
}

/// Replicates `rho` over the grid, block `g` scaled by weight `w_g`.
pub fn dm2fp(rho: &QMatrix, params: &StochasticParameters) -> Result<FpState> {
    if !rho.is_square() {
        return Err(Error::dim("density matrix must be square"));
    }
    let w = params.weights()?;
    let v = dm2vec(rho)?.to_vec();
    let data = w.iter().flat_map(|&x| v.iter().map(move |z| z * x)).collect();
    Ok(FpState { data, dof: params.dof(), dim: rho.rows(), space: Space::Liouville })
}

/// Replicates a ket over the grid, block `g` scaled by `√w_g`.
pub fn ket2fp(psi: &QMatrix, params: &StochasticParameters) -> Result<FpState> {
    if psi.cols() != 1 {
        return Err(Error::dim("expected a ket"));
    }
    let w = params.weights()?;
    let v = psi.to_vec();
    let data = w.iter().flat_map(|&x| v.iter().map(move |z| z * x.sqrt())).collect();
    Ok(FpState { data, dof: params.dof(), dim: psi.rows(), space: Space::Hilbert })
}

/// Sum of the grid blocks as one density matrix.
pub fn fp2dm(state: &FpState) -> Result<QMatrix> {
    let n = state.dim;
    let mut acc = QMatrix::zeros(n, n);
    for g in 0..state.points() {
        let b = state.block(g)?;
        acc = match state.space {
            Space::Hilbert => &acc + &(&b * &b.adjoint()),
            Space::Liouville => &acc + &b,
        };
    }
    Ok(acc)
}

/// `Σ_g tr(op · ρ_g)` (or `Σ_g ⟨ψ_g|op|ψ_g⟩`).
pub fn fp_expect(op: &QMatrix, state: &FpState) -> Result<C64> {
    if op.shape() != (state.dim, state.dim) {
        return Err(Error::dim("operator does not match the grid blocks"));
    }
    let n = state.dim;
    let l = state.block_len();
    let mut acc = C64::zero();
    for g in 0..state.points() {
        let blk = &state.data[g * l..(g + 1) * l];
        match state.space {
            Space::Hilbert => {
                let opv = op.apply_vec(blk);
                acc += blk.iter().zip(&opv).map(|(a, b)| a.conj() * b).sum::<C64>();
            }
            Space::Liouville => {
                // tr(op ρ) = Σ_ij op[j,i] ρ[i,j], ρ[i,j] at j·n + i
                for (i, j, v) in op.triplets() {
                    acc += v * blk[i * n + j];
                }
            }
        }
    }
    Ok(acc)
}

/// Cached `exp(F dt)` over the grid.
#[derive(Clone, Debug)]
pub struct FpPropagator {
    pub matrix: QMatrix,
    pub dt: f64,
    pub space: Space,
    pub dof: Vec<usize>,
}

impl FpPropagator {
    pub fn apply(&self, state: &FpState) -> Result<FpState> {
        if state.space != self.space || state.dof != self.dof || state.data.len() != self.matrix.cols() {
            return Err(Error::dim("state does not match the Fokker–Planck propagator"));
        }
        Ok(FpState { data: self.matrix.apply_vec(&state.data), ..state.clone() })
    }
}

pub fn stochastic_evol<F>(
    h_fun: F,
    params: &StochasticParameters,
    dt: f64,
    space: Space,
    c_ops: &[CollapseOperator],
) -> Result<FpPropagator>
where
    F: FnMut(&[f64]) -> Result<QMatrix>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    let f = fp_superoperator(h_fun, params, space, c_ops)?;
    Ok(FpPropagator { matrix: expm(&f.scale_real(dt)).compact(), dt, space, dof: params.dof() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_derivatives_of_sine() {
        let n = 32;
        let x: Vec<f64> = (0..n).map(|k| 2.0 * core::f64::consts::PI * k as f64 / n as f64).collect();
        let s: Vec<C64> = x.iter().map(|t| C64::new(t.sin(), 0.0)).collect();
        let d1 = fourier_diff_matrix(n, 1).unwrap().apply_vec(&s);
        let d2 = fourier_diff_matrix(n, 2).unwrap().apply_vec(&s);
        for k in 0..n {
            assert!((d1[k].re - x[k].cos()).abs() < 1e-10);
            assert!((d2[k].re + x[k].sin()).abs() < 1e-10);
        }
        let ones = vec![C64::new(1.0, 0.0); n];
        assert!(fourier_diff_matrix(n, 1).unwrap().apply_vec(&ones).iter().all(|v| v.norm() < 1e-12));
        assert!(fourier_diff_matrix(n, 3).is_err());
    }

    #[test]
    fn round_trip_and_weights() {
        let rho = QMatrix::from_real(2, 2, &[0.7, 0.1, 0.1, 0.3]).unwrap();
        let p = StochasticParameters::new().with(Coordinate::new("t", vec![0.0, 1.0, 2.0]).with_weights(vec![1.0, 2.0, 1.0]));
        let fp = dm2fp(&rho, &p).unwrap();
        assert!(fp2dm(&fp).unwrap().approx_eq(&rho, 1e-14));
        assert!(fp.block(1).unwrap().approx_eq(&rho.scale_real(0.5), 1e-15));
        let z = QMatrix::diag_real(&[1.0, -1.0]);
        assert!((fp_expect(&z, &fp).unwrap().re - 0.4).abs() < 1e-14);
    }

    #[test]
    fn single_point_is_plain_liouvillian() {
        let h = QMatrix::from_real(2, 2, &[1.0, 0.3, 0.3, -1.0]).unwrap();
        let p = StochasticParameters::new().with(Coordinate::new("x", vec![0.0]));
        let f = fp_superoperator(|_| Ok(h.clone()), &p, Space::Liouville, &[]).unwrap();
        assert!(f.approx_eq(&liouvillian(&h, &[]).unwrap(), 1e-15));
    }
}
