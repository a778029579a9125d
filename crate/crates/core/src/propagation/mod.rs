//! Hilbert- and Liouville-space propagation.
//!
//! Density matrices are vectorized by stacking columns, so
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. Without collapse operators states evolve
//! under `U = exp(-iHt)`; with collapse operators under `exp(𝓛t)` with the
//! Lindblad generator from [`liouvillian`].

mod pulses;
mod rates;
mod timedep;
mod wallclock;

pub use pulses::{arb_pulse, square_pulse};
pub use rates::{relaxation_operators, transition_operators, RateTable, Transition};
pub use timedep::{
    prop, prop_state, prop_steps, CollapseControl, ControlSequence, Engine, PropOptions, Sampling,
};
pub use wallclock::{global_elapsed, reset_global_clock, Clock, Wallclock};

use crate::error::{Error, Result};
use crate::qmatrix::{expm, Kind, QMatrix, C64};
use crate::states::{dm2vec, vec2dm};

/// Lindblad jump operator with the square root of its rate folded in.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub op: QMatrix,
}

impl CollapseOperator {
    /// `√rate · op`.
    pub fn new(op: &QMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::domain("rates must be finite and non-negative"));
        }
        Ok(CollapseOperator { op: op.scale_real(rate.sqrt()) })
    }

    /// Uses `op` as given (rate already folded in).
    pub fn from_scaled(op: QMatrix) -> Self {
        CollapseOperator { op }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorKind {
    /// Acts on kets as `Uψ` and on density matrices as `UρU†`.
    Unitary,
    /// Acts on vectorized density matrices.
    Superoperator,
}

#[derive(Clone, Debug)]
pub struct Propagator {
    pub kind: PropagatorKind,
    pub matrix: QMatrix,
    /// Duration covered, in seconds.
    pub dt: f64,
}

impl Propagator {
    pub fn identity(dim: usize, kind: PropagatorKind) -> Self {
        let n = match kind {
            PropagatorKind::Unitary => dim,
            PropagatorKind::Superoperator => dim * dim,
        };
        Propagator { kind, matrix: QMatrix::identity(n), dt: 0.0 }
    }

    /// Hilbert-space dimension the propagator acts on.
    pub fn dim(&self) -> usize {
        match self.kind {
            PropagatorKind::Unitary => self.matrix.rows(),
            PropagatorKind::Superoperator => (self.matrix.rows() as f64).sqrt().round() as usize,
        }
    }

    /// Applies `self` first, then `later`.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        if self.kind != later.kind {
            return Err(Error::domain("cannot compose unitary and superoperator propagators"));
        }
        Ok(Propagator { kind: self.kind, matrix: later.matrix.try_matmul(&self.matrix)?, dt: self.dt + later.dt })
    }

    /// Promotes a unitary to the superoperator `Ū ⊗ U`.
    pub fn to_superoperator(&self) -> Propagator {
        match self.kind {
            PropagatorKind::Superoperator => self.clone(),
            PropagatorKind::Unitary => Propagator {
                kind: PropagatorKind::Superoperator,
                matrix: self.matrix.conj().kron(&self.matrix).with_kind(Kind::Superoperator),
                dt: self.dt,
            },
        }
    }

    pub fn apply(&self, state: &QMatrix) -> Result<QMatrix> {
        apply_superoperator(self, state)
    }
}

fn commutator_super(h: &QMatrix) -> QMatrix {
    let n = h.rows();
    let id = QMatrix::sparse_identity(n);
    let hs = h.to_sparse();
    // -i (I ⊗ H - Hᵀ ⊗ I)
    (&id.kron(&hs) - &hs.transpose().kron(&id)).scale(C64::new(0.0, -1.0))
}

/// Lindblad generator `𝓛` with `d vec(ρ)/dt = 𝓛 vec(ρ)`:
/// `-i(I⊗H - Hᵀ⊗I) + Σ (L̄⊗L - ½ I⊗L†L - ½ (L†L)ᵀ⊗I)`.
pub fn liouvillian(h: &QMatrix, c_ops: &[CollapseOperator]) -> Result<QMatrix> {
    if !h.is_square() {
        return Err(Error::dim("Hamiltonian must be square"));
    }
    let n = h.rows();
    let mut l = commutator_super(h);
    for c in c_ops {
        if c.op.shape() != (n, n) {
            return Err(Error::dim("collapse operator does not match the Hamiltonian"));
        }
        l = l.try_add(&dissipator(&c.op))?;
    }
    Ok(l.compact().with_kind(Kind::Superoperator))
}

/// `L̄⊗L - ½ I⊗L†L - ½ (L†L)ᵀ⊗I`.
pub fn dissipator(op: &QMatrix) -> QMatrix {
    let n = op.rows();
    let id = QMatrix::sparse_identity(n);
    let l = op.to_sparse();
    let ldl = &l.adjoint() * &l;
    let jump = l.conj().kron(&l);
    let anti = &id.kron(&ldl) + &ldl.transpose().kron(&id);
    &jump - &anti.scale_real(0.5)
}

fn advance(clock: Clock<'_>, t: f64) {
    let mut clock = clock;
    clock.advance(t);
}

/// Propagator over time `t`: unitary without collapse operators,
/// a Liouville superoperator otherwise.
pub fn evol(h: &QMatrix, t: f64, c_ops: &[CollapseOperator], clock: Clock<'_>) -> Result<Propagator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain("evolution time must be finite and non-negative"));
    }
    let p = if c_ops.is_empty() {
        Propagator {
            kind: PropagatorKind::Unitary,
            matrix: expm(&h.to_dense().scale(C64::new(0.0, -t))),
            dt: t,
        }
    } else {
        let l = liouvillian(h, c_ops)?;
        Propagator { kind: PropagatorKind::Superoperator, matrix: expm(&l.scale_real(t)).compact(), dt: t }
    };
    advance(clock, t);
    Ok(p)
}

/// Evolves a ket or density matrix. Kets are rejected when collapse
/// operators are present.
pub fn evol_state(
    h: &QMatrix,
    t: f64,
    state: &QMatrix,
    c_ops: &[CollapseOperator],
    clock: Clock<'_>,
) -> Result<QMatrix> {
    if state.cols() == 1 && !c_ops.is_empty() {
        return Err(Error::domain("kets cannot undergo dissipative evolution; convert to a density matrix"));
    }
    let p = evol(h, t, c_ops, clock)?;
    apply_superoperator(&p, state)
}

/// `vec⁻¹(P vec(ρ))` for superoperators, `UρU†` (or `Uψ`) for unitaries.
pub fn apply_superoperator(p: &Propagator, state: &QMatrix) -> Result<QMatrix> {
    match p.kind {
        PropagatorKind::Unitary => {
            if state.rows() != p.matrix.rows() {
                return Err(Error::dim("state does not match propagator"));
            }
            if state.cols() == 1 {
                p.matrix.try_matmul(state)
            } else {
                (&p.matrix * state).try_matmul(&p.matrix.adjoint())
            }
        }
        PropagatorKind::Superoperator => {
            if state.cols() == 1 {
                if state.rows() == p.matrix.rows() {
                    return p.matrix.try_matmul(state);
                }
                return Err(Error::domain("kets cannot undergo dissipative evolution"));
            }
            let v = dm2vec(state)?;
            if v.rows() != p.matrix.cols() {
                return Err(Error::dim("state does not match propagator"));
            }
            vec2dm(&QMatrix::from_vec(v.rows(), 1, p.matrix.apply_vec(&v.to_vec()))?)
        }
    }
}

/// Stationary density matrix of the Lindblad generator, normalized to unit
/// trace. The trace condition replaces one row of `𝓛 vec(ρ) = 0`.
pub fn steady_state(h: &QMatrix, c_ops: &[CollapseOperator]) -> Result<QMatrix> {
    let n = h.rows();
    let l = liouvillian(h, c_ops)?.to_dense();
    let m = n * n;
    let mut a = l.to_vec();
    let mut b = alloc::vec![C64::new(0.0, 0.0); m];
    for j in 0..m {
        a[j] = if j % (n + 1) == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    b[0] = C64::new(1.0, 0.0);
    let x = crate::qmatrix::solve(&QMatrix::from_vec(m, m, a)?, &QMatrix::from_vec(m, 1, b)?)
        .map_err(|_| Error::domain("steady state is not unique"))?;
    vec2dm(&x)
}

/// Right-hand side `-i[H,ρ] + Σ (LρL† - ½{L†L, ρ})` in ordinary matrix form.
pub fn lindblad_rhs(h: &QMatrix, c_ops: &[CollapseOperator], rho: &QMatrix) -> QMatrix {
    let mi = C64::new(0.0, -1.0);
    let mut out = (&(h * rho) - &(rho * h)).scale(mi);
    for c in c_ops {
        let l = &c.op;
        let ld = l.adjoint();
        let ldl = &ld * l;
        out = &out + &(&(&(l * rho) * &ld) - &(&(&ldl * rho) + &(rho * &ldl)).scale_real(0.5));
    }
    out
}
