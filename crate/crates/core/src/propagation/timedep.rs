//! Piecewise propagation under `H(t) = H0 + Σ c_i(t) H_i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{commutator_super, dissipator, liouvillian, apply_superoperator, Clock, CollapseOperator, Propagator, PropagatorKind};
use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeOptions};
use crate::qmatrix::{dense_matmul, expm, Kind, QMatrix, C64};

/// Where the control samples sit within their step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sampling {
    /// `c[k]` is the value at `t_k = k·dt`.
    #[default]
    Grid,
    /// `c[k]` is the value at `t_k + dt/2`.
    Midpoint,
}

/// Control amplitudes `c_i[k]` on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSequence {
    pub dt: f64,
    /// One row per control Hamiltonian, all of the same length.
    pub amplitudes: Vec<Vec<f64>>,
    pub sampling: Sampling,
}

impl ControlSequence {
    pub fn new(dt: f64, amplitudes: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::domain(format!("time step must be positive, got {dt}")));
        }
        if let Some(first) = amplitudes.first() {
            if amplitudes.iter().any(|a| a.len() != first.len()) {
                return Err(Error::dim("control amplitude rows differ in length"));
            }
        }
        if amplitudes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ControlSequence { dt, amplitudes, sampling: Sampling::Grid })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn steps(&self) -> usize {
        self.amplitudes.first().map_or(0, |a| a.len())
    }

    pub fn controls(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    /// Value of control `i` at the step boundary `t_k`, `k = 0..=steps`,
    /// from the piecewise-linear curve through the samples.
    pub fn boundary_value(&self, i: usize, k: usize) -> f64 {
        boundary(&self.amplitudes[i], k, self.sampling)
    }
}

fn boundary(c: &[f64], k: usize, sampling: Sampling) -> f64 {
    let n = c.len();
    if n == 1 {
        return c[0];
    }
    match sampling {
        Sampling::Grid => {
            if k < n {
                c[k]
            } else {
                2.0 * c[n - 1] - c[n - 2]
            }
        }
        Sampling::Midpoint => {
            if k == 0 {
                1.5 * c[0] - 0.5 * c[1]
            } else if k >= n {
                1.5 * c[n - 1] - 0.5 * c[n - 2]
            } else {
                0.5 * (c[k - 1] + c[k])
            }
        }
    }
}

/// Experimental time-dependent jump operator `a[k] · op`.
#[derive(Clone, Debug)]
pub struct CollapseControl {
    pub op: QMatrix,
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Matrix exponential per step.
    #[default]
    Cpu,
    /// Adaptive Runge–Kutta 4(5) per step; a cross-check for `Cpu`.
    Rk,
}

#[derive(Clone, Debug)]
pub struct PropOptions {
    pub engine: Engine,
    /// Second-order Magnus step from boundary values instead of the
    /// piecewise-constant step from the samples.
    pub magnus: bool,
    pub ode: OdeOptions,
    pub collapse: Vec<CollapseControl>,
}

impl Default for PropOptions {
    fn default() -> Self {
        PropOptions { engine: Engine::Cpu, magnus: true, ode: OdeOptions::default(), collapse: Vec::new() }
    }
}

impl PropOptions {
    /// Piecewise-constant exponentials from the samples.
    pub fn euler() -> Self {
        PropOptions { magnus: false, ..Self::default() }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }
}

/// Generator pieces: `A(t) = G0 + Σ c_i(t) G_i + Σ |a_j(t)|² D_j`.
struct Generator {
    kind: PropagatorKind,
    g0: QMatrix,
    gi: Vec<QMatrix>,
    dj: Vec<QMatrix>,
}

impl Generator {
    fn build(h0: &QMatrix, hi: &[QMatrix], c_ops: &[CollapseOperator], collapse: &[CollapseControl]) -> Result<Self> {
        let n = h0.rows();
        if !h0.is_square() || hi.iter().any(|h| h.shape() != (n, n)) || collapse.iter().any(|c| c.op.shape() != (n, n)) {
            return Err(Error::dim("Hamiltonians and jump operators must share one square shape"));
        }
        let mi = C64::new(0.0, -1.0);
        if c_ops.is_empty() && collapse.is_empty() {
            Ok(Generator {
                kind: PropagatorKind::Unitary,
                g0: h0.to_dense().scale(mi),
                gi: hi.iter().map(|h| h.to_dense().scale(mi)).collect(),
                dj: Vec::new(),
            })
        } else {
            let dense = n * n <= 256;
            let fix = |m: QMatrix| if dense { m.to_dense() } else { m.compact() };
            Ok(Generator {
                kind: PropagatorKind::Superoperator,
                g0: fix(liouvillian(h0, c_ops)?),
                gi: hi.iter().map(|h| fix(commutator_super(h))).collect(),
                dj: collapse.iter().map(|c| fix(dissipator(&c.op))).collect(),
            })
        }
    }

    fn at(&self, c: &[f64], a: &[f64]) -> Result<QMatrix> {
        let mut g = self.g0.clone();
        for (gi, &ci) in self.gi.iter().zip(c) {
            if ci != 0.0 {
                g = g.try_axpy(C64::new(ci, 0.0), gi)?;
            }
        }
        for (dj, &aj) in self.dj.iter().zip(a) {
            if aj != 0.0 {
                g = g.try_axpy(C64::new(aj * aj, 0.0), dj)?;
            }
        }
        Ok(g)
    }

    fn size(&self) -> usize {
        self.g0.rows()
    }
}

struct Schedule<'a> {
    controls: &'a ControlSequence,
    collapse: &'a [CollapseControl],
}

impl Schedule<'_> {
    fn sample(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        (
            self.controls.amplitudes.iter().map(|c| c[k]).collect(),
            self.collapse.iter().map(|c| c.amplitudes[k]).collect(),
        )
    }

    fn boundary(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let s = self.controls.sampling;
        (
            self.controls.amplitudes.iter().map(|c| boundary(c, k, s)).collect(),
            self.collapse.iter().map(|c| boundary(&c.amplitudes, k, s)).collect(),
        )
    }
}

fn check(hi: &[QMatrix], controls: &ControlSequence, opts: &PropOptions) -> Result<()> {
    if hi.len() != controls.controls() {
        return Err(Error::dim(format!("{} control Hamiltonians for {} amplitude rows", hi.len(), controls.controls())));
    }
    if controls.steps() == 0 && !hi.is_empty() {
        return Err(Error::domain("control sequence has no steps"));
    }
    if opts.collapse.iter().any(|c| c.amplitudes.len() != controls.steps()) {
        return Err(Error::dim("collapse amplitudes do not match the control grid"));
    }
    Ok(())
}

fn step_propagators<F>(
    h0: &QMatrix,
    hi: &[QMatrix],
    controls: &ControlSequence,
    c_ops: &[CollapseOperator],
    opts: &PropOptions,
    mut sink: F,
) -> Result<PropagatorKind>
where
    F: FnMut(Propagator) -> Result<()>,
{
    check(hi, controls, opts)?;
    let gen = Generator::build(h0, hi, c_ops, &opts.collapse)?;
    let sched = Schedule { controls, collapse: &opts.collapse };
    let dt = controls.dt;
    let n = gen.size();
    let kind = gen.kind;
    let mat_kind = match kind {
        PropagatorKind::Unitary => Kind::Operator,
        PropagatorKind::Superoperator => Kind::Superoperator,
    };
    for k in 0..controls.steps() {
        let matrix = match opts.engine {
            Engine::Cpu => {
                let exponent = if opts.magnus {
                    let (c1, a1) = sched.boundary(k);
                    let (c2, a2) = sched.boundary(k + 1);
                    let g1 = gen.at(&c1, &a1)?;
                    let g2 = gen.at(&c2, &a2)?;
                    let comm = (&g1 * &g2).try_sub(&(&g2 * &g1))?;
                    (&g1 + &g2).scale_real(0.5 * dt).try_axpy(C64::new(-dt * dt / 12.0, 0.0), &comm)?
                } else {
                    let (c, a) = sched.sample(k);
                    gen.at(&c, &a)?.scale_real(dt)
                };
                expm(&exponent)
            }
            Engine::Rk => {
                let t0 = k as f64 * dt;
                let (g1, g2) = if opts.magnus {
                    let (c1, a1) = sched.boundary(k);
                    let (c2, a2) = sched.boundary(k + 1);
                    (gen.at(&c1, &a1)?.to_vec(), Some(gen.at(&c2, &a2)?.to_vec()))
                } else {
                    let (c, a) = sched.sample(k);
                    (gen.at(&c, &a)?.to_vec(), None)
                };
                let mut y0 = vec![C64::zero(); n * n];
                for i in 0..n {
                    y0[i * n + i] = C64::new(1.0, 0.0);
                }
                let mut g_t = vec![C64::zero(); n * n];
                let y = dopri5(
                    |t, y, dy| {
                        match &g2 {
                            Some(g2) => {
                                // A is linear in the controls, so linear
                                // interpolation of the generator follows the
                                // piecewise-linear control curve
                                let s = (t - t0) / dt;
                                for ((o, a), b) in g_t.iter_mut().zip(&g1).zip(g2) {
                                    *o = *a * (1.0 - s) + *b * s;
                                }
                            }
                            None => g_t.copy_from_slice(&g1),
                        }
                        dy.copy_from_slice(&dense_matmul(&g_t, y, n, n, n));
                    },
                    t0,
                    t0 + dt,
                    &y0,
                    &opts.ode,
                )?;
                QMatrix::from_vec(n, n, y)?
            }
        };
        sink(Propagator { kind, matrix: matrix.with_kind(mat_kind), dt })?;
    }
    Ok(kind)
}

/// One propagator per control step.
pub fn prop_steps(
    h0: &QMatrix,
    hi: &[QMatrix],
    controls: &ControlSequence,
    c_ops: &[CollapseOperator],
    opts: &PropOptions,
    clock: Clock<'_>,
) -> Result<Vec<Propagator>> {
    let mut out = Vec::with_capacity(controls.steps());
    step_propagators(h0, hi, controls, c_ops, opts, |p| {
        out.push(p);
        Ok(())
    })?;
    let mut clock = clock;
    clock.advance(controls.duration());
    Ok(out)
}

/// Total propagator `P_K ⋯ P_1` over the control sequence.
pub fn prop(
    h0: &QMatrix,
    hi: &[QMatrix],
    controls: &ControlSequence,
    c_ops: &[CollapseOperator],
    opts: &PropOptions,
    clock: Clock<'_>,
) -> Result<Propagator> {
    let mut total: Option<Propagator> = None;
    let kind = step_propagators(h0, hi, controls, c_ops, opts, |p| {
        total = Some(match total.take() {
            None => p,
            Some(t) => t.then(&p)?,
        });
        Ok(())
    })?;
    let mut clock = clock;
    clock.advance(controls.duration());
    Ok(total.unwrap_or_else(|| Propagator::identity(h0.rows(), kind)))
}

/// Evolves `state` step by step through the control sequence.
pub fn prop_state(
    h0: &QMatrix,
    hi: &[QMatrix],
    controls: &ControlSequence,
    c_ops: &[CollapseOperator],
    opts: &PropOptions,
    state: &QMatrix,
    clock: Clock<'_>,
) -> Result<QMatrix> {
    if state.cols() == 1 && (!c_ops.is_empty() || !opts.collapse.is_empty()) {
        return Err(Error::domain("kets cannot undergo dissipative evolution; convert to a density matrix"));
    }
    let mut current = state.clone();
    step_propagators(h0, hi, controls, c_ops, opts, |p| {
        current = apply_superoperator(&p, &current)?;
        Ok(())
    })?;
    let mut clock = clock;
    clock.advance(controls.duration());
    Ok(current)
}
