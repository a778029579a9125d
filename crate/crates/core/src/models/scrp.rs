//! Spin-correlated radical pairs: entangled initial states, cw-EPR field
//! sweeps and magnetic-field effects on fluorescence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::constants::{GAMMA_1H, GAMMA_E};
use crate::error::{Error, Result};
use crate::layout::{Decl, Member};
use crate::propagation::{apply_superoperator, evol, transition_operators, Clock, RateTable};
use crate::qmatrix::{eig_hermitian, expm, QMatrix, C64};
use crate::states::expect;
use crate::system::{spin_operators, SpinSystem};

fn pair_members(sys: &SpinSystem, a: &str, b: &str) -> Result<[usize; 2]> {
    let ia = sys.layout().index_of(a)?;
    let ib = sys.layout().index_of(b)?;
    for (name, i) in [(a, ia), (b, ib)] {
        if sys.members()[i].twice_spin() != 1 {
            return Err(Error::domain(format!("`{name}` must be a spin 1/2")));
        }
    }
    Ok([ia, ib])
}

/// `cos α |S⟩ + e^{iβ} sin α |T0⟩` on the pair, rotated by
/// `exp(-iφ Sz) exp(-iθ Sy)` of the total pair spin, mixed with the
/// identity as `p |ψ⟩⟨ψ| + (1 - p) I/4` and embedded with the remaining
/// spins of the pair's branch maximally mixed.
pub fn scrp_initial_state(
    sys: &SpinSystem,
    a: &str,
    b: &str,
    alpha: f64,
    beta: f64,
    purity: f64,
    theta: f64,
    phi: f64,
) -> Result<QMatrix> {
    if !(0.0..=1.0).contains(&purity) {
        return Err(Error::domain(format!("purity must lie in [0, 1], got {purity}")));
    }
    let members = pair_members(sys, a, b)?;
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let ph = C64::from_polar(1.0, beta);
    // basis |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
    let psi = QMatrix::ket(&[
        C64::zero(),
        (C64::new(ca, 0.0) + ph * sa) * r,
        (C64::new(-ca, 0.0) + ph * sa) * r,
        C64::zero(),
    ])?;
    let so = spin_operators(1);
    let id2 = QMatrix::identity(2);
    let total_y = &so.y.kron(&id2) + &id2.kron(&so.y);
    let total_z = &so.z.kron(&id2) + &id2.kron(&so.z);
    let mi = C64::new(0.0, -1.0);
    let rot = &expm(&total_z.scale(mi * phi)) * &expm(&total_y.scale(mi * theta));
    let psi = &rot * &psi;
    let pure = &psi * &psi.adjoint();
    let pair = &pure.scale_real(purity) + &QMatrix::identity(4).scale_real((1.0 - purity) / 4.0);
    let secs = sys.layout().sectors_with(&members);
    if secs.len() != 1 {
        return Err(Error::Inseparable(format!("{a},{b}")));
    }
    let rho = sys.layout().embed(secs[0], &members, &pair)?;
    let tr = rho.trace().re;
    Ok(rho.scale_real(1.0 / tr))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lineshape {
    /// Field derivative of a Lorentzian, as in field-modulated detection.
    Derivative,
    Absorption,
}

/// Parameters of a cw-EPR field sweep. `h_field` is the field-dependent
/// Hamiltonian per tesla, `broadening` a Lorentzian half width in tesla.
#[derive(Clone, Debug)]
pub struct FieldSweep<'a> {
    pub spins: &'a [&'a str],
    pub h_field: &'a QMatrix,
    pub h_rest: &'a QMatrix,
    pub omega_mw: f64,
    pub broadening: f64,
    pub fields: &'a [f64],
    pub lineshape: Lineshape,
}

/// cw-EPR spectrum on `sweep.fields`, normalized to a maximum magnitude of 1.
///
/// At each field the Hamiltonian is diagonalized. Every level pair
/// contributes a line weighted by `|⟨i|Sx|j⟩|²` and the population
/// difference under `rho0`, placed at the distance from resonance converted
/// to field units with the local slope `d(E_j - E_i)/dB`.
pub fn cw_epr_fieldsweep(sys: &SpinSystem, rho0: &QMatrix, sweep: &FieldSweep<'_>) -> Result<Vec<f64>> {
    if sweep.fields.is_empty() {
        return Err(Error::domain("field grid is empty"));
    }
    if !(sweep.omega_mw > 0.0) || !(sweep.broadening > 0.0) {
        return Err(Error::domain("microwave frequency and broadening must be positive"));
    }
    let n = sys.dim();
    let mut sx = QMatrix::zeros(n, n);
    for s in sweep.spins {
        sx = sx.try_add(sys.op(&format!("{s}.x"))?)?;
    }
    let g = sweep.broadening;
    let mut out = Vec::with_capacity(sweep.fields.len());
    for &b in sweep.fields {
        let h = sweep.h_field.scale_real(b).try_add(sweep.h_rest)?;
        let e = eig_hermitian(&h)?;
        let v = &e.vectors;
        let vd = v.adjoint();
        let sx_e = (&vd * &sx).try_matmul(v)?;
        let rho_e = (&vd * rho0).try_matmul(v)?;
        let hf_e = (&vd * sweep.h_field).try_matmul(v)?;
        let mut acc = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = sx_e.get(i, j).norm_sqr();
                if w < 1e-14 {
                    continue;
                }
                let dp = rho_e.get(i, i).re - rho_e.get(j, j).re;
                let slope = hf_e.get(j, j).re - hf_e.get(i, i).re;
                if slope.abs() < 1e-12 * sweep.omega_mw {
                    continue;
                }
                let delta = (e.values[j] - e.values[i] - sweep.omega_mw) / slope;
                let den = delta * delta + g * g;
                acc += w * dp
                    * match sweep.lineshape {
                        Lineshape::Absorption => g * g / den,
                        Lineshape::Derivative => -2.0 * delta * g * g * g / (den * den),
                    };
            }
        }
        out.push(acc);
    }
    let max = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    Ok(out)
}

/// Rate constants (s⁻¹) and couplings (rad/s) of the fluorescence model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaryParams {
    pub kfl: f64,
    pub kcs: f64,
    pub kbcr: f64,
    pub kcrs: f64,
    pub kcrt: f64,
    pub kcrtt: f64,
    /// Pump strength relative to `kfl`.
    pub beta: f64,
    /// Exchange coupling `J` in `2J A·B`.
    pub j: f64,
    /// Isotropic hyperfine coupling of `A` to `H`.
    pub hyperfine: f64,
}

impl Default for MaryParams {
    fn default() -> Self {
        MaryParams {
            kfl: 2.0e8,
            kcs: 1.0e9,
            kbcr: 2.0e8,
            kcrs: 2.0e7,
            kcrt: 1.0e8,
            kcrtt: 1.0e6,
            beta: 0.5,
            // 2J equals the electron Zeeman splitting at 100 mT
            j: 0.5 * GAMMA_E.abs() * 0.1,
            hyperfine: GAMMA_E.abs() * 2.0e-3,
        }
    }
}

/// Electronic levels `(GS, S1, [A, B, H], T1)` with the singlet/triplet
/// ghost spin `C` on `A, B`.
pub fn mary_system() -> Result<SpinSystem> {
    let decl = Decl::sum([
        Member::level("GS")?.into(),
        Member::level("S1")?.into(),
        Decl::tensor([Member::spin("A", 0.5)?.into(), Member::spin("B", 0.5)?.into(), Member::spin("H", 0.5)?.into()]),
        Member::level("T1")?.into(),
    ]);
    SpinSystem::new(&decl)?.add_ghostspin("C", &["A", "B"])
}

/// `(rates, rates_laser)`.
pub fn mary_rates(p: &MaryParams) -> (RateTable, RateTable) {
    let rates = RateTable::new()
        .with("S1->GS", p.kfl)
        .with("S1->C_1[0]", p.kcs)
        .with("S1<-C_1[0]", p.kbcr)
        .with("C_1[0] -> GS", p.kcrs)
        .with("C_3[-1]-> T1", p.kcrt)
        .with("C_3[0] -> T1", p.kcrt)
        .with("C_3[1] -> T1", p.kcrt)
        .with("T1 -> GS", p.kcrtt);
    let laser = RateTable::new().with("GS->S1", p.beta * p.kfl);
    (rates, laser)
}

/// Zeeman, exchange and hyperfine terms of the pair at field `b` (tesla).
pub fn mary_hamiltonian(sys: &SpinSystem, p: &MaryParams, b: f64) -> Result<QMatrix> {
    let op = |k: &str| sys.op(k);
    let zeeman = (op("A.z")? + op("B.z")?).scale_real(GAMMA_E * b).try_add(&op("H.z")?.scale_real(GAMMA_1H * b))?;
    let dot = |x: &str, y: &str| -> Result<QMatrix> {
        let mut acc = QMatrix::zeros(sys.dim(), sys.dim());
        for c in ["x", "y", "z"] {
            acc = acc.try_add(&(op(&format!("{x}.{c}"))? * op(&format!("{y}.{c}"))?))?;
        }
        Ok(acc)
    };
    let exchange = dot("A", "B")?.scale_real(2.0 * p.j);
    let hf = dot("A", "H")?.scale_real(p.hyperfine);
    zeeman.try_add(&exchange)?.try_add(&hf)
}

/// Fluorescence model run: starting from the ground state, records the
/// `S1` population each step, evolving with the pump on for steps in
/// `window` and off otherwise. One trace per field.
pub fn scrp_mary_trace<F>(
    sys: &SpinSystem,
    rates: &RateTable,
    rates_laser: &RateTable,
    mut hamiltonian: F,
    fields: &[f64],
    window: core::ops::Range<usize>,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64) -> Result<QMatrix>,
{
    let off = transition_operators(sys, rates)?;
    let mut on = off.clone();
    on.extend(transition_operators(sys, rates_laser)?);
    let gs = sys.op("GS.id")?;
    let rho0 = gs.scale_real(1.0 / gs.trace().re);
    let pl = sys.op("S1.id")?;
    let mut traces = Vec::with_capacity(fields.len());
    for &b in fields {
        let h = hamiltonian(b)?;
        let bright = evol(&h, dt, &on, Clock::None)?;
        let dark = evol(&h, dt, &off, Clock::None)?;
        let mut rho = rho0.clone();
        let mut trace = vec![0.0; steps];
        for (i, slot) in trace.iter_mut().enumerate() {
            *slot = expect(pl, &rho)?.re;
            let u = if window.contains(&i) { &bright } else { &dark };
            rho = apply_superoperator(u, &rho)?;
        }
        traces.push(trace);
    }
    Ok(traces)
}
