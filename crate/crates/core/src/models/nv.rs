//! Nitrogen-vacancy center: room-temperature rate model, spin-only
//! variants, XY8 decoupling and optical readout.
//!
//! With optics, the layout is `([(GS, ES), S], SS)` with `S` a spin 1 and any
//! further spins tensored onto the whole electronic structure. Without
//! optics, the NV is either a spin 1 or an effective spin ½ on the
//! `{m_S = 0, m_S = -1}` pair, with `m = +½` standing for `m_S = 0`.
//!
//! Every variant defines `S.x_red`, `S.y_red` and `S.z_red`, the Pauli/2
//! operators of the `{0, -1}` subspace.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::constants::{D_NV, GAMMA_E};
use crate::error::{Error, Result};
use crate::layout::{Decl, Member};
use crate::propagation::{transition_operators, CollapseOperator, RateTable};
use crate::qmatrix::{expm, QMatrix, C64};
use crate::states::expect;
use crate::system::SpinSystem;

/// Excited-state zero-field splitting, rad/s.
pub const D_ES: f64 = 2.0 * core::f64::consts::PI * 1.42e9;

/// Lowest temperature at which the incoherent rate model is used.
pub const MIN_TEMPERATURE: f64 = 100.0;

/// Optical rates in s⁻¹.
///
/// Defaults follow the commonly used room-temperature compilation:
/// radiative decay 65 MHz, intersystem crossing 11 MHz from `m_S = 0` and
/// 80 MHz from `m_S = ±1`, and singlet decay 3.3 MHz split 1.15 : 1 between
/// `m_S = 0` and the `±1` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NvRates {
    /// Pump rate at saturation (`beta = 1`).
    pub k_sat: f64,
    pub k_rad: f64,
    pub k_isc0: f64,
    /// Per `m_S = ±1` sublevel.
    pub k_isc1: f64,
    pub k_ss0: f64,
    /// Total to the `±1` pair, split evenly.
    pub k_ss1: f64,
}

impl Default for NvRates {
    fn default() -> Self {
        let k_ss = 3.3e6;
        let branching = 1.15;
        NvRates {
            k_sat: 6.5e7,
            k_rad: 6.5e7,
            k_isc0: 1.1e7,
            k_isc1: 8.0e7,
            k_ss0: k_ss * branching / (1.0 + branching),
            k_ss1: k_ss / (1.0 + branching),
        }
    }
}

impl NvRates {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k_sat, self.k_rad, self.k_isc0, self.k_isc1, self.k_ss0, self.k_ss1];
        if all.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
            return Err(Error::domain("NV rates must be positive and finite"));
        }
        if self.k_isc1 <= self.k_isc0 {
            return Err(Error::Physicality("intersystem crossing must be faster from m_S = ±1".into()));
        }
        if self.k_ss1 >= self.k_ss0 {
            return Err(Error::Physicality("singlet decay must favor m_S = 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NvOptions {
    pub optics: bool,
    /// Nitrogen hyperfine structure; not supported.
    pub nitrogen: bool,
    /// Without optics: keep the full spin 1 instead of the effective spin ½.
    pub spin_one: bool,
    pub further_spins: Vec<Member>,
    pub rates: NvRates,
}

impl Default for NvOptions {
    fn default() -> Self {
        NvOptions { optics: true, nitrogen: false, spin_one: false, further_spins: Vec::new(), rates: NvRates::default() }
    }
}

impl NvOptions {
    pub fn spin_only() -> Self {
        NvOptions { optics: false, ..Self::default() }
    }

    pub fn with_spin(mut self, m: Member) -> Self {
        self.further_spins.push(m);
        self
    }
}

#[derive(Clone, Debug)]
pub struct NvSystem {
    pub sys: SpinSystem,
    pub optics: bool,
    /// Effective spin ½ NV.
    pub effective: bool,
    pub rates: NvRates,
}

impl NvSystem {
    pub fn new(opts: &NvOptions) -> Result<Self> {
        if opts.nitrogen {
            return Err(Error::Unsupported("nitrogen hyperfine structure is not modeled".into()));
        }
        opts.rates.validate()?;
        let effective = !opts.optics && !opts.spin_one;
        let nv = if effective {
            Member::spin("S", 0.5)?.with_tag("NV-")
        } else {
            Member::spin("S", 1.0)?.with_tag("NV-")
        };
        let extra: Vec<Decl> = opts.further_spins.iter().cloned().map(Decl::Member).collect();
        let decl = if opts.optics {
            let electronic = Decl::sum([
                Decl::tensor([Decl::sum([Member::level("GS")?.into(), Member::level("ES")?.into()]), nv.into()]),
                Member::level("SS")?.into(),
            ]);
            if extra.is_empty() {
                electronic
            } else {
                Decl::tensor(core::iter::once(electronic).chain(extra))
            }
        } else if extra.is_empty() {
            Decl::Member(nv)
        } else {
            Decl::tensor(core::iter::once(Decl::Member(nv)).chain(extra))
        };
        let mut sys = SpinSystem::new(&decl)?;
        let s = sys.layout().index_of("S")?;
        let (x, y, z) = if effective {
            (sys.op("S.x")?.clone(), sys.op("S.y")?.clone(), sys.op("S.z")?.clone())
        } else {
            let h = C64::new(0.5, 0.0);
            let ih = C64::new(0.0, 0.5);
            let o = C64::zero();
            let lx = QMatrix::from_vec(3, 3, vec![o, o, o, o, o, h, o, h, o])?;
            let ly = QMatrix::from_vec(3, 3, vec![o, o, o, o, o, -ih, o, ih, o])?;
            let lz = QMatrix::diag_real(&[0.0, 0.5, -0.5]);
            let l = sys.layout();
            (l.embed_all(&[s], &lx)?, l.embed_all(&[s], &ly)?, l.embed_all(&[s], &lz)?)
        };
        sys.insert_op("S.x_red", x)?;
        sys.insert_op("S.y_red", y)?;
        sys.insert_op("S.z_red", z)?;
        Ok(NvSystem { sys, optics: opts.optics, effective, rates: opts.rates })
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn op(&self, key: &str) -> Result<&QMatrix> {
        self.sys.op(key)
    }

    /// Projector on `m_S = 0` (over all electronic levels with optics).
    pub fn ms0(&self) -> Result<&QMatrix> {
        self.sys.op(if self.effective { "S.p[0.5]" } else { "S.p[0]" })
    }

    /// State key of an NV sublevel, `ms ∈ {1, 0, -1}`; the effective spin
    /// has no `m_S = +1`.
    pub fn spin_key(&self, ms: i32) -> Result<&'static str> {
        match (self.effective, ms) {
            (true, 0) => Ok("S[0.5]"),
            (true, -1) => Ok("S[-0.5]"),
            (false, 1) => Ok("S[1]"),
            (false, 0) => Ok("S[0]"),
            (false, -1) => Ok("S[-1]"),
            _ => Err(Error::domain(format!("m_S = {ms} is not part of this NV model"))),
        }
    }

    /// NV Hamiltonian for field `b` (tesla): zero-field splitting plus
    /// electron Zeeman term. With optics the ground and excited states get
    /// their own splittings; the effective spin ½ carries the
    /// `m_S = -1` energy relative to `m_S = 0`.
    pub fn hamiltonian(&self, b: [f64; 3]) -> Result<QMatrix> {
        let sys = &self.sys;
        if self.effective {
            let e_minus = D_NV - GAMMA_E * b[2];
            let id = sys.op("S.id")?;
            return Ok((id.scale_real(0.5).try_sub(sys.op("S.z")?)?).scale_real(e_minus));
        }
        let sz = sys.op("S.z")?;
        let id = sys.op("S.id")?;
        let axial = (sz * sz).try_sub(&id.scale_real(2.0 / 3.0))?;
        let zeeman = crate::interactions::zeeman_interaction(sys, "S", GAMMA_E, b)?;
        if self.optics {
            let gs = sys.op("GS.id")?;
            let es = sys.op("ES.id")?;
            let zfs = (gs * &axial).scale_real(D_NV).try_add(&(es * &axial).scale_real(D_ES))?;
            zfs.try_add(&zeeman)
        } else {
            axial.scale_real(D_NV).try_add(&zeeman)
        }
    }

    /// Rate tables with (`on`) and without (`off`) the pump.
    pub fn rate_tables(&self, beta: f64) -> Result<(RateTable, RateTable)> {
        if !self.optics {
            return Err(Error::domain("optical rates need an NV system with optics"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::domain(format!("beta must lie in [0, 1], got {beta}")));
        }
        let r = &self.rates;
        let off = RateTable::new()
            .with("ES -> GS", r.k_rad)
            .with("ES,S[0] -> SS", r.k_isc0)
            .with("ES,S[1] -> SS", r.k_isc1)
            .with("ES,S[-1] -> SS", r.k_isc1)
            .with("SS -> GS,S[0]", r.k_ss0)
            .with("SS -> GS,S[1]", 0.5 * r.k_ss1)
            .with("SS -> GS,S[-1]", 0.5 * r.k_ss1);
        let mut on = RateTable::new().with("GS -> ES", beta * r.k_sat);
        for (k, v) in off.iter() {
            on.insert(k, v);
        }
        Ok((on, off))
    }

    /// Collapse operators with and without illumination at temperature `t`
    /// (kelvin) and pump saturation `beta`.
    pub fn transition_operators(&self, temperature: f64, beta: f64) -> Result<(Vec<CollapseOperator>, Vec<CollapseOperator>)> {
        if !(temperature >= MIN_TEMPERATURE) {
            return Err(Error::Unsupported(format!(
                "T = {temperature} K is below {MIN_TEMPERATURE} K; the low-temperature orbital excited-state model is not implemented"
            )));
        }
        let (on, off) = self.rate_tables(beta)?;
        Ok((transition_operators(&self.sys, &on)?, transition_operators(&self.sys, &off)?))
    }
}

pub fn nv_system(opts: &NvOptions) -> Result<NvSystem> {
    NvSystem::new(opts)
}

fn conjugate(u: &QMatrix, state: &QMatrix) -> Result<QMatrix> {
    if state.cols() == 1 {
        u.try_matmul(state)
    } else {
        (u * state).try_matmul(&u.adjoint())
    }
}

/// XY8 decoupling with `n` ideal π pulses (a multiple of 8) about
/// `X Y X Y Y X Y X` on the NV, separated by free evolution `tau` under
/// `h0` with `tau/2` at the block edges. Total duration `n·tau`.
pub fn xy8(h0: &QMatrix, tau: f64, nv: &NvSystem, state: &QMatrix, n: usize) -> Result<QMatrix> {
    if n == 0 || n % 8 != 0 {
        return Err(Error::domain(format!("XY8 needs a positive multiple of 8 pulses, got {n}")));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain("XY8 spacing must be positive"));
    }
    let mi = C64::new(0.0, -1.0);
    let pi = core::f64::consts::PI;
    let px = expm(&nv.op("S.x_red")?.to_dense().scale(mi * pi));
    let py = expm(&nv.op("S.y_red")?.to_dense().scale(mi * pi));
    let full = expm(&h0.to_dense().scale(mi * tau));
    let half = expm(&h0.to_dense().scale(mi * (0.5 * tau)));
    let axes = [&px, &py, &px, &py, &py, &px, &py, &px];
    let mut block = half.clone();
    for (k, p) in axes.iter().enumerate() {
        block = p.try_matmul(&block)?;
        let free = if k + 1 == axes.len() { &half } else { &full };
        block = free.try_matmul(&block)?;
    }
    let mut u = QMatrix::identity(block.rows());
    for _ in 0..n / 8 {
        u = block.try_matmul(&u)?;
    }
    conjugate(&u, state)
}

/// Optical readout: the `m_S = 0` population, then a reset of the NV to
/// `m_S = 0` that keeps the reduced state of the other spins.
pub fn meas_nv(rho: &QMatrix, nv: &NvSystem) -> Result<(f64, QMatrix)> {
    if nv.optics {
        return Err(Error::domain("readout with reset needs an NV system without optics"));
    }
    if rho.cols() == 1 {
        return Err(Error::dim("readout expects a density matrix"));
    }
    let signal = expect(nv.ms0()?, rho)?.re;
    let d = nv.sys.member("S")?.multiplicity();
    let k0 = if nv.effective { 0 } else { 1 };
    let p0 = QMatrix::from_fn(d, d, |i, j| if i == k0 && j == k0 { C64::new(1.0, 0.0) } else { C64::zero() });
    let others: Vec<&str> = nv.sys.members().iter().filter(|m| m.name != "S").map(|m| m.name.as_str()).collect();
    let after = if others.is_empty() {
        p0
    } else {
        let rest = nv.sys.layout().ptrace(rho, &others)?;
        p0.kron(&rest)
    };
    Ok((signal, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::steady_state;
    use crate::states::state_dm;

    #[test]
    fn dimensions() {
        assert_eq!(nv_system(&NvOptions::default()).unwrap().dim(), 7);
        let c = Member::spin("C", 0.5).unwrap();
        assert_eq!(nv_system(&NvOptions::spin_only().with_spin(c.clone())).unwrap().dim(), 4);
        assert_eq!(nv_system(&NvOptions::default().with_spin(c)).unwrap().dim(), 14);
        assert_eq!(nv_system(&NvOptions { spin_one: true, ..NvOptions::spin_only() }).unwrap().dim(), 3);
        assert!(matches!(nv_system(&NvOptions { nitrogen: true, ..NvOptions::default() }), Err(Error::Unsupported(_))));
    }

    #[test]
    fn optical_polarization() {
        let nv = nv_system(&NvOptions::default()).unwrap();
        let (on, off) = nv.transition_operators(300.0, 0.2).unwrap();
        assert_eq!(on.len(), off.len() + 1);
        let h = nv.hamiltonian([0.0; 3]).unwrap();
        let rho = steady_state(&h, &on).unwrap();
        let gs0 = expect(&(nv.op("GS.id").unwrap() * nv.op("S.p[0]").unwrap()), &rho).unwrap().re;
        let gs = expect(nv.op("GS.id").unwrap(), &rho).unwrap().re;
        assert!(gs0 > gs / 3.0);
        assert!(nv.transition_operators(50.0, 0.2).is_err());
        let (z_on, z_off) = nv.transition_operators(300.0, 0.0).unwrap();
        assert_eq!(z_on.len(), z_off.len());
    }

    #[test]
    fn readout_resets() {
        let nv = nv_system(&NvOptions::spin_only().with_spin(Member::spin("C", 0.5).unwrap())).unwrap();
        let rho = state_dm(&nv.sys, "S[-0.5],C[0.5]").unwrap();
        let (sig, after) = meas_nv(&rho, &nv).unwrap();
        assert!(sig.abs() < 1e-14);
        assert!(after.approx_eq(&state_dm(&nv.sys, "S[0.5],C[0.5]").unwrap(), 1e-14));
        let (sig, again) = meas_nv(&after, &nv).unwrap();
        assert!((sig - 1.0).abs() < 1e-14 && again.approx_eq(&after, 1e-14));
    }

    #[test]
    fn xy8_refocuses_static_shift() {
        let nv = nv_system(&NvOptions::spin_only()).unwrap();
        let h0 = nv.op("S.z").unwrap().scale_real(2.0e6);
        let plus = crate::states::rot(nv.op("S.y").unwrap(), core::f64::consts::FRAC_PI_2, &state_dm(&nv.sys, "S[0.5]").unwrap()).unwrap();
        let out = xy8(&h0, 1.3e-6, &nv, &plus, 16).unwrap();
        assert!(out.approx_eq(&plus, 1e-10));
        assert!(xy8(&h0, 1e-6, &nv, &plus, 12).is_err());
    }
}
