use std::f64::consts::PI;

use spinlab_core::constants::{w2f, GAMMA_13C};
use spinlab_core::models::nv::{meas_nv, nv_system, xy8, NvOptions};
use spinlab_core::propagation::{apply_superoperator, evol, evol_state, Clock};
use spinlab_core::states::{expect, rot, state_dm};
use spinlab_core::Member;

use super::{positive, RunOptions};
use crate::error::{CliError, Result};
use crate::spectrum::{argmax, magnitude_spectrum};
use crate::Table;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NvPlParams {
    pub temperature: f64,
    pub beta: f64,
    /// Axial field in tesla.
    pub b0: f64,
    /// Window (s) over which `PL₀ > PL₁` is checked.
    pub readout: f64,
}

impl Default for NvPlParams {
    fn default() -> Self {
        NvPlParams { temperature: 300.0, beta: 0.2, b0: 0.0, readout: 300e-9 }
    }
}

/// Excited-state population under illumination for ground-state starts in
/// `m_S = 0` and `m_S = +1`.
pub fn nv_pl(p: &NvPlParams, run: &RunOptions) -> Result<Vec<Table>> {
    let dt = run.dt_or(1e-9)?;
    let steps = run.steps_or(2000)?;
    let nv = nv_system(&NvOptions::default())?;
    let (on, _) = nv.transition_operators(p.temperature, p.beta)?;
    let h = nv.hamiltonian([0.0, 0.0, p.b0])?;
    let u = evol(&h, dt, &on, Clock::None)?;
    let gs = nv.op("GS.id")?;
    let es = nv.op("ES.id")?;
    let mut rho0 = gs * nv.op("S.p[0]")?;
    let mut rho1 = gs * nv.op("S.p[1]")?;

    let mut table = Table::new("nv_pl", &["t", "pl0", "pl1"]);
    table.set_meta("command", "nv-pl");
    table.set_meta("temperature", p.temperature);
    table.set_meta("beta", p.beta);
    table.set_meta("b0", p.b0);
    table.set_meta("dt", dt);
    table.set_meta("steps", steps);
    for (k, v) in nv.rate_tables(p.beta)?.0.iter() {
        table.set_meta(&format!("rate[{k}]"), v);
    }
    run.stamp(&mut table);
    let mut holds = true;
    for k in 0..steps {
        let t = k as f64 * dt;
        let (a, b) = (expect(es, &rho0)?.re, expect(es, &rho1)?.re);
        if k > 0 && t <= p.readout && a <= b {
            holds = false;
        }
        table.push(vec![t, a, b]);
        rho0 = apply_superoperator(&u, &rho0)?;
        rho1 = apply_superoperator(&u, &rho1)?;
    }
    table.set_meta("readout", p.readout);
    table.set_meta("contrast_holds", holds);
    Ok(vec![table])
}

/// NV (effective spin ½) coupled to one ¹³C in the NV rotating frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NvWeakParams {
    pub b0: f64,
    pub a_para: f64,
    pub a_perp: f64,
    /// π pulses per readout block.
    pub pulses: usize,
}

impl Default for NvWeakParams {
    fn default() -> Self {
        NvWeakParams { b0: 1.0, a_para: 2.0 * PI * 5e3, a_perp: 2.0 * PI * 20e3, pulses: 16 }
    }
}

/// Aliased precession frequency `|f - round(T f)/T|` seen when sampling
/// frequency `f` every `t_sample` seconds.
pub fn weak_alias(f: f64, t_sample: f64) -> f64 {
    (f - (t_sample * f).round() / t_sample).abs()
}

/// Repeated weak measurements: `N` blocks of `π/2_y - XY8 - π/2_x -
/// readout - wait`, with `τ = 1/(2 f_rf)` and `t_wait = 0.125/f_rf`.
/// Writes the signal per block and its spectrum.
pub fn nv_weak(p: &NvWeakParams, run: &RunOptions) -> Result<Vec<Table>> {
    run.no_dt("nv-weak")?;
    let n = run.steps_or(500)?;
    positive("b0", p.b0)?;
    if p.pulses == 0 || p.pulses % 8 != 0 {
        return Err(CliError::args(format!("--pulses must be a positive multiple of 8, got {}", p.pulses)));
    }
    let nv = nv_system(&NvOptions::spin_only().with_spin(Member::spin("C", 0.5)?))?;
    let sys = &nv.sys;
    let op = |k: &str| sys.op(k);
    let h0 = op("C.z")?
        .scale_real(GAMMA_13C * p.b0)
        .try_add(&(op("S.z")? * op("C.z")?).scale_real(p.a_para))?
        .try_add(&(op("S.x")? * op("C.x")?).scale_real(p.a_perp))?;
    let frf = w2f(p.b0 * GAMMA_13C);
    let twait = 0.125 / frf;
    let tau = 0.5 / frf;
    let t_sample = p.pulses as f64 * tau + twait;
    let alias = weak_alias(frf, t_sample);

    let rho0 = state_dm(sys, &format!("{},C[0.5]", nv.spin_key(0)?))?;
    let mut rho = rot(op("C.x")?, PI / 2.0, &rho0)?;
    let (sx, sy) = (op("S.x_red")?, op("S.y_red")?);
    let mut trace = Table::new("signal", &["block", "signal"]);
    let mut signal = Vec::with_capacity(n);
    for i in 0..n {
        rho = rot(sy, PI / 2.0, &rho)?;
        rho = xy8(&h0, tau, &nv, &rho, p.pulses)?;
        rho = rot(sx, PI / 2.0, &rho)?;
        let (m, after) = meas_nv(&rho, &nv)?;
        signal.push(m);
        trace.push(vec![i as f64, m]);
        rho = evol_state(&h0, twait, &after, &[], Clock::None)?;
    }
    let (freqs, mags) = magnitude_spectrum(&signal, t_sample);
    let mut spectrum = Table::new("spectrum", &["frequency", "magnitude"]);
    for (f, m) in freqs.iter().zip(&mags) {
        spectrum.push(vec![*f, *m]);
    }
    let peak = freqs[argmax(&mags)];
    for t in [&mut trace, &mut spectrum] {
        t.set_meta("command", "nv-weak");
        t.set_meta("b0", p.b0);
        t.set_meta("a_para", p.a_para);
        t.set_meta("a_perp", p.a_perp);
        t.set_meta("pulses", p.pulses);
        t.set_meta("blocks", n);
        t.set_meta("f_rf", frf);
        t.set_meta("tau", tau);
        t.set_meta("t_wait", twait);
        t.set_meta("t_sample", t_sample);
        t.set_meta("f_alias", alias);
        t.set_meta("f_peak", peak);
        run.stamp(t);
    }
    Ok(vec![trace, spectrum])
}
