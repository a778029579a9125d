//! Rotating-field drive sequences for [`super::prop`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use super::{Clock, ControlSequence, Sampling};
use crate::error::{Error, Result};
use crate::qmatrix::QMatrix;
use crate::system::SpinSystem;

fn drive_ops(sys: &SpinSystem, spin: &str) -> Result<Vec<QMatrix>> {
    let m = sys.member(spin)?;
    if !m.is_spin() {
        return Err(Error::domain(format!("`{spin}` is not a spin")));
    }
    Ok(vec![sys.op(&format!("{spin}.x"))?.clone(), sys.op(&format!("{spin}.y"))?.clone()])
}

/// Controls `[Sx, Sy]` with `c_x = A(t) cos(ω t + φ)`, `c_y = A(t) sin(ω t + φ)`,
/// sampled at step midpoints on a clock starting at `clock.elapsed()`.
/// The clock is read, not advanced.
pub fn arb_pulse(
    sys: &SpinSystem,
    spin: &str,
    envelope: &[f64],
    freq: f64,
    phase: f64,
    dt: f64,
    clock: &Clock<'_>,
) -> Result<(Vec<QMatrix>, ControlSequence)> {
    if envelope.is_empty() {
        return Err(Error::domain("pulse envelope is empty"));
    }
    let ops = drive_ops(sys, spin)?;
    let t0 = clock.elapsed();
    let mut cx = Vec::with_capacity(envelope.len());
    let mut cy = Vec::with_capacity(envelope.len());
    for (k, &a) in envelope.iter().enumerate() {
        let arg = freq * (t0 + (k as f64 + 0.5) * dt) + phase;
        cx.push(a * arg.cos());
        cy.push(a * arg.sin());
    }
    Ok((ops, ControlSequence::new(dt, vec![cx, cy])?.with_sampling(Sampling::Midpoint)))
}

/// Constant-amplitude rotating drive of length `duration`, which must be a
/// whole number of steps `dt`.
pub fn square_pulse(
    sys: &SpinSystem,
    spin: &str,
    amplitude: f64,
    freq: f64,
    phase: f64,
    duration: f64,
    dt: f64,
    clock: &Clock<'_>,
) -> Result<(Vec<QMatrix>, ControlSequence)> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::domain("pulse duration and step must be positive"));
    }
    let steps = (duration / dt).round();
    if (steps * dt - duration).abs() > 1e-9 * duration {
        return Err(Error::domain(format!("step {dt} does not divide pulse duration {duration}")));
    }
    arb_pulse(sys, spin, &vec![amplitude; steps as usize], freq, phase, dt, clock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Decl, Member};
    use crate::propagation::{prop_state, PropOptions, Wallclock};
    use crate::states::{expect, state};

    #[test]
    fn resonant_pi_pulse_inverts() {
        let sys = SpinSystem::new(&Decl::Member(Member::spin("S", 0.5).unwrap())).unwrap();
        let w0 = 2.0 * core::f64::consts::PI * 50e6;
        let rabi = 2.0 * core::f64::consts::PI * 5e6;
        let h0 = sys.op("S.z").unwrap().scale_real(w0);
        let mut wc = Wallclock::new();
        wc.advance(3.3e-7);
        let clock = Clock::Local(&mut wc);
        let (hi, c) = square_pulse(&sys, "S", rabi, w0, 0.0, 1e-7, 1e-10, &clock).unwrap();
        assert_eq!(c.steps(), 1000);
        let psi = prop_state(&h0, &hi, &c, &[], &PropOptions::default(), &state(&sys, "S[0.5]").unwrap(), clock).unwrap();
        assert!((expect(sys.op("S.z").unwrap(), &psi).unwrap().re + 0.5).abs() < 1e-5);
        assert!(square_pulse(&sys, "S", rabi, w0, 0.0, 1e-7, 3e-10, &Clock::None).is_err());
    }
}
