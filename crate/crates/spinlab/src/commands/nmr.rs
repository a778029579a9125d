use std::f64::consts::PI;

use spinlab_core::constants::{GAMMA_19F, GAMMA_1H};
use spinlab_core::fokkerplanck::{dm2fp, fp_expect, stochastic_evol, Coordinate, FpState, Space, StochasticParameters};
use spinlab_core::interactions::{dipolar_coupling, dipolar_constant, DipolarApprox, Position};
use spinlab_core::states::{pol_spin, rot};
use spinlab_core::{Decl, Member, QMatrix, SpinSystem, C64};

use super::{linspace, positive, RunOptions};
use crate::error::{CliError, Result};
use crate::spectrum::{fid_spectrum, second_moment};
use crate::Table;

/// `acos(1/√3)`, where `3cos²θ - 1` vanishes.
pub const MAGIC_ANGLE: f64 = 0.955_316_618_124_509_3;

/// Heteronuclear pair `I`, `J` with detection on `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct PakeParams {
    pub r: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub theta_points: usize,
    /// Single orientation instead of the powder grid.
    pub theta_deg: Option<f64>,
    /// Gaussian line broadening, FWHM in Hz.
    pub lb: f64,
}

impl Default for PakeParams {
    fn default() -> Self {
        PakeParams { r: 3e-10, gamma1: GAMMA_1H, gamma2: GAMMA_19F, theta_points: 200, theta_deg: None, lb: 100.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasParams {
    pub r: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub phi_points: usize,
    /// Rotor frequency in Hz.
    pub nu_r: f64,
    pub lb: f64,
}

impl Default for MasParams {
    fn default() -> Self {
        MasParams { r: 3e-10, gamma1: GAMMA_1H, gamma2: GAMMA_19F, phi_points: 100, nu_r: 100e3, lb: 200.0 }
    }
}

fn pair() -> Result<SpinSystem> {
    Ok(SpinSystem::new(&Decl::tensor([Member::spin("I", 0.5)?.into(), Member::spin("J", 0.5)?.into()]))?)
}

/// `I` rotated to the transverse plane, `J` unpolarized.
fn initial_state(sys: &SpinSystem) -> Result<QMatrix> {
    let rho0 = pol_spin(1.0)?.kron(&pol_spin(0.0)?);
    Ok(rot(sys.op("I.x")?, PI / 2.0, &rho0)?)
}

fn detector(sys: &SpinSystem) -> Result<QMatrix> {
    Ok(sys.op("I.x")?.try_axpy(C64::new(0.0, 1.0), sys.op("I.y")?)?)
}

/// Zero-order phase so that the first point is real and positive.
fn phase_first_point(fid: &mut [C64]) {
    if let Some(&s0) = fid.first() {
        if s0.norm() > 0.0 {
            let c = s0.conj() / s0.norm();
            fid.iter_mut().for_each(|z| *z *= c);
        }
    }
}

fn spectrum_table(name: &str, fid: &[C64], dt: f64, lb: f64) -> (Table, Table) {
    let (f, s) = fid_spectrum(fid, dt, lb);
    let mut spec = Table::new(name, &["frequency", "intensity"]);
    for (f, s) in f.iter().zip(&s) {
        spec.push(vec![*f, *s]);
    }
    spec.set_meta("second_moment", second_moment(&f, &s));
    let mut trace = Table::new("fid", &["t", "re", "im"]);
    for (k, z) in fid.iter().enumerate() {
        trace.push(vec![k as f64 * dt, z.re, z.im]);
    }
    (spec, trace)
}

fn stamp_pair(t: &mut Table, r: f64, g1: f64, g2: f64, lb: f64, dt: f64, steps: usize) {
    let d = dipolar_constant(g1, g2, r);
    t.set_meta("r", r);
    t.set_meta("gamma1", g1);
    t.set_meta("gamma2", g2);
    t.set_meta("d", d);
    t.set_meta("d_hz", d / (2.0 * PI));
    t.set_meta("lb", lb);
    t.set_meta("dt", dt);
    t.set_meta("steps", steps);
}

/// Static powder spectrum over a `sin θ` weighted polar grid on `[0, π]`.
pub fn pake(p: &PakeParams, run: &RunOptions) -> Result<Vec<Table>> {
    let dt = run.dt_or(2e-5)?;
    let steps = run.steps_or(1024)?;
    positive("r", p.r)?;
    let coord = match p.theta_deg {
        Some(deg) => Coordinate::new("theta", vec![deg.to_radians()]),
        None => {
            if p.theta_points < 2 {
                return Err(CliError::args("--theta-points must be at least 2"));
            }
            let values = linspace(0.0, PI, p.theta_points);
            let w = values.iter().map(|t| t.sin().abs()).collect();
            Coordinate::new("theta", values).with_weights(w)
        }
    };
    let params = StochasticParameters::new().with(coord);
    let sys = pair()?;
    let h_fun = |x: &[f64]| {
        dipolar_coupling(&sys, "I", "J", p.gamma1, p.gamma2, Position::Spherical(p.r, x[0], 0.0), DipolarApprox::Secular)
    };
    let u = stochastic_evol(h_fun, &params, dt, Space::Liouville, &[])?;
    let det = detector(&sys)?;
    let mut state = dm2fp(&initial_state(&sys)?, &params)?;
    let mut fid = Vec::with_capacity(steps);
    for _ in 0..steps {
        fid.push(fp_expect(&det, &state)?);
        state = u.apply(&state)?;
    }
    phase_first_point(&mut fid);
    let (mut spec, mut trace) = spectrum_table("pake", &fid, dt, p.lb);
    for t in [&mut spec, &mut trace] {
        t.set_meta("command", "pake");
        stamp_pair(t, p.r, p.gamma1, p.gamma2, p.lb, dt, steps);
        match p.theta_deg {
            Some(deg) => t.set_meta("theta_deg", deg),
            None => t.set_meta("theta_points", p.theta_points),
        }
        run.stamp(t);
    }
    Ok(vec![spec, trace])
}

/// Rotation of `v` by `angle` about the unit vector `axis`.
fn rotate(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
    let cross = [axis[1] * v[2] - axis[2] * v[1], axis[2] * v[0] - axis[0] * v[2], axis[0] * v[1] - axis[1] * v[0]];
    [0, 1, 2].map(|i| v[i] * c + cross[i] * s + axis[i] * dot * (1.0 - c))
}

fn trace_of(state: &FpState, id: &QMatrix) -> Result<f64> {
    Ok(fp_expect(id, state)?.re)
}

/// Magic-angle spinning of a pair along the rotor's z at time zero,
/// sampled once per rotor period. `--dt` sets the propagation step, which
/// must divide the rotor period.
pub fn mas(p: &MasParams, run: &RunOptions) -> Result<Vec<Table>> {
    positive("nu-r", p.nu_r)?;
    positive("r", p.r)?;
    let period = 1.0 / p.nu_r;
    let dt = run.dt_or(period)?;
    let samples = run.steps_or(1024)?;
    let sub = (period / dt).round();
    if sub < 1.0 || (sub * dt - period).abs() > 1e-9 * period {
        return Err(CliError::args(format!("--dt {dt} does not divide the rotor period {period}")));
    }
    if p.phi_points < 2 {
        return Err(CliError::args("--phi-points must be at least 2"));
    }
    let axis = [MAGIC_ANGLE.sin(), 0.0, MAGIC_ANGLE.cos()];
    let params = StochasticParameters::new()
        .with(Coordinate::periodic_grid("phi", p.phi_points).with_dynamics(1, 2.0 * PI * p.nu_r));
    let sys = pair()?;
    let h_fun = |x: &[f64]| {
        let v = rotate([0.0, 0.0, p.r], axis, x[0]);
        dipolar_coupling(&sys, "I", "J", p.gamma1, p.gamma2, Position::Cartesian(v), DipolarApprox::Secular)
    };
    let u = stochastic_evol(h_fun, &params, dt, Space::Liouville, &[])?;
    let det = detector(&sys)?;
    let id = sys.identity();
    let mut state = dm2fp(&initial_state(&sys)?, &params)?;
    let mut fid = Vec::with_capacity(samples);
    let mut drift = 0.0f64;
    for _ in 0..samples {
        fid.push(fp_expect(&det, &state)?);
        drift = drift.max((trace_of(&state, &id)? - 1.0).abs());
        for _ in 0..sub as usize {
            state = u.apply(&state)?;
        }
    }
    phase_first_point(&mut fid);
    let (mut spec, mut trace) = spectrum_table("mas", &fid, period, p.lb);
    for t in [&mut spec, &mut trace] {
        t.set_meta("command", "mas");
        stamp_pair(t, p.r, p.gamma1, p.gamma2, p.lb, dt, samples);
        t.set_meta("nu_r", p.nu_r);
        t.set_meta("phi_points", p.phi_points);
        t.set_meta("sample_interval", period);
        t.set_meta("trace_drift", drift);
        run.stamp(t);
    }
    Ok(vec![spec, trace])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_angle_value() {
        assert!((3.0 * MAGIC_ANGLE.cos().powi(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_about_axis() {
        let v = rotate([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], PI / 2.0);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        let axis = [MAGIC_ANGLE.sin(), 0.0, MAGIC_ANGLE.cos()];
        let w = rotate([0.0, 0.0, 1.0], axis, 1.3);
        let along = w[0] * axis[0] + w[2] * axis[2];
        assert!((along - MAGIC_ANGLE.cos()).abs() < 1e-14);
    }

    #[test]
    fn magic_orientation_gives_one_line() {
        let p = PakeParams { theta_deg: Some(MAGIC_ANGLE.to_degrees()), ..Default::default() };
        let t = pake(&p, &RunOptions { steps: Some(256), ..Default::default() }).unwrap();
        let im = t[1].column("im").unwrap();
        let re = t[1].column("re").unwrap();
        let s0 = re[0];
        assert!(re.iter().zip(&im).all(|(r, i)| (r - s0).abs() < 1e-9 && i.abs() < 1e-9));
    }
}
