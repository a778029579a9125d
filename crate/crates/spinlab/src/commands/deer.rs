use std::f64::consts::PI;

use spinlab_core::constants::{HBAR, MU0};
use spinlab_core::interactions::{dipolar_coupling, DipolarApprox, Position};
use spinlab_core::propagation::{evol_state, Clock};
use spinlab_core::states::{expect, rot, state};
use spinlab_core::{Decl, Member, SpinSystem};

use super::{positive, RunOptions};
use crate::error::Result;
use crate::Table;

/// Two-spin DEER in reduced units (`μ0 = ħ = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeerParams {
    pub r: f64,
    pub theta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for DeerParams {
    fn default() -> Self {
        DeerParams { r: 1.0, theta: PI / 3.0, gamma1: 1.0, gamma2: 1.0 }
    }
}

/// Closed-form echo modulation `cos(γ1γ2 t (3 sin²θ - 2) / (8π r³))`.
pub fn deer_oracle(p: &DeerParams, t: f64) -> f64 {
    let r3 = p.r.powi(3);
    let g = p.gamma1 * p.gamma2;
    (g * (3.0 * t * p.theta.sin().powi(2) / (8.0 * PI * r3) - t / (4.0 * PI * r3))).cos()
}

/// Echo `⟨Sz⟩` for the sequence `π/2_x(S) - t/2 - π_y(S) π_y(I) - t/2 - (-π/2)_x(S)`
/// at `t = k·dt`, `k = 0..steps`.
pub fn deer(p: &DeerParams, run: &RunOptions) -> Result<Vec<Table>> {
    let dt = run.dt_or(20.0)?;
    let steps = run.steps_or(100)?;
    positive("r", p.r)?;
    let sys = SpinSystem::new(&Decl::tensor([Member::spin("S", 0.5)?.into(), Member::spin("I", 0.5)?.into()]))?;
    // undo the SI prefactor so the coupling is γ1γ2/(4π r³)
    let reduced = 1.0 / (MU0 * HBAR);
    let h0 = dipolar_coupling(&sys, "S", "I", p.gamma1 * reduced, p.gamma2, Position::Spherical(p.r, p.theta, 0.0), DipolarApprox::Secular)?;
    let psi0 = state(&sys, "S[-0.5],I[-0.5]")?;
    let (sx, sy, iy, sz) = (sys.op("S.x")?, sys.op("S.y")?, sys.op("I.y")?, sys.op("S.z")?);

    let mut table = Table::new("deer", &["t", "sz"]);
    table.set_meta("command", "deer");
    table.set_meta("units", "reduced (mu0 = hbar = 1)");
    table.set_meta("r", p.r);
    table.set_meta("theta", p.theta);
    table.set_meta("gamma1", p.gamma1);
    table.set_meta("gamma2", p.gamma2);
    table.set_meta("dt", dt);
    table.set_meta("steps", steps);
    run.stamp(&mut table);
    for k in 0..steps {
        let t = k as f64 * dt;
        let psi = rot(sx, PI / 2.0, &psi0)?;
        let psi = evol_state(&h0, t / 2.0, &psi, &[], Clock::None)?;
        let psi = rot(iy, PI, &rot(sy, PI, &psi)?)?;
        let psi = evol_state(&h0, t / 2.0, &psi, &[], Clock::None)?;
        let psi = rot(sx, -PI / 2.0, &psi)?;
        table.push(vec![t, expect(sz, &psi)?.re]);
    }
    Ok(vec![table])
}
