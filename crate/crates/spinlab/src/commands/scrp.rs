use spinlab_core::constants::{f2w, GAMMA_E};
use spinlab_core::interactions::{dipolar_coupling, DipolarApprox, Position};
use spinlab_core::models::scrp::{
    cw_epr_fieldsweep, mary_hamiltonian, mary_rates, mary_system, scrp_initial_state, scrp_mary_trace, FieldSweep, Lineshape,
    MaryParams,
};
use spinlab_core::{Decl, Member, QMatrix, SpinSystem};

use super::{linspace, positive, RunOptions};
use crate::error::{CliError, Result};
use crate::Table;

/// Free-electron g factor.
const G_E: f64 = 2.002_319_304_36;

/// Radical pair `A, B` with one proton each (`HA`, `HB`).
#[derive(Clone, Debug, PartialEq)]
pub struct CwEprParams {
    pub alpha_deg: Vec<f64>,
    pub beta_deg: f64,
    pub theta_deg: f64,
    pub purity: f64,
    pub omega_mw: f64,
    /// Lorentzian half width in tesla.
    pub broadening: f64,
    pub g_a: f64,
    pub g_b: f64,
    /// Exchange `J` in `2J A·B` (rad/s).
    pub j: f64,
    /// Electron-electron distance (m).
    pub r: f64,
    pub a_a: f64,
    pub a_b: f64,
    /// Full sweep width (T) about the mean-g resonance.
    pub sweep: f64,
}

impl Default for CwEprParams {
    fn default() -> Self {
        CwEprParams {
            alpha_deg: vec![0.0, 20.0, 90.0],
            beta_deg: 0.0,
            theta_deg: 90.0,
            purity: 1.0,
            omega_mw: f2w(9.67e9),
            broadening: 0.5e-3,
            g_a: 2.0037,
            g_b: 2.0026,
            j: f2w(1e6),
            r: 1.5e-9,
            a_a: f2w(15e6),
            a_b: f2w(8e6),
            sweep: 8e-3,
        }
    }
}

fn cwepr_system() -> Result<SpinSystem> {
    let names = ["A", "B", "HA", "HB"];
    let members = names.iter().map(|n| Member::spin(n, 0.5).map(Decl::from)).collect::<spinlab_core::Result<Vec<_>>>()?;
    Ok(SpinSystem::new(&Decl::tensor(members))?)
}

/// Derivative cw-EPR field sweeps, one column per initial-state `α`.
pub fn scrp_cwepr(p: &CwEprParams, run: &RunOptions) -> Result<Vec<Table>> {
    run.no_dt("scrp-cwepr")?;
    let points = run.steps_or(801)?;
    if p.alpha_deg.is_empty() {
        return Err(CliError::args("--alpha-deg needs at least one value"));
    }
    positive("omega-mw", p.omega_mw)?;
    positive("broadening", p.broadening)?;
    positive("r", p.r)?;
    let sys = cwepr_system()?;
    let op = |k: &str| sys.op(k);
    let mu_b = GAMMA_E.abs() / G_E;
    let h_field = op("A.z")?.scale_real(p.g_a * mu_b).try_add(&op("B.z")?.scale_real(p.g_b * mu_b))?;
    let theta = p.theta_deg.to_radians();
    let mut exchange = QMatrix::zeros(sys.dim(), sys.dim());
    for c in ["x", "y", "z"] {
        exchange = exchange.try_add(&(op(&format!("A.{c}"))? * op(&format!("B.{c}"))?))?;
    }
    let dip = dipolar_coupling(&sys, "A", "B", GAMMA_E, GAMMA_E, Position::Spherical(p.r, theta, 0.0), DipolarApprox::SecularHomonuclear)?;
    let h_rest = exchange
        .scale_real(2.0 * p.j)
        .try_add(&dip)?
        .try_add(&(op("A.z")? * op("HA.z")?).scale_real(p.a_a))?
        .try_add(&(op("B.z")? * op("HB.z")?).scale_real(p.a_b))?;
    let center = p.omega_mw / (0.5 * (p.g_a + p.g_b) * mu_b);
    let fields = linspace(center - 0.5 * p.sweep, center + 0.5 * p.sweep, points);

    let mut columns = vec!["field".to_string()];
    let mut spectra = Vec::new();
    for &a in &p.alpha_deg {
        let rho0 = scrp_initial_state(&sys, "A", "B", a.to_radians(), p.beta_deg.to_radians(), p.purity, theta, 0.0)?;
        let sweep = FieldSweep {
            spins: &["A", "B"],
            h_field: &h_field,
            h_rest: &h_rest,
            omega_mw: p.omega_mw,
            broadening: p.broadening,
            fields: &fields,
            lineshape: Lineshape::Derivative,
        };
        spectra.push(cw_epr_fieldsweep(&sys, &rho0, &sweep)?);
        columns.push(format!("alpha_{a}"));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("cwepr", &cols);
    table.set_meta("command", "scrp-cwepr");
    let alphas: Vec<String> = p.alpha_deg.iter().map(|a| a.to_string()).collect();
    table.set_meta("alpha_deg", alphas.join(";"));
    table.set_meta("beta_deg", p.beta_deg);
    table.set_meta("theta_deg", p.theta_deg);
    table.set_meta("purity", p.purity);
    table.set_meta("omega_mw", p.omega_mw);
    table.set_meta("broadening", p.broadening);
    table.set_meta("g_a", p.g_a);
    table.set_meta("g_b", p.g_b);
    table.set_meta("j", p.j);
    table.set_meta("r", p.r);
    table.set_meta("a_a", p.a_a);
    table.set_meta("a_b", p.a_b);
    table.set_meta("lineshape", "derivative");
    run.stamp(&mut table);
    for (k, b) in fields.iter().enumerate() {
        let mut row = vec![*b];
        row.extend(spectra.iter().map(|s| s[k]));
        table.push(row);
    }
    Ok(vec![table])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaryRun {
    pub params: MaryParams,
    /// Static fields in tesla.
    pub fields: Vec<f64>,
    /// Laser on for steps `pulse_start..pulse_stop`.
    pub pulse_start: usize,
    pub pulse_stop: usize,
}

impl Default for MaryRun {
    fn default() -> Self {
        MaryRun { params: MaryParams::default(), fields: vec![0.5e-3, 100e-3], pulse_start: 50, pulse_stop: 550 }
    }
}

/// Fluorescence (`S1` population) during and after a laser pulse, one
/// column per field. The header carries the post-pulse integral per field.
pub fn scrp_mary(p: &MaryRun, run: &RunOptions) -> Result<Vec<Table>> {
    let dt = run.dt_or(1e-9)?;
    let steps = run.steps_or(3000)?;
    if p.fields.is_empty() {
        return Err(CliError::args("--b needs at least one field"));
    }
    if p.pulse_start >= p.pulse_stop || p.pulse_stop > steps {
        return Err(CliError::args(format!(
            "laser window {}..{} must be non-empty and within {steps} steps",
            p.pulse_start, p.pulse_stop
        )));
    }
    let sys = mary_system()?;
    let (rates, laser) = mary_rates(&p.params);
    let traces = scrp_mary_trace(
        &sys,
        &rates,
        &laser,
        |b| mary_hamiltonian(&sys, &p.params, b),
        &p.fields,
        p.pulse_start..p.pulse_stop,
        dt,
        steps,
    )?;
    let mut columns = vec!["t".to_string()];
    columns.extend(p.fields.iter().map(|b| format!("pl_{}mT", b * 1e3)));
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new("mary", &cols);
    table.set_meta("command", "scrp-mary");
    let m = &p.params;
    for (k, v) in [
        ("kfl", m.kfl),
        ("kcs", m.kcs),
        ("kbcr", m.kbcr),
        ("kcrs", m.kcrs),
        ("kcrt", m.kcrt),
        ("kcrtt", m.kcrtt),
        ("beta", m.beta),
        ("j", m.j),
        ("hyperfine", m.hyperfine),
    ] {
        table.set_meta(k, v);
    }
    table.set_meta("dt", dt);
    table.set_meta("steps", steps);
    table.set_meta("pulse_start", p.pulse_start);
    table.set_meta("pulse_stop", p.pulse_stop);
    for (b, tr) in p.fields.iter().zip(&traces) {
        let tail: f64 = tr[p.pulse_stop..].iter().sum::<f64>() * dt;
        table.set_meta(&format!("tail[{}mT]", b * 1e3), tail);
    }
    run.stamp(&mut table);
    for k in 0..steps {
        let mut row = vec![k as f64 * dt];
        row.extend(traces.iter().map(|t| t[k]));
        table.push(row);
    }
    Ok(vec![table])
}
