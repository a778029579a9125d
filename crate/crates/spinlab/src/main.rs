use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinlab::commands::{self, CwEprParams, DeerParams, MasParams, MaryRun, NvPlParams, NvWeakParams, PakeParams, RunOptions};
use spinlab::output::write_tables;
use spinlab::{CliError, Format, Table};
use spinlab_core::models::scrp::MaryParams;

#[derive(Parser, Debug)]
#[command(name = "spinlab", version, about = "Spin-dynamics example runner writing CSV/JSON traces")]
struct Cli {
    /// Output file; secondary tables get `_<name>` appended to the stem.
    /// Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Time step in seconds (reduced units for `deer`).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Number of samples (time points, blocks or field points).
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Recorded in the header; no command draws random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Four-pulse DEER echo against the pump delay.
    Deer(DeerArgs),
    /// NV photoluminescence during readout for m_S = 0 and 1.
    NvPl(NvPlArgs),
    /// Weak measurement of a 13C spin with an NV sensor.
    NvWeak(NvWeakArgs),
    /// cw-EPR field sweeps of a spin-correlated radical pair.
    ScrpCwepr(CwEprArgs),
    /// Field-dependent fluorescence of a radical-pair system.
    ScrpMary(MaryArgs),
    /// Static dipolar powder pattern.
    Pake(PakeArgs),
    /// Magic-angle spinning of a dipolar pair.
    Mas(MasArgs),
}

#[derive(Args, Debug)]
struct DeerArgs {
    #[arg(long, default_value_t = DeerParams::default().r)]
    r: f64,
    #[arg(long, default_value_t = DeerParams::default().theta)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
}

#[derive(Args, Debug)]
struct NvPlArgs {
    #[arg(long, default_value_t = 300.0)]
    temperature: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    b0: f64,
    #[arg(long, default_value_t = 300e-9)]
    readout: f64,
}

#[derive(Args, Debug)]
struct NvWeakArgs {
    #[arg(long, default_value_t = NvWeakParams::default().b0)]
    b0: f64,
    #[arg(long, default_value_t = NvWeakParams::default().a_para)]
    a_para: f64,
    #[arg(long, default_value_t = NvWeakParams::default().a_perp)]
    a_perp: f64,
    #[arg(long, default_value_t = 16)]
    pulses: usize,
}

#[derive(Args, Debug)]
struct CwEprArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 20.0, 90.0])]
    alpha_deg: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta_deg: f64,
    #[arg(long, default_value_t = 90.0)]
    theta_deg: f64,
    #[arg(long, default_value_t = 1.0)]
    purity: f64,
    #[arg(long, default_value_t = CwEprParams::default().omega_mw)]
    omega_mw: f64,
    #[arg(long, default_value_t = CwEprParams::default().broadening)]
    broadening: f64,
    #[arg(long, default_value_t = CwEprParams::default().j)]
    j: f64,
    #[arg(long, default_value_t = CwEprParams::default().r)]
    r: f64,
    #[arg(long, default_value_t = CwEprParams::default().sweep)]
    sweep: f64,
}

#[derive(Args, Debug)]
struct MaryArgs {
    /// Static fields in tesla.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5e-3, 100e-3])]
    b: Vec<f64>,
    #[arg(long, default_value_t = MaryParams::default().kfl)]
    kfl: f64,
    #[arg(long, default_value_t = MaryParams::default().kcs)]
    kcs: f64,
    #[arg(long, default_value_t = MaryParams::default().kbcr)]
    kbcr: f64,
    #[arg(long, default_value_t = MaryParams::default().kcrs)]
    kcrs: f64,
    #[arg(long, default_value_t = MaryParams::default().kcrt)]
    kcrt: f64,
    #[arg(long, default_value_t = MaryParams::default().kcrtt)]
    kcrtt: f64,
    #[arg(long, default_value_t = MaryParams::default().beta)]
    beta: f64,
    #[arg(long, default_value_t = MaryParams::default().j)]
    j: f64,
    #[arg(long, default_value_t = MaryParams::default().hyperfine)]
    hyperfine: f64,
    #[arg(long, default_value_t = MaryRun::default().pulse_start)]
    pulse_start: usize,
    #[arg(long, default_value_t = MaryRun::default().pulse_stop)]
    pulse_stop: usize,
}

#[derive(Args, Debug)]
struct PakeArgs {
    #[arg(long, default_value_t = 3e-10)]
    r: f64,
    #[arg(long, default_value_t = PakeParams::default().theta_points)]
    theta_points: usize,
    /// Single orientation in degrees instead of the powder grid.
    #[arg(long)]
    theta_deg: Option<f64>,
    #[arg(long, default_value_t = PakeParams::default().lb)]
    lb: f64,
}

#[derive(Args, Debug)]
struct MasArgs {
    #[arg(long, default_value_t = 3e-10)]
    r: f64,
    #[arg(long, default_value_t = MasParams::default().phi_points)]
    phi_points: usize,
    #[arg(long, default_value_t = 100e3)]
    nu_r: f64,
    #[arg(long, default_value_t = MasParams::default().lb)]
    lb: f64,
}

fn dispatch(command: &Command, run: &RunOptions) -> Result<Vec<Table>, CliError> {
    match command {
        Command::Deer(a) => commands::deer(&DeerParams { r: a.r, theta: a.theta, gamma1: a.gamma1, gamma2: a.gamma2 }, run),
        Command::NvPl(a) => {
            commands::nv_pl(&NvPlParams { temperature: a.temperature, beta: a.beta, b0: a.b0, readout: a.readout }, run)
        }
        Command::NvWeak(a) => {
            commands::nv_weak(&NvWeakParams { b0: a.b0, a_para: a.a_para, a_perp: a.a_perp, pulses: a.pulses }, run)
        }
        Command::ScrpCwepr(a) => {
            let p = CwEprParams {
                alpha_deg: a.alpha_deg.clone(),
                beta_deg: a.beta_deg,
                theta_deg: a.theta_deg,
                purity: a.purity,
                omega_mw: a.omega_mw,
                broadening: a.broadening,
                j: a.j,
                r: a.r,
                sweep: a.sweep,
                ..CwEprParams::default()
            };
            commands::scrp_cwepr(&p, run)
        }
        Command::ScrpMary(a) => {
            let params = MaryParams {
                kfl: a.kfl,
                kcs: a.kcs,
                kbcr: a.kbcr,
                kcrs: a.kcrs,
                kcrt: a.kcrt,
                kcrtt: a.kcrtt,
                beta: a.beta,
                j: a.j,
                hyperfine: a.hyperfine,
            };
            commands::scrp_mary(&MaryRun { params, fields: a.b.clone(), pulse_start: a.pulse_start, pulse_stop: a.pulse_stop }, run)
        }
        Command::Pake(a) => commands::pake(
            &PakeParams { r: a.r, theta_points: a.theta_points, theta_deg: a.theta_deg, lb: a.lb, ..PakeParams::default() },
            run,
        ),
        Command::Mas(a) => {
            commands::mas(&MasParams { r: a.r, phi_points: a.phi_points, nu_r: a.nu_r, lb: a.lb, ..MasParams::default() }, run)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = RunOptions { dt: cli.dt, steps: cli.steps, seed: cli.seed };
    let result = run.validate().and_then(|_| dispatch(&cli.command, &run)).and_then(|tables| {
        write_tables(&tables, cli.out.as_deref(), cli.format)?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
