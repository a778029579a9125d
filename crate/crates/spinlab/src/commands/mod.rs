//! One function per example, each returning its output tables.

mod deer;
mod nmr;
mod nv;
mod scrp;

pub use deer::{deer, deer_oracle, DeerParams};
pub use nmr::{mas, pake, MasParams, PakeParams, MAGIC_ANGLE};
pub use nv::{nv_pl, nv_weak, weak_alias, NvPlParams, NvWeakParams};
pub use scrp::{scrp_cwepr, scrp_mary, CwEprParams, MaryRun};

use crate::error::{CliError, Result};

/// Global step and length overrides shared by all commands.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(CliError::args(format!("--dt must be positive, got {dt}")));
            }
        }
        if self.steps == Some(0) {
            return Err(CliError::args("--steps must be at least 1"));
        }
        Ok(())
    }

    fn dt_or(&self, default: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.dt.unwrap_or(default))
    }

    fn steps_or(&self, default: usize) -> Result<usize> {
        self.validate()?;
        Ok(self.steps.unwrap_or(default))
    }

    fn no_dt(&self, command: &str) -> Result<()> {
        match self.dt {
            Some(_) => Err(CliError::args(format!("--dt does not apply to {command}"))),
            None => Ok(()),
        }
    }

    fn stamp(&self, table: &mut crate::Table) {
        if let Some(seed) = self.seed {
            table.set_meta("seed", seed);
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::args(format!("{name} must be positive, got {value}")))
    }
}
