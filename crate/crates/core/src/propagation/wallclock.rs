use core::sync::atomic::{AtomicU64, Ordering};

/// Elapsed simulation time in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Wallclock {
    elapsed: f64,
}

impl Wallclock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn advance(&mut self, dt: f64) {
        self.elapsed += dt;
    }

    pub fn reset(&mut self) {
        self.elapsed = 0.0;
    }
}

static GLOBAL: AtomicU64 = AtomicU64::new(0);

/// Elapsed time on the process-wide clock.
///
/// The global clock is shared by every caller in the process; concurrent
/// simulations that use it see each other's advances. Prefer a local
/// [`Wallclock`] in threaded code.
pub fn global_elapsed() -> f64 {
    f64::from_bits(GLOBAL.load(Ordering::Relaxed))
}

pub fn reset_global_clock() {
    GLOBAL.store(0f64.to_bits(), Ordering::Relaxed);
}

fn advance_global(dt: f64) {
    let _ = GLOBAL.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |bits| Some((f64::from_bits(bits) + dt).to_bits()));
}

/// Which clock, if any, an evolution call advances.
#[derive(Debug, Default)]
pub enum Clock<'a> {
    #[default]
    None,
    Global,
    Local(&'a mut Wallclock),
}

impl Clock<'_> {
    /// Current time of the selected clock; zero for [`Clock::None`].
    pub fn elapsed(&self) -> f64 {
        match self {
            Clock::None => 0.0,
            Clock::Global => global_elapsed(),
            Clock::Local(w) => w.elapsed(),
        }
    }

    pub fn advance(&mut self, dt: f64) {
        match self {
            Clock::None => {}
            Clock::Global => advance_global(dt),
            Clock::Local(w) => w.advance(dt),
        }
    }

    /// Reborrows the clock for a nested call.
    pub fn reborrow(&mut self) -> Clock<'_> {
        match self {
            Clock::None => Clock::None,
            Clock::Global => Clock::Global,
            Clock::Local(w) => Clock::Local(w),
        }
    }
}
