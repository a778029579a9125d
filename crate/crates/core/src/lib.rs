//! Spin-dynamics core for optically addressable spin systems.
//!
//! Builds multipartite Hilbert spaces from spins and electronic levels
//! (tensor products and direct sums), generates the full operator
//! dictionary, and evolves states under Hamiltonian and Lindblad dynamics,
//! piecewise-constant controls and Fokker-Planck stochastic Liouville
//! generators.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the example
//! runner and FFT-based spectra live in the companion `spinlab` crate.

#![no_std]

extern crate alloc;

pub mod constants;
pub mod error;
pub mod fokkerplanck;
pub mod interactions;
pub mod layout;
pub mod models;
pub mod ode;
pub mod propagation;
pub mod qmatrix;
pub mod states;
pub mod system;

pub use error::{Error, Result};
pub use layout::{Decl, Member, SpaceLayout};
pub use qmatrix::{Kind, QMatrix, Tolerances, C64};
pub use system::SpinSystem;
